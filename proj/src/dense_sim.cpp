#include <algorithm>

#include "ccsim/decoder.hpp"
#include "ccsim/sim.hpp"

namespace ccsim {

namespace {

void apply_letter(PauliFrame& f, const NoiseChannel::Letter& l, int q0, int q1) {
  if (l.x & 1) f.mul_x(q0);
  if (l.z & 1) f.mul_z(q0);
  if (l.x & 2) f.mul_x(q1);
  if (l.z & 2) f.mul_z(q1);
}

NoiseChannel make_channel(const Instruction& ins) {
  switch (ins.channel) {
    case ChannelKind::DEPOL1: return NoiseChannel::depol1(ins.p);
    case ChannelKind::DEPOL2: return NoiseChannel::depol2(ins.p);
    case ChannelKind::X_FLIP: return NoiseChannel::x_flip(ins.p);
    case ChannelKind::Z_FLIP: return NoiseChannel::z_flip(ins.p);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

TerminalResult DenseSimulator::run_shot(uint64_t shot, const ForcedFault* forced) const {
  const ProtocolTree& tree = *ct_.tree;
  StreamRng rng(mix_key(seed_, 0x64656e73, shot));
  std::bernoulli_distribution flip;

  PauliFrame f;
  std::vector<uint32_t> set_bits;
  int node = 0;
  TerminalResult res;
  res.shot = shot;

  auto chance = [&](double p) {
    if (noise_off_ || forced) return false;
    if (p <= 0) return false;
    return std::bernoulli_distribution(p)(rng.engine());
  };

  while (true) {
    const TreeNode& tn = tree.nodes[node];
    int meas_cursor = ct_.nodes[node].record_base;
    for (size_t k = 0; k < tn.circuit.instrs.size(); k++) {
      const Instruction& ins = tn.circuit.instrs[k];
      bool force_here = forced && forced->node == node && forced->instr == (int)k;
      switch (ins.kind) {
        case InstrKind::GATE:
          f = conjugate_frame(f, {ins.gate, ins.q0, ins.q1});
          break;
        case InstrKind::RESET:
          f = apply_reset(f, ins.q0);
          if (randomize_) {
            if (ins.basis == MeasureBasis::Z)
              f.z ^= (Bits)(rng.bits() & 1) << ins.q0;
            else
              f.x ^= (Bits)(rng.bits() & 1) << ins.q0;
          }
          if (force_here || chance(ins.p)) {
            if (ins.basis == MeasureBasis::Z)
              f.mul_x(ins.q0);
            else
              f.mul_z(ins.q0);
          }
          break;
        case InstrKind::MEASURE: {
          auto [nf, bit] = apply_measurement(f, ins.q0, ins.basis);
          f = nf;
          if (randomize_) {
            if (ins.basis == MeasureBasis::Z)
              f.z ^= (Bits)(rng.bits() & 1) << ins.q0;
            else
              f.x ^= (Bits)(rng.bits() & 1) << ins.q0;
          }
          if ((force_here && forced->record_flip) || chance(ins.p)) bit ^= 1;
          if (bit) set_bits.push_back((uint32_t)meas_cursor);
          meas_cursor++;
          break;
        }
        case InstrKind::CHANNEL: {
          NoiseChannel ch = make_channel(ins);
          if (force_here) {
            apply_letter(f, ch.letters.at(forced->letter), ins.q0, ins.q1);
          } else if (chance(ins.p)) {
            apply_letter(f, ch.draw(rng), ins.q0, ins.q1);
          }
          break;
        }
        case InstrKind::IDLE:
        case InstrKind::DETECTOR:
          break;
        case InstrKind::COND_PAULI:
          if (eval_predicate(*ins.cond, ct_, node, set_bits)) {
            f.x ^= ins.pauli_x;
            f.z ^= ins.pauli_z;
          }
          break;
        case InstrKind::LOOKUP_CORR:
          apply_lookup_correction(*ins.lookup, ct_, node, set_bits, f);
          break;
      }
    }
    if (tn.edges.empty()) {
      res.terminal_node = node;
      res.frame = f;
      res.record = set_bits;
      if (tn.terminal) {
        if (tn.terminal->discard)
          res.discarded = eval_predicate(*tn.terminal->discard, ct_, node, set_bits);
        for (const auto& out : tn.terminal->outputs) {
          int v = eval_predicate(out.value, ct_, node, set_bits);
          if (out.dress_random)
            v ^= keyed_bit(seed_, splitmix64(std::hash<std::string>{}(out.name)), shot);
          res.outputs.push_back({out.name, v});
        }
      }
      return res;
    }
    int next = -1;
    for (const auto& e : tn.edges)
      if (eval_predicate(e.when, ct_, node, set_bits)) {
        if (next != -1) throw std::runtime_error("two edges satisfied at node " + tn.name);
        next = e.next;
      }
    if (next == -1) throw std::runtime_error("no edge satisfied at node " + tn.name);
    node = next;
  }
}

std::vector<TerminalResult> DenseSimulator::run(uint64_t n_shots) const {
  std::vector<TerminalResult> out;
  out.reserve(n_shots);
  for (uint64_t s = 0; s < n_shots; s++) out.push_back(run_shot(s));
  return out;
}

}  // namespace ccsim
