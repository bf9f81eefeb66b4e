#include "ccsim/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace ccsim {

double idle_dephase_prob(double t_s, double t2_s) {
  if (t_s < 0) throw std::invalid_argument("negative idle duration");
  if (t2_s <= 0) throw std::invalid_argument("T2 must be positive");
  return 0.5 * (1.0 - std::exp(-t_s / t2_s));
}

namespace {

void assert_clean(const Circuit& c) {
  for (const auto& ins : c.instrs) {
    bool noisy = ins.kind == InstrKind::CHANNEL ||
                 ((ins.kind == InstrKind::MEASURE || ins.kind == InstrKind::RESET) && ins.p > 0);
    if (noisy) throw std::invalid_argument("channels already attached");
  }
}

Instruction channel(ChannelKind kind, double p, int q0, int q1, uint16_t layer) {
  Instruction ins;
  ins.kind = InstrKind::CHANNEL;
  ins.channel = kind;
  ins.p = p;
  ins.q0 = q0;
  ins.q1 = q1;
  ins.layer = layer;
  return ins;
}

}  // namespace

Circuit scem_attach(const Circuit& circuit, const ScemParams& params) {
  assert_clean(circuit);
  double p = params.p;
  if (p < 0 || p > 1) throw std::invalid_argument("SCEM rate outside [0,1]");
  Circuit out;
  out.n_qubits = circuit.n_qubits;
  for (const auto& ins : circuit.instrs) {
    switch (ins.kind) {
      case InstrKind::GATE:
        out.instrs.push_back(ins);
        if (p > 0) {
          if (gate_is_two_qubit(ins.gate))
            out.instrs.push_back(channel(ChannelKind::DEPOL2, p, ins.q0, ins.q1, ins.layer));
          else if (ins.gate != GateKind::I)
            out.instrs.push_back(channel(ChannelKind::DEPOL1, p, ins.q0, -1, ins.layer));
        }
        break;
      case InstrKind::IDLE:
        out.instrs.push_back(ins);
        if (p > 0) out.instrs.push_back(channel(ChannelKind::DEPOL1, p, ins.q0, -1, ins.layer));
        break;
      case InstrKind::MEASURE: {
        if (p > 0) out.instrs.push_back(channel(ChannelKind::DEPOL1, p, ins.q0, -1, ins.layer));
        Instruction m = ins;
        m.p = p;  // classical record flip
        out.instrs.push_back(m);
        break;
      }
      case InstrKind::RESET: {
        Instruction r = ins;
        r.p = p;  // basis flip after preparation
        out.instrs.push_back(r);
        break;
      }
      default:
        out.instrs.push_back(ins);
    }
  }
  return out;
}

ProtocolTree scem_attach(const ProtocolTree& tree, const ScemParams& params) {
  ProtocolTree out = tree;
  for (auto& node : out.nodes) node.circuit = scem_attach(node.circuit, params);
  return out;
}

Circuit multichannel_attach(const Circuit& circuit, const MultiChannelParams& params,
                            const NeighborMap& neighbors) {
  assert_clean(circuit);
  Circuit out;
  out.n_qubits = circuit.n_qubits;
  auto crosstalk = [&](const Instruction& g) {
    if (!neighbors || params.p_ct <= 0) return;
    for (int t : {g.q0, g.q1}) {
      if (t < 0) continue;
      for (int nb : neighbors(t)) {
        if (nb == g.q0 || nb == g.q1 || nb < 0) continue;
        out.instrs.push_back(channel(ChannelKind::DEPOL2, params.p_ct, t, nb, g.layer));
      }
    }
  };
  for (const auto& ins : circuit.instrs) {
    switch (ins.kind) {
      case InstrKind::GATE:
        out.instrs.push_back(ins);
        if (ins.gate == GateKind::I) break;
        if (gate_is_two_qubit(ins.gate)) {
          if (params.p_2q > 0)
            out.instrs.push_back(channel(ChannelKind::DEPOL2, params.p_2q, ins.q0, ins.q1, ins.layer));
        } else if (params.p_1q > 0) {
          out.instrs.push_back(channel(ChannelKind::DEPOL1, params.p_1q, ins.q0, -1, ins.layer));
        }
        crosstalk(ins);
        break;
      case InstrKind::IDLE: {
        if (ins.duration_s < 0)
          throw std::invalid_argument("idle marker with unresolved duration");
        out.instrs.push_back(ins);
        double pid = idle_dephase_prob(ins.duration_s, params.t2_s);
        if (pid > 0)
          out.instrs.push_back(channel(ChannelKind::Z_FLIP, pid, ins.q0, -1, ins.layer));
        break;
      }
      case InstrKind::MEASURE: {
        Instruction m = ins;
        m.p = params.p_m;  // classical flip only
        out.instrs.push_back(m);
        break;
      }
      case InstrKind::RESET: {
        Instruction r = ins;
        r.p = params.p_r;
        out.instrs.push_back(r);
        break;
      }
      default:
        out.instrs.push_back(ins);
    }
  }
  return out;
}

ProtocolTree multichannel_attach(const ProtocolTree& tree, const MultiChannelParams& params,
                                 const NeighborMap& neighbors) {
  ProtocolTree out = tree;
  for (auto& node : out.nodes) node.circuit = multichannel_attach(node.circuit, params, neighbors);
  return out;
}

}  // namespace ccsim
