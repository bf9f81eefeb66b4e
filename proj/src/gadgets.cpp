#include "ccsim/gadgets.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "ccsim/noise.hpp"
#include "ccsim/sim.hpp"

namespace ccsim {

const char* to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Sequential: return "sequential";
    case ProtocolKind::Simultaneous: return "simultaneous";
    case ProtocolKind::Superdense: return "superdense";
  }
  return "?";
}

ProtocolKind protocol_from_string(const std::string& s) {
  if (s == "sequential") return ProtocolKind::Sequential;
  if (s == "simultaneous") return ProtocolKind::Simultaneous;
  if (s == "superdense") return ProtocolKind::Superdense;
  throw std::invalid_argument("unknown protocol kind: " + s);
}

std::pair<Bits, Bits> state_observable(CardinalState s, const std::vector<int>& data) {
  Bits lz = 0;
  for (int i : {0, 1, 4}) lz |= Bits{1} << data[i];
  switch (s) {
    case CardinalState::Zero:
    case CardinalState::One:
      return {0, lz};
    case CardinalState::Plus:
    case CardinalState::Minus:
      return {lz, 0};
    case CardinalState::PlusI:
    case CardinalState::MinusI:
      return {lz, lz};
  }
  return {0, lz};
}

namespace {

struct Block {
  std::vector<int> data;  // 7 labels in code order
  std::vector<int> synd;
  std::vector<int> flag;
  int q(int local) const { return data[local]; }
};

std::vector<int> plaq_qubits(const ColorCode& code, int p, const Block& b) {
  std::vector<int> out;
  for (int i = 0; i < 7; i++)
    if (code.plaquettes[p].support >> i & 1) out.push_back(b.data[i]);
  return out;  // ascending data order
}

struct StabBits {
  std::string synd;
  std::string flag;
};

std::vector<std::string> flags_of(const std::vector<StabBits>& v) {
  std::vector<std::string> out;
  for (const auto& sb : v) out.push_back(sb.flag);
  return out;
}

std::vector<std::string> synds_of(const std::vector<StabBits>& v) {
  std::vector<std::string> out;
  for (const auto& sb : v) out.push_back(sb.synd);
  return out;
}

Predicate any_set(const std::vector<std::string>& bits) {
  std::vector<Predicate> ps;
  for (const auto& b : bits) ps.push_back(Predicate::parity({b}, 1));
  return Predicate::any_of(std::move(ps));
}

// Ancilla initialization/readout bases for a stabilizer of the given type:
// S^X uses a |+> syndrome ancilla controlling the data CNOTs and a |0> flag;
// S^Z conjugates both roles.
MeasureBasis synd_basis(MeasureBasis stab) {
  return stab == MeasureBasis::X ? MeasureBasis::X : MeasureBasis::Z;
}
MeasureBasis flag_basis(MeasureBasis stab) {
  return stab == MeasureBasis::X ? MeasureBasis::Z : MeasureBasis::X;
}

// Flagged readout of the three plaquettes of one block in the packed
// 8-layer schedule: reset, four data-CNOT slots with the two flag couplings
// wrapping the middle ones, joint measurement. Slot k holds each
// plaquette's k-th data qubit in ascending order; the slots are
// qubit-disjoint across plaquettes, which pins the hook-error pairs to the
// last two data qubits of each plaquette.
void emit_flagged_block(CircuitBuilder& cb, const ColorCode& code, const Block& b,
                        MeasureBasis basis, const std::string& tag, std::vector<StabBits>* bits,
                        uint8_t random_mask = 0) {
  int P = (int)code.plaquettes.size();
  cb.begin_layer();
  for (int p = 0; p < P; p++) {
    cb.reset(b.synd[p], synd_basis(basis));
    cb.reset(b.flag[p], flag_basis(basis));
  }
  cb.end_layer();
  auto data_layer = [&](int slot) {
    cb.begin_layer();
    for (int p = 0; p < P; p++) {
      auto qs = plaq_qubits(code, p, b);
      if (basis == MeasureBasis::X)
        cb.gate(GateKind::CX, b.synd[p], qs[slot]);
      else
        cb.gate(GateKind::CX, qs[slot], b.synd[p]);
    }
    cb.end_layer();
  };
  auto flag_layer = [&]() {
    cb.begin_layer();
    for (int p = 0; p < P; p++) {
      if (basis == MeasureBasis::X)
        cb.gate(GateKind::CX, b.synd[p], b.flag[p]);
      else
        cb.gate(GateKind::CX, b.flag[p], b.synd[p]);
    }
    cb.end_layer();
  };
  data_layer(0);
  flag_layer();
  data_layer(1);
  data_layer(2);
  flag_layer();
  data_layer(3);
  cb.begin_layer();
  for (int p = 0; p < P; p++) {
    StabBits sb;
    sb.synd = cb.measure(b.synd[p], synd_basis(basis), tag + "s" + std::to_string(p + 1),
                         random_mask >> p & 1);
    sb.flag = cb.measure(b.flag[p], flag_basis(basis), tag + "f" + std::to_string(p + 1), false);
    if (bits) bits->push_back(sb);
  }
  cb.end_layer();
}

// Un-flagged readout: 6 layers (reset, four data slots, measurement).
void emit_bare_block(CircuitBuilder& cb, const ColorCode& code, const Block& b,
                     MeasureBasis basis, const std::string& tag, std::vector<std::string>* bits,
                     uint8_t random_mask = 0) {
  int P = (int)code.plaquettes.size();
  cb.begin_layer();
  for (int p = 0; p < P; p++) cb.reset(b.synd[p], synd_basis(basis));
  cb.end_layer();
  for (int slot = 0; slot < 4; slot++) {
    cb.begin_layer();
    for (int p = 0; p < P; p++) {
      auto qs = plaq_qubits(code, p, b);
      if (basis == MeasureBasis::X)
        cb.gate(GateKind::CX, b.synd[p], qs[slot]);
      else
        cb.gate(GateKind::CX, qs[slot], b.synd[p]);
    }
    cb.end_layer();
  }
  cb.begin_layer();
  for (int p = 0; p < P; p++) {
    auto bit = cb.measure(b.synd[p], synd_basis(basis), tag + "s" + std::to_string(p + 1),
                          random_mask >> p & 1);
    if (bits) bits->push_back(bit);
  }
  cb.end_layer();
}

// One flagged (or bare) single-plaquette readout with its own reset and
// measurement layers (the sequential scheme and the weight-6 direct
// measurement reuse this shape).
struct SingleStab {
  std::string synd;
  std::string flag;  // empty for bare
};

SingleStab emit_single_stab(CircuitBuilder& cb, const std::vector<int>& qs, MeasureBasis basis,
                            int anc, int flag, const std::string& tag, bool random_synd = false) {
  int w = (int)qs.size();
  cb.begin_layer();
  cb.reset(anc, synd_basis(basis));
  if (flag >= 0) cb.reset(flag, flag_basis(basis));
  cb.end_layer();
  auto data_cx = [&](int i) {
    cb.begin_layer();
    if (basis == MeasureBasis::X)
      cb.gate(GateKind::CX, anc, qs[i]);
    else
      cb.gate(GateKind::CX, qs[i], anc);
    cb.end_layer();
  };
  auto flag_cx = [&]() {
    cb.begin_layer();
    if (basis == MeasureBasis::X)
      cb.gate(GateKind::CX, anc, flag);
    else
      cb.gate(GateKind::CX, flag, anc);
    cb.end_layer();
  };
  data_cx(0);
  if (flag >= 0) flag_cx();
  for (int i = 1; i < w - 1; i++) data_cx(i);
  if (flag >= 0) flag_cx();
  data_cx(w - 1);
  SingleStab out;
  cb.begin_layer();
  out.synd = cb.measure(anc, synd_basis(basis), tag + "s", random_synd);
  if (flag >= 0) out.flag = cb.measure(flag, flag_basis(basis), tag + "f", false);
  cb.end_layer();
  return out;
}

// Superdense readout: a Bell pair (aX, aZ) per plaquette measures S^X and
// S^Z together in ten layers: resets, bells, a packed window of data CNOTs,
// un-bells, joint measurement. The data window (searched offline) staggers
// the plaquette windows and keeps every cross-plaquette CNOT-ordering parity
// even, so both outcomes per plaquette are deterministic on a codeword.
void emit_superdense_block(CircuitBuilder& cb, const ColorCode& code, const Block& b,
                           const std::string& tag, std::vector<StabBits>* bits,
                           uint8_t random_mask = 0) {
  (void)code;
  struct Gate {
    char kind;  // 'B' bell, 'U' un-bell, 'X' aX->data, 'Z' data->aZ
    int p;
    int q;  // local data label for X/Z
  };
  static const std::vector<std::vector<Gate>> kLayers = {
      {{'B', 0, -1}, {'B', 1, -1}, {'B', 2, -1}},
      {{'X', 0, 2}, {'Z', 0, 1}, {'X', 1, 5}, {'Z', 1, 4}, {'Z', 2, 6}},
      {{'X', 0, 3}, {'Z', 0, 0}, {'X', 1, 1}, {'Z', 1, 2}, {'Z', 2, 5}},
      {{'X', 0, 1}, {'Z', 0, 2}, {'X', 1, 4}, {'Z', 1, 5}, {'X', 2, 6}, {'Z', 2, 3}},
      {{'X', 0, 0}, {'Z', 0, 3}, {'X', 1, 2}, {'Z', 1, 1}, {'X', 2, 5}},
      {{'U', 0, -1}, {'U', 1, -1}, {'X', 2, 3}, {'Z', 2, 2}},
      {{'X', 2, 2}},
      {{'U', 2, -1}},
  };
  cb.begin_layer();
  for (int p = 0; p < 3; p++) {
    cb.reset(b.synd[p], MeasureBasis::X);  // aX
    cb.reset(b.flag[p], MeasureBasis::Z);  // aZ
  }
  cb.end_layer();
  for (const auto& layer : kLayers) {
    cb.begin_layer();
    for (const Gate& g : layer) {
      switch (g.kind) {
        case 'B':
        case 'U':
          cb.gate(GateKind::CX, b.synd[g.p], b.flag[g.p]);
          break;
        case 'X':
          cb.gate(GateKind::CX, b.synd[g.p], b.data[g.q]);
          break;
        case 'Z':
          cb.gate(GateKind::CX, b.data[g.q], b.flag[g.p]);
          break;
      }
    }
    cb.end_layer();
  }
  cb.begin_layer();
  for (int p = 0; p < 3; p++) {
    StabBits sb;
    sb.synd = cb.measure(b.synd[p], MeasureBasis::X, tag + "x" + std::to_string(p + 1),
                         random_mask >> p & 1);
    sb.flag = cb.measure(b.flag[p], MeasureBasis::Z, tag + "z" + std::to_string(p + 1),
                         random_mask >> p & 1);
    if (bits) bits->push_back(sb);
  }
  cb.end_layer();
}

// Verified |0> encoding (searched schedule): |+> pivots 3,5,6 fan out a
// generating set of the X stabilizers. The first two targets of every pivot
// overlap the logical-Z support an odd number of times, so every dangerous
// bit-flip spread trips the verification parity.
void emit_goto_encoding(CircuitBuilder& cb, const Block& b) {
  cb.begin_layer();
  for (int q : {3, 5, 6}) cb.reset(b.q(q), MeasureBasis::X);
  for (int q : {0, 1, 2, 4}) cb.reset(b.q(q), MeasureBasis::Z);
  cb.end_layer();
  const int sched[5][4] = {
      {3, 0, 5, 1}, {3, 2, 6, 0}, {3, 1, 5, 2}, {5, 4, 6, 2}, {6, 4, -1, -1}};
  for (auto& layer : sched) {
    cb.begin_layer();
    cb.gate(GateKind::CX, b.q(layer[0]), b.q(layer[1]));
    if (layer[2] >= 0) cb.gate(GateKind::CX, b.q(layer[2]), b.q(layer[3]));
    cb.end_layer();
  }
}

std::string emit_verification(CircuitBuilder& cb, const Block& b, int anc,
                              const std::string& tag) {
  cb.begin_layer();
  cb.reset(anc, MeasureBasis::Z);
  cb.end_layer();
  for (int q : {0, 1, 4}) {
    cb.begin_layer();
    cb.gate(GateKind::CX, b.q(q), anc);
    cb.end_layer();
  }
  cb.begin_layer();
  auto bit = cb.measure(anc, MeasureBasis::Z, tag, false);
  cb.end_layer();
  return bit;
}

// Transversal layers reaching the other cardinal states from |0>; the minus
// partners differ only by a logical Pauli frame update, absorbed by the
// all-zero reference.
void emit_state_rotation(CircuitBuilder& cb, const Block& b, CardinalState s) {
  if (s != CardinalState::Zero && s != CardinalState::One) {
    cb.begin_layer();
    for (int q : b.data) cb.gate(GateKind::H, q);
    cb.end_layer();
  }
  if (s == CardinalState::PlusI || s == CardinalState::MinusI) {
    cb.begin_layer();
    for (int q : b.data) cb.gate(GateKind::S, q);
    cb.end_layer();
  }
}

// Rotation taking the state's basis back to Z before the final readout.
void emit_readout_rotation(CircuitBuilder& cb, const Block& b, CardinalState s) {
  if (s == CardinalState::PlusI || s == CardinalState::MinusI) {
    cb.begin_layer();
    for (int q : b.data) cb.gate(GateKind::S_DAG, q);
    cb.end_layer();
  }
  if (s != CardinalState::Zero && s != CardinalState::One) {
    cb.begin_layer();
    for (int q : b.data) cb.gate(GateKind::H, q);
    cb.end_layer();
  }
}

// Final transversal Z readout with plaquette-parity detectors.
void emit_transversal_readout(CircuitBuilder& cb, const ColorCode& code, const Block& b,
                              const std::string& tag, std::vector<std::string>* bits_out) {
  std::vector<std::string> bits;
  cb.begin_layer();
  for (int i = 0; i < 7; i++)
    bits.push_back(cb.measure(b.data[i], MeasureBasis::Z, tag + "m" + std::to_string(i), true));
  cb.end_layer();
  for (size_t p = 0; p < code.plaquettes.size(); p++) {
    std::vector<std::string> ds;
    for (int i = 0; i < 7; i++)
      if (code.plaquettes[p].support >> i & 1) ds.push_back(bits[i]);
    cb.detector(tag + "plaq" + std::to_string(p + 1), ds);
  }
  if (bits_out) *bits_out = bits;
}

std::shared_ptr<LookupCorrInfo> make_lookup(const Block& b, char letter,
                                            std::vector<std::string> synd,
                                            std::vector<std::string> flags,
                                            std::shared_ptr<const LookupTable> table = nullptr) {
  auto info = std::make_shared<LookupCorrInfo>();
  info->table = table ? table : std::make_shared<LookupTable>(reference_flag_table());
  info->syndrome_bits = std::move(synd);
  info->flag_bits = std::move(flags);
  info->targets = b.data;
  info->letter = letter;
  return info;
}

Predicate logical_output(const std::vector<std::string>& bits) {
  return Predicate::parity({bits[0], bits[1], bits[4]}, 1);
}

// The record-level correction parity hitting the logical-Z support: ORs the
// (syndrome, context) cells of the table whose entry overlaps {0,1,4} an odd
// number of times. Used to decode the transversal source readout.
Predicate lookup_parity_predicate(const LookupTable& table,
                                  const std::vector<Predicate>& synd_exprs) {
  std::vector<Predicate> terms;
  for (int s = 1; s < 8; s++) {
    uint8_t e = table.entry[s][0];
    int par = ((e >> 0 & 1) + (e >> 1 & 1) + (e >> 4 & 1)) & 1;
    if (!par) continue;
    std::vector<Predicate> conj;
    for (int i = 0; i < 3; i++) {
      Predicate bit = synd_exprs[i];
      if (!(s >> (2 - i) & 1)) bit = Predicate::negate(bit);
      conj.push_back(bit);
    }
    terms.push_back(Predicate::all_of(std::move(conj)));
  }
  if (terms.empty()) return Predicate::parity({}, 1);  // never true
  return Predicate::xor_of(std::move(terms));
}

// Replaces every non-discard leaf of `tree` with an edge into a fresh copy
// of `sub`.
void graft(ProtocolTree& tree, const ProtocolTree& sub) {
  size_t n_before = tree.nodes.size();
  for (size_t i = 0; i < n_before; i++) {
    if (!tree.nodes[i].edges.empty()) continue;
    if (tree.nodes[i].terminal && tree.nodes[i].terminal->discard) continue;
    int base = (int)tree.nodes.size();
    for (const auto& snode : sub.nodes) {
      TreeNode copy = snode;
      for (auto& e : copy.edges) e.next += base;
      tree.nodes.push_back(std::move(copy));
    }
    tree.nodes[i].terminal.reset();
    tree.nodes[i].edges.push_back({Predicate::always(), base});
  }
}

Block single_block_layout(ProtocolKind kind) {
  Block b;
  b.data = {0, 1, 2, 3, 4, 5, 6};
  if (kind == ProtocolKind::Sequential) {
    b.synd = {7};
    b.flag = {8};
  } else {
    b.synd = {7, 8, 9};
    b.flag = {10, 11, 12};
  }
  return b;
}

Bits data_alive(const Block& b) {
  Bits m = 0;
  for (int q : b.data) m |= Bits{1} << q;
  return m;
}

Bits anc_mask(const Block& b) {
  Bits m = 0;
  for (int q : b.synd) m |= Bits{1} << q;
  for (int q : b.flag) m |= Bits{1} << q;
  return m;
}

// ---------------------------------------------------------------------------
// Superdense two-round lookup table, auto-built from a correction-free probe
// tree: syndrome from the second round, context from the round-1 bits of the
// conjugate ancilla.

ProtocolTree superdense_probe_tree() {
  ColorCode code = build_hex_color_code(3);
  Block b = single_block_layout(ProtocolKind::Simultaneous);
  ProtocolTree tree;
  tree.n_qubits = 13;
  CircuitBuilder c1(13, "p1");
  c1.set_alive(data_alive(b));
  std::vector<StabBits> r1;
  emit_superdense_block(c1, code, b, "", &r1);
  CircuitBuilder c2(13, "p2");
  c2.set_alive(data_alive(b));
  std::vector<StabBits> r2;
  emit_superdense_block(c2, code, b, "", &r2);
  std::vector<std::string> trig;
  for (auto& sb : r1) {
    trig.push_back(sb.synd);
    trig.push_back(sb.flag);
  }
  TreeNode n1;
  n1.name = "sd1";
  n1.circuit = c1.take();
  n1.circuit.n_qubits = 13;
  n1.edges.push_back({any_set(trig), 2});
  n1.edges.push_back({Predicate::negate(any_set(trig)), 1});
  TreeNode clean;
  clean.name = "clean";
  clean.circuit.n_qubits = 13;
  clean.terminal = Terminal{"clean", nullptr, {}};
  TreeNode n2;
  n2.name = "sd2";
  n2.circuit = c2.take();
  n2.circuit.n_qubits = 13;
  n2.terminal = Terminal{"done", nullptr, {}};
  tree.nodes.push_back(std::move(n1));
  tree.nodes.push_back(std::move(clean));
  tree.nodes.push_back(std::move(n2));
  return tree;
}

std::shared_ptr<const LookupTable> superdense_table() {
  static std::shared_ptr<const LookupTable> cached = [] {
    ColorCode code = build_hex_color_code(3);
    ProtocolTree noisy = scem_attach(superdense_probe_tree(), ScemParams{0.01});
    LookupBuildSpec spec;
    spec.syndrome_bits = {"p2.x1", "p2.x2", "p2.x3"};  // S^X values: Z-error syndrome
    spec.fallback_syndrome_bits = {"p1.x1", "p1.x2", "p1.x3"};
    spec.flag_bits = {"p1.x1", "p1.x2", "p1.x3"};
    spec.data_qubits = {0, 1, 2, 3, 4, 5, 6};
    spec.letter = 'Z';
    LookupTable table = build_lookup(noisy, spec, code);
    return std::make_shared<const LookupTable>(table);
  }();
  return cached;
}

// ---------------------------------------------------------------------------
// Adaptive QEC round trees.

struct RoundSpec {
  ProtocolKind kind;
  std::vector<Block> blocks;
  Bits alive = 0;
  std::string prefix;
};

ProtocolTree gen_protocol_impl(const RoundSpec& spec, const ColorCode& code) {
  ProtocolTree tree;
  tree.meta.kind = std::string("round_") + to_string(spec.kind);
  size_t nb = spec.blocks.size();

  auto unflagged_terminal = [&](const std::string& prefix,
                                const std::vector<std::vector<std::string>>& x_ctx,
                                const std::vector<std::vector<std::string>>& z_ctx) {
    CircuitBuilder cu(64, prefix);
    cu.set_alive(spec.alive);
    std::vector<std::vector<std::string>> ux(nb), uz(nb);
    bool single_anc = spec.blocks[0].synd.size() == 1;
    for (auto basis : {MeasureBasis::X, MeasureBasis::Z}) {
      for (size_t i = 0; i < nb; i++) {
        auto& out = basis == MeasureBasis::X ? ux[i] : uz[i];
        std::string tag = "b" + std::to_string(i) + (basis == MeasureBasis::X ? "x" : "z");
        if (single_anc) {
          for (int p = 0; p < 3; p++) {
            auto qs = plaq_qubits(code, p, spec.blocks[i]);
            auto sb = emit_single_stab(cu, qs, basis, spec.blocks[i].synd[0], -1,
                                       tag + std::to_string(p + 1));
            out.push_back(sb.synd);
          }
        } else {
          emit_bare_block(cu, code, spec.blocks[i], basis, tag, &out);
        }
      }
    }
    for (size_t i = 0; i < nb; i++) {
      cu.lookup_corr(make_lookup(spec.blocks[i], 'Z', ux[i], z_ctx[i]));
      cu.lookup_corr(make_lookup(spec.blocks[i], 'X', uz[i], x_ctx[i]));
    }
    TreeNode node;
    node.name = prefix;
    node.circuit = cu.take();
    node.terminal = Terminal{prefix + ".end", nullptr, {}};
    return node;
  };

  if (spec.kind == ProtocolKind::Simultaneous) {
    CircuitBuilder cx_b(64, spec.prefix + "sxf");
    cx_b.set_alive(spec.alive);
    std::vector<std::vector<StabBits>> rx(nb);
    for (size_t i = 0; i < nb; i++)
      emit_flagged_block(cx_b, code, spec.blocks[i], MeasureBasis::X, "b" + std::to_string(i),
                         &rx[i]);
    CircuitBuilder cz_b(64, spec.prefix + "szf");
    cz_b.set_alive(spec.alive);
    std::vector<std::vector<StabBits>> rz(nb);
    for (size_t i = 0; i < nb; i++)
      emit_flagged_block(cz_b, code, spec.blocks[i], MeasureBasis::Z, "b" + std::to_string(i),
                         &rz[i]);

    std::vector<std::string> trig_x, trig_z;
    for (auto& v : rx)
      for (auto& sb : v) {
        trig_x.push_back(sb.synd);
        trig_x.push_back(sb.flag);
      }
    for (auto& v : rz)
      for (auto& sb : v) {
        trig_z.push_back(sb.synd);
        trig_z.push_back(sb.flag);
      }

    TreeNode nx;
    nx.name = spec.prefix + "sxf";
    nx.circuit = cx_b.take();
    TreeNode nz;
    nz.name = spec.prefix + "szf";
    nz.circuit = cz_b.take();

    // X-round hooks are witnessed by the X-round flags and corrected via the
    // Z-type syndrome of the un-flagged round; conversely for the Z round.
    std::vector<std::vector<std::string>> x_ctx1(nb), z_ctx1(nb), x_ctx2(nb), z_ctx2(nb);
    for (size_t i = 0; i < nb; i++) x_ctx1[i] = flags_of(rx[i]);
    for (size_t i = 0; i < nb; i++) z_ctx2[i] = flags_of(rz[i]);
    TreeNode u1 = unflagged_terminal(spec.prefix + "u1", x_ctx1, z_ctx1);
    TreeNode u2 = unflagged_terminal(spec.prefix + "u2", x_ctx2, z_ctx2);

    TreeNode clean;
    clean.name = spec.prefix + "clean";
    clean.terminal = Terminal{spec.prefix + "clean.end", nullptr, {}};

    nx.edges.push_back({any_set(trig_x), 3});
    nx.edges.push_back({Predicate::negate(any_set(trig_x)), 1});
    nz.edges.push_back({any_set(trig_z), 4});
    nz.edges.push_back({Predicate::negate(any_set(trig_z)), 2});

    tree.nodes.push_back(std::move(nx));
    tree.nodes.push_back(std::move(nz));
    tree.nodes.push_back(std::move(clean));
    tree.nodes.push_back(std::move(u1));
    tree.nodes.push_back(std::move(u2));
    return tree;
  }

  if (spec.kind == ProtocolKind::Superdense) {
    CircuitBuilder c1(64, spec.prefix + "sd1");
    c1.set_alive(spec.alive);
    std::vector<std::vector<StabBits>> r1(nb);
    for (size_t i = 0; i < nb; i++)
      emit_superdense_block(c1, code, spec.blocks[i], "b" + std::to_string(i), &r1[i]);
    CircuitBuilder c2(64, spec.prefix + "sd2");
    c2.set_alive(spec.alive);
    std::vector<std::vector<StabBits>> r2(nb);
    for (size_t i = 0; i < nb; i++)
      emit_superdense_block(c2, code, spec.blocks[i], "b" + std::to_string(i), &r2[i]);
    for (size_t i = 0; i < nb; i++) {
      std::vector<std::string> r2x = synds_of(r2[i]), r2z = flags_of(r2[i]);
      std::vector<std::string> r1x = synds_of(r1[i]), r1z = flags_of(r1[i]);
      c2.lookup_corr(make_lookup(spec.blocks[i], 'Z', r2x, r1x, superdense_table()));
      c2.lookup_corr(make_lookup(spec.blocks[i], 'X', r2z, r1z, superdense_table()));
    }
    std::vector<std::string> trig;
    for (auto& v : r1)
      for (auto& sb : v) {
        trig.push_back(sb.synd);
        trig.push_back(sb.flag);
      }
    TreeNode n1;
    n1.name = spec.prefix + "sd1";
    n1.circuit = c1.take();
    n1.edges.push_back({any_set(trig), 2});
    n1.edges.push_back({Predicate::negate(any_set(trig)), 1});
    TreeNode clean;
    clean.name = spec.prefix + "clean";
    clean.terminal = Terminal{spec.prefix + "clean.end", nullptr, {}};
    TreeNode n2;
    n2.name = spec.prefix + "sd2";
    n2.circuit = c2.take();
    n2.terminal = Terminal{spec.prefix + "sd2.end", nullptr, {}};
    tree.nodes.push_back(std::move(n1));
    tree.nodes.push_back(std::move(clean));
    tree.nodes.push_back(std::move(n2));
    return tree;
  }

  // Sequential: six per-stabilizer nodes with a reused syndrome/flag pair;
  // any trigger interrupts into an un-flagged full round whose contexts only
  // reference the flags measured so far.
  struct Step {
    MeasureBasis basis;
    int plaq;
  };
  std::vector<Step> steps = {{MeasureBasis::X, 0}, {MeasureBasis::X, 1}, {MeasureBasis::X, 2},
                             {MeasureBasis::Z, 0}, {MeasureBasis::Z, 1}, {MeasureBasis::Z, 2}};
  std::vector<TreeNode> step_nodes, trigger_nodes;
  std::vector<std::vector<std::string>> x_flags(nb), z_flags(nb);
  for (size_t si = 0; si < steps.size(); si++) {
    CircuitBuilder cb(64, spec.prefix + "q" + std::to_string(si));
    cb.set_alive(spec.alive);
    std::vector<std::string> trig_bits;
    for (size_t i = 0; i < nb; i++) {
      const Block& blk = spec.blocks[i];
      auto qs = plaq_qubits(code, steps[si].plaq, blk);
      auto sb = emit_single_stab(cb, qs, steps[si].basis, blk.synd[0], blk.flag[0],
                                 "b" + std::to_string(i));
      trig_bits.push_back(sb.synd);
      trig_bits.push_back(sb.flag);
      if (steps[si].basis == MeasureBasis::X)
        x_flags[i].push_back(sb.flag);
      else
        z_flags[i].push_back(sb.flag);
    }
    TreeNode node;
    node.name = spec.prefix + "q" + std::to_string(si);
    node.circuit = cb.take();
    int trigger_target = 7 + (int)si;
    int next = si + 1 < steps.size() ? (int)si + 1 : 6;
    node.edges.push_back({any_set(trig_bits), trigger_target});
    node.edges.push_back({Predicate::negate(any_set(trig_bits)), next});
    step_nodes.push_back(std::move(node));
    trigger_nodes.push_back(
        unflagged_terminal(spec.prefix + "u" + std::to_string(si), x_flags, z_flags));
  }
  TreeNode clean;
  clean.name = spec.prefix + "clean";
  clean.terminal = Terminal{spec.prefix + "clean.end", nullptr, {}};
  for (auto& n : step_nodes) tree.nodes.push_back(std::move(n));
  tree.nodes.push_back(std::move(clean));
  for (auto& n : trigger_nodes) tree.nodes.push_back(std::move(n));
  return tree;
}

// ---------------------------------------------------------------------------
// Preparation sub-trees with pass-through terminals (readout optional).

ProtocolTree verified_prep_subtree(CardinalState state, int n, const Block& b, int anc,
                                   const std::string& prefix) {
  ProtocolTree tree;
  tree.n_qubits = n;
  CircuitBuilder cb(n, prefix);
  cb.set_alive(data_alive(b));
  emit_goto_encoding(cb, b);
  cb.set_alive(data_alive(b) | (Bits{1} << anc));
  auto ver = emit_verification(cb, b, anc, "ver");
  cb.set_alive(data_alive(b));
  emit_state_rotation(cb, b, state);
  TreeNode root;
  root.name = prefix;
  root.circuit = cb.take();
  root.edges.push_back({Predicate::parity({ver}, 1), 1});
  root.edges.push_back({Predicate::parity({ver}, 0), 2});
  TreeNode discard;
  discard.name = prefix + ".discarded";
  discard.terminal =
      Terminal{"discard", std::make_shared<Predicate>(Predicate::parity({ver}, 1)), {}};
  TreeNode go;
  go.name = prefix + ".go";
  go.terminal = Terminal{prefix + ".go", nullptr, {}};
  tree.nodes.push_back(std::move(root));
  tree.nodes.push_back(std::move(discard));
  tree.nodes.push_back(std::move(go));
  for (auto& nd : tree.nodes) nd.circuit.n_qubits = n;
  return tree;
}

ProtocolTree stabilizer_prep_subtree(CardinalState state, int n, const Block& b,
                                     const std::string& prefix) {
  ColorCode code = build_hex_color_code(3);
  ProtocolTree tree;
  tree.n_qubits = n;
  Bits alive = data_alive(b);

  CircuitBuilder c1(n, prefix + "1");
  c1.set_alive(alive);
  c1.begin_layer();
  for (int q : b.data) c1.reset(q, MeasureBasis::Z);
  c1.end_layer();
  std::vector<StabBits> r1;
  emit_flagged_block(c1, code, b, MeasureBasis::X, "", &r1, 0b111);

  CircuitBuilder c2(n, prefix + "2");
  c2.set_alive(alive);
  std::vector<StabBits> r2;
  emit_flagged_block(c2, code, b, MeasureBasis::X, "", &r2, 0b111);
  for (int p = 0; p < 3; p++)
    c2.detector("agree" + std::to_string(p + 1), {r1[p].synd, r2[p].synd});

  auto unflagged = [&](const std::string& pfx, const std::vector<std::string>& ctx_flags) {
    CircuitBuilder cu(n, pfx);
    cu.set_alive(alive);
    std::vector<std::string> ux, uz;
    emit_bare_block(cu, code, b, MeasureBasis::X, "x", &ux, 0b111);
    emit_bare_block(cu, code, b, MeasureBasis::Z, "z", &uz);
    cu.lookup_corr(make_lookup(b, 'Z', ux, {}));
    cu.lookup_corr(make_lookup(b, 'X', uz, ctx_flags));
    emit_state_rotation(cu, b, state);
    TreeNode node;
    node.name = pfx;
    node.circuit = cu.take();
    node.terminal = Terminal{pfx + ".end", nullptr, {}};
    return node;
  };

  TreeNode n0;
  n0.name = prefix + "1";
  n0.circuit = c1.take();
  TreeNode n1;
  n1.name = prefix + "2";
  n1.circuit = c2.take();

  CircuitBuilder c3(n, prefix + "a");
  c3.set_alive(alive);
  c3.lookup_corr(make_lookup(b, 'Z', synds_of(r2), {}));
  emit_state_rotation(c3, b, state);
  TreeNode n2;
  n2.name = prefix + "a";
  n2.circuit = c3.take();
  n2.terminal = Terminal{prefix + "a.end", nullptr, {}};

  TreeNode u1 = unflagged(prefix + "u1", flags_of(r1));
  TreeNode u2 = unflagged(prefix + "u2", flags_of(r2));

  n0.edges.push_back({any_set(flags_of(r1)), 3});
  n0.edges.push_back({Predicate::negate(any_set(flags_of(r1))), 1});
  std::vector<Predicate> trig2 = {any_set(flags_of(r2))};
  for (int p = 0; p < 3; p++) trig2.push_back(Predicate::parity({r1[p].synd, r2[p].synd}, 1));
  Predicate trigger2 = Predicate::any_of(trig2);
  n1.edges.push_back({trigger2, 4});
  n1.edges.push_back({Predicate::negate(trigger2), 2});

  tree.nodes.push_back(std::move(n0));
  tree.nodes.push_back(std::move(n1));
  tree.nodes.push_back(std::move(n2));
  tree.nodes.push_back(std::move(u1));
  tree.nodes.push_back(std::move(u2));
  for (auto& nd : tree.nodes) nd.circuit.n_qubits = n;
  return tree;
}

// Bare terminal: the frame is left in the prepared basis for the
// harness-side decode against the state observable.
ProtocolTree terminal_subtree(int n, const std::string& prefix) {
  ProtocolTree fin;
  fin.n_qubits = n;
  TreeNode last;
  last.name = prefix;
  last.circuit.n_qubits = n;
  last.terminal = Terminal{prefix + ".end", nullptr, {}};
  fin.nodes.push_back(std::move(last));
  return fin;
}

}  // namespace

Circuit gen_se_circuit(SeKind kind, const ColorCode& code, MeasureBasis basis) {
  int n = code.n;
  int P = (int)code.plaquettes.size();
  Block b;
  for (int i = 0; i < n; i++) b.data.push_back(i);
  for (int p = 0; p < P; p++) b.synd.push_back(n + p);
  for (int p = 0; p < P; p++) b.flag.push_back(n + P + p);
  int total = n + 2 * P;
  CircuitBuilder cb(total);
  Bits alive = 0;
  for (int q = 0; q < n; q++) alive |= Bits{1} << q;
  cb.set_alive(alive);

  if (kind == SeKind::Superdense) {
    if (code.d != 3) throw std::invalid_argument("superdense emitter is specialized to d=3");
    emit_superdense_block(cb, code, b, "", nullptr);
  } else {
    for (int p = 0; p < P; p++) {
      auto qs = plaq_qubits(code, p, b);
      emit_single_stab(cb, qs, basis, b.synd[p], kind == SeKind::Flagged ? b.flag[p] : -1,
                       "p" + std::to_string(p + 1));
    }
  }
  Circuit c = cb.take();
  c.n_qubits = total;
  return c;
}

ProtocolTree gen_prep_verified(CardinalState state) {
  Block b;
  b.data = {0, 1, 2, 3, 4, 5, 6};
  ProtocolTree tree = verified_prep_subtree(state, 8, b, 7, "pv");
  graft(tree, terminal_subtree(8, "fin"));
  tree.meta.kind = "prep_verified";
  tree.meta.state = state;
  tree.meta.dest_data = b.data;
  tree.meta.post_selected = true;
  tree.meta.ft_tagged = state != CardinalState::PlusI && state != CardinalState::MinusI;
  tree.meta.data_qubits = b.data;
  tree.meta.flag_qubits = {7};
  return tree;
}

ProtocolTree gen_prep_stabilizer(CardinalState state) {
  Block b = single_block_layout(ProtocolKind::Simultaneous);
  ProtocolTree tree = stabilizer_prep_subtree(state, 13, b, "ps");
  graft(tree, terminal_subtree(13, "fin"));
  tree.meta.kind = "prep_stabilizer";
  tree.meta.state = state;
  tree.meta.dest_data = b.data;
  tree.meta.ft_tagged = true;
  tree.meta.data_qubits = b.data;
  tree.meta.syndrome_qubits = b.synd;
  tree.meta.flag_qubits = b.flag;
  return tree;
}

ProtocolTree gen_protocol(ProtocolKind kind, const ColorCode& code) {
  RoundSpec spec;
  spec.kind = kind;
  spec.blocks = {single_block_layout(kind)};
  spec.alive = data_alive(spec.blocks[0]) | anc_mask(spec.blocks[0]);
  spec.prefix = "r.";
  ProtocolTree tree = gen_protocol_impl(spec, code);
  tree.n_qubits = kind == ProtocolKind::Sequential ? 9 : 13;
  for (auto& n : tree.nodes) n.circuit.n_qubits = tree.n_qubits;
  tree.meta.dest_data = spec.blocks[0].data;
  tree.meta.data_qubits = spec.blocks[0].data;
  tree.meta.syndrome_qubits = spec.blocks[0].synd;
  tree.meta.flag_qubits = spec.blocks[0].flag;
  return tree;
}

ProtocolTree gen_memory(ProtocolKind kind, CardinalState state, int rounds) {
  ColorCode code = build_hex_color_code(3);
  Block b = single_block_layout(kind);
  bool stab_prep = state == CardinalState::PlusI || state == CardinalState::MinusI;
  int n = kind == ProtocolKind::Sequential ? 9 : 13;
  if (stab_prep && kind == ProtocolKind::Sequential) n = 13;

  ProtocolTree tree;
  if (stab_prep) {
    Block pb = single_block_layout(ProtocolKind::Simultaneous);
    tree = stabilizer_prep_subtree(state, n, pb, "ps");
  } else {
    tree = verified_prep_subtree(state, n, b, b.synd[0], "pv");
    tree.meta.post_selected = true;
  }

  RoundSpec rs;
  rs.kind = kind;
  rs.blocks = {b};
  rs.alive = data_alive(b) | anc_mask(b);
  for (int r = 0; r < rounds; r++) {
    rs.prefix = "r" + std::to_string(r) + ".";
    graft(tree, gen_protocol_impl(rs, code));
  }
  graft(tree, terminal_subtree(n, "fin"));

  tree.n_qubits = n;
  for (auto& node : tree.nodes) node.circuit.n_qubits = n;
  tree.meta.kind = std::string("memory_") + to_string(kind);
  tree.meta.state = state;
  tree.meta.dest_data = b.data;
  tree.meta.ft_tagged = true;
  tree.meta.data_qubits = b.data;
  tree.meta.syndrome_qubits = b.synd;
  tree.meta.flag_qubits = b.flag;
  return tree;
}

// ---------------------------------------------------------------------------
// Lattice-surgery teleportation.

namespace {

struct SurgeryLayout {
  Block b1, b2;
  int w4_anc, w2_anc;
  int n = 28;
  Bits alive_data;
};

SurgeryLayout teleport_layout() {
  SurgeryLayout L;
  L.b1.data = {0, 1, 2, 3, 4, 5, 6};
  L.b1.synd = {14, 15, 16};
  L.b1.flag = {17, 18, 19};
  L.b2.data = {7, 8, 9, 10, 11, 12, 13};
  L.b2.synd = {20, 21, 22};
  L.b2.flag = {23, 24, 25};
  L.w4_anc = 26;
  L.w2_anc = 27;
  L.alive_data = 0x3fff;
  return L;
}

// Bare joint measurement of the boundary weight-4 X operator, alternating
// between the blocks so ancilla faults never spread two errors into one
// block, or of the weight-2 operator.
std::string emit_w4(CircuitBuilder& cb, const SurgeryLayout& L, const std::string& tag) {
  int a = L.w4_anc;
  cb.begin_layer();
  cb.reset(a, MeasureBasis::X);
  cb.end_layer();
  for (int q : {L.b1.q(4), L.b2.q(4), L.b1.q(5), L.b2.q(5)}) {
    cb.begin_layer();
    cb.gate(GateKind::CX, a, q);
    cb.end_layer();
  }
  cb.begin_layer();
  auto bit = cb.measure(a, MeasureBasis::X, tag, true);
  cb.end_layer();
  return bit;
}

std::string emit_w2(CircuitBuilder& cb, const SurgeryLayout& L, const std::string& tag) {
  int a = L.w2_anc;
  cb.begin_layer();
  cb.reset(a, MeasureBasis::X);
  cb.end_layer();
  for (int q : {L.b1.q(6), L.b2.q(6)}) {
    cb.begin_layer();
    cb.gate(GateKind::CX, a, q);
    cb.end_layer();
  }
  cb.begin_layer();
  auto bit = cb.measure(a, MeasureBasis::X, tag, true);
  cb.end_layer();
  return bit;
}

// Syndrome-pattern predicates over one block's three syndrome bit names:
// "compatible with an error on qubit 4 or 5" = {010, 011}, "on qubit 6" =
// {001}.
Predicate synd_equals(const std::vector<std::string>& bits, int pattern) {
  std::vector<Predicate> conj;
  for (int i = 0; i < 3; i++)
    conj.push_back(Predicate::parity({bits[i]}, pattern >> (2 - i) & 1));
  return Predicate::all_of(std::move(conj));
}

Predicate compat45(const std::vector<std::string>& s1, const std::vector<std::string>& s2) {
  return Predicate::any_of(
      {synd_equals(s1, 0b010), synd_equals(s1, 0b011), synd_equals(s2, 0b010),
       synd_equals(s2, 0b011)});
}

Predicate compat6(const std::vector<std::string>& s1, const std::vector<std::string>& s2) {
  return Predicate::any_of({synd_equals(s1, 0b001), synd_equals(s2, 0b001)});
}

Predicate compat_any_boundary(const std::vector<std::string>& s1,
                              const std::vector<std::string>& s2) {
  return Predicate::any_of({compat45(s1, s2), compat6(s1, s2)});
}

// Split-step bookkeeping shared by every path into the split: the final S^Z
// round's bits of both blocks, the joint-value expression, the flag contexts
// pending for the harness decode.
struct SplitInputs {
  std::vector<std::string> sz1, sz2;  // per-block S^Z syndrome bits (3 each)
  Predicate joint;                    // X_L1 X_L2 value (flip parity)
  std::vector<std::string> xctx1, xctx2;  // merge S^X flags, if any
  std::vector<std::string> zctx1, zctx2;  // split flagged S^Z flags, if any
};

// Emits the tail of the protocol into `cb` and returns the终 terminal: the
// weight-8 bookkeeping corrections, the transversal source readout with its
// record decode, the conditional teleportation frame updates, and the
// destination readout.
Terminal emit_split_tail(CircuitBuilder& cb, const ColorCode& code, const SurgeryLayout& L,
                         CardinalState state, const SplitInputs& in) {
  // During the merge the two bottom plaquettes are replaced by their merged
  // product; after splitting, their individual values are random with a
  // deterministic product. A double -1 reading is returned to the standard
  // gauge by X on both boundary corners, flipping neither the product nor
  // the logical state.
  Bits x66 = (Bits{1} << L.b1.q(6)) | (Bits{1} << L.b2.q(6));
  Predicate both_p3 =
      Predicate::all_of({Predicate::parity({in.sz1[2]}, 1), Predicate::parity({in.sz2[2]}, 1)});
  cb.cond_pauli(both_p3, x66, 0);

  auto p3_expr = [&](const std::string& own) {
    return Predicate::xor_of({Predicate::parity({own}, 1), both_p3});
  };

  auto block_corr = [&](const Block& blk, const std::vector<std::string>& sz,
                        const std::vector<std::string>& xctx) {
    auto info = make_lookup(blk, 'X', sz, xctx);
    info->syndrome_exprs = {Predicate::parity({sz[0]}, 1), Predicate::parity({sz[1]}, 1),
                            p3_expr(sz[2])};
    cb.lookup_corr(info);
  };
  block_corr(L.b1, in.sz1, in.xctx1);
  block_corr(L.b2, in.sz2, in.xctx2);

  // Transversal Z readout of the source block; the record is decoded before
  // extracting the logical-Z outcome b.
  std::vector<std::string> src_bits;
  emit_transversal_readout(cb, code, L.b1, "src", &src_bits);
  std::vector<Predicate> plaq_parities;
  for (int p = 0; p < 3; p++) {
    std::vector<std::string> ds;
    for (int i = 0; i < 7; i++)
      if (code.plaquettes[p].support >> i & 1) ds.push_back(src_bits[i]);
    plaq_parities.push_back(Predicate::parity(ds, 1));
  }
  Predicate b_corr = lookup_parity_predicate(reference_flag_table(), plaq_parities);
  Predicate b_expr = Predicate::xor_of(
      {Predicate::parity({src_bits[0], src_bits[1], src_bits[4]}, 1), b_corr});

  // Conditional teleportation corrections on the destination.
  Bits xl2 = 0, zl2 = 0;
  for (int i : {0, 1, 4}) {
    xl2 |= Bits{1} << L.b2.q(i);
    zl2 |= Bits{1} << L.b2.q(i);
  }
  cb.cond_pauli(b_expr, xl2, 0);
  cb.cond_pauli(in.joint, 0, zl2);

  (void)state;
  Terminal t;
  t.name = "teleported";
  t.outputs.push_back({"a", in.joint, true});
  t.outputs.push_back({"b", b_expr, true});
  for (size_t i = 0; i < in.zctx1.size(); i++)
    t.outputs.push_back({"zctx1_" + std::to_string(i + 1),
                         Predicate::parity({in.zctx1[i]}, 1), false});
  for (size_t i = 0; i < in.zctx2.size(); i++)
    t.outputs.push_back({"zctx2_" + std::to_string(i + 1),
                         Predicate::parity({in.zctx2[i]}, 1), false});
  return t;
}

}  // namespace

ProtocolTree gen_teleport_ls(CardinalState input, ProtocolKind se) {
  if (se != ProtocolKind::Simultaneous)
    throw std::invalid_argument("lattice-surgery teleportation uses the simultaneous scheme");
  ColorCode code = build_hex_color_code(3);
  SurgeryLayout L = teleport_layout();
  bool stab_src = input == CardinalState::PlusI || input == CardinalState::MinusI;

  // Source preparation (its own subtree for the +-i states), then the
  // destination |0> preparation.
  ProtocolTree tree;
  if (stab_src) {
    tree = stabilizer_prep_subtree(input, L.n, L.b1, "sps");
    ProtocolTree dst = verified_prep_subtree(CardinalState::Zero, L.n, L.b2, L.b2.synd[0], "pvd");
    graft(tree, dst);
  } else {
    // Both verified preparations run in parallel inside one node.
    ProtocolTree both;
    both.n_qubits = L.n;
    CircuitBuilder cb(L.n, "pv");
    cb.set_alive(L.alive_data);
    // Interleave the two encodings layer by layer by emitting them on the
    // combined alive set; the builders lay out gates per block.
    emit_goto_encoding(cb, L.b1);
    emit_goto_encoding(cb, L.b2);
    cb.set_alive(L.alive_data | (Bits{1} << L.b1.synd[0]) | (Bits{1} << L.b2.synd[0]));
    auto ver1 = emit_verification(cb, L.b1, L.b1.synd[0], "ver1");
    auto ver2 = emit_verification(cb, L.b2, L.b2.synd[0], "ver2");
    cb.set_alive(L.alive_data);
    emit_state_rotation(cb, L.b1, input);
    TreeNode root;
    root.name = "prep";
    root.circuit = cb.take();
    Predicate bad = Predicate::any_of({Predicate::parity({ver1}, 1), Predicate::parity({ver2}, 1)});
    root.edges.push_back({bad, 1});
    root.edges.push_back({Predicate::negate(bad), 2});
    TreeNode discard;
    discard.name = "discarded";
    discard.terminal = Terminal{"discard", std::make_shared<Predicate>(bad), {}};
    TreeNode go;
    go.name = "go";
    go.terminal = Terminal{"go", nullptr, {}};
    both.nodes.push_back(std::move(root));
    both.nodes.push_back(std::move(discard));
    both.nodes.push_back(std::move(go));
    tree = std::move(both);
  }

  // Merge-and-split subtree.
  ProtocolTree ms;
  ms.n_qubits = L.n;
  Bits alive = L.alive_data;

  // Node indices within ms (parent-first):
  //  0 w4 pair        -> disagree: 1 (w4 third, error path) / agree: 2
  //  1 w4c + w2 pair  -> disagree: 3 (w2 third) / agree: 4   [error path]
  //  2 w2 pair        -> disagree: 5 (w2 third, error path) / agree: 6
  //  3 err tail (after w4c + w2c)
  //  4 err tail (after w4c, w2 agreed)
  //  5 err tail (w4 agreed, after w2c)
  //  6 flagged S^X    -> trigger: 8 / clean: 7
  //  7 split, clean merge: flagged S^Z -> trigger: 12 / clean: 11
  //  8 un-flagged S^X -> compat45: 9 / compat6: 10 / else: 13
  //  9 w4 re-measure  -> 14 (split-err)
  // 10 w2 re-measure  -> 15 (split-err)
  // 11 terminal (clean split, flagged bits)
  // 12 un-flagged S^Z -> terminal ([8] path)
  // 13 split-err (un-flagged S^Z -> terminal)
  // 14/15 split-err variants with joint flips
  // The error tails 3/4/5 run an un-flagged S^X then a split-err S^Z with
  // the trust-the-last-measurement joint rule.

  auto new_builder = [&](const std::string& prefix) {
    CircuitBuilder cb(L.n, prefix);
    cb.set_alive(alive);
    return cb;
  };

  // -- node 0: w4 measured twice.
  CircuitBuilder c0 = new_builder("m0");
  auto w4a = emit_w4(c0, L, "w4a");
  auto w4b = emit_w4(c0, L, "w4b");
  c0.detector("w4rep", {w4a, w4b});
  TreeNode n0;
  n0.name = "w4pair";
  n0.circuit = c0.take();
  Predicate w4_dis = Predicate::parity({w4a, w4b}, 1);
  n0.edges.push_back({w4_dis, 1});
  n0.edges.push_back({Predicate::negate(w4_dis), 2});

  // -- node 1: confirming w4, then the w2 pair (error-detected mode).
  CircuitBuilder c1 = new_builder("m1");
  auto w4c = emit_w4(c1, L, "w4c");
  auto w2a1 = emit_w2(c1, L, "w2a");
  auto w2b1 = emit_w2(c1, L, "w2b");
  c1.detector("w2rep", {w2a1, w2b1});
  TreeNode n1;
  n1.name = "w4c_w2pair";
  n1.circuit = c1.take();
  Predicate w2_dis1 = Predicate::parity({w2a1, w2b1}, 1);
  n1.edges.push_back({w2_dis1, 3});
  n1.edges.push_back({Predicate::negate(w2_dis1), 4});

  // -- node 2: w2 measured twice (clean w4).
  CircuitBuilder c2 = new_builder("m2");
  auto w2a = emit_w2(c2, L, "w2a");
  auto w2b = emit_w2(c2, L, "w2b");
  c2.detector("w2rep", {w2a, w2b});
  TreeNode n2;
  n2.name = "w2pair";
  n2.circuit = c2.take();
  Predicate w2_dis = Predicate::parity({w2a, w2b}, 1);
  n2.edges.push_back({w2_dis, 5});
  n2.edges.push_back({Predicate::negate(w2_dis), 6});

  // Error tails: un-flagged S^X, Z corrections, then an un-flagged split
  // with the trust-the-last rule: if the re-measured syndrome is compatible
  // with a boundary error, the stored joint value is flipped.
  auto error_tail = [&](const std::string& prefix, Predicate w4_val, Predicate w2_val) {
    CircuitBuilder cb = new_builder(prefix);
    std::vector<std::string> sx1, sx2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::X, "x1", &sx1);
    emit_bare_block(cb, code, L.b2, MeasureBasis::X, "x2", &sx2);
    cb.lookup_corr(make_lookup(L.b1, 'Z', sx1, {}));
    cb.lookup_corr(make_lookup(L.b2, 'Z', sx2, {}));
    std::vector<std::string> sz1, sz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &sz1, 0b100);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &sz2, 0b100);
    cb.detector("zw8", {sz1[2], sz2[2]});
    SplitInputs in;
    in.sz1 = sz1;
    in.sz2 = sz2;
    in.joint = Predicate::xor_of({w4_val, w2_val, compat_any_boundary(sx1, sx2)});
    Terminal t = emit_split_tail(cb, code, L, input, in);
    TreeNode node;
    node.name = prefix;
    node.circuit = cb.take();
    node.terminal = t;
    return node;
  };

  TreeNode n3;
  {
    // The third w2 measurement happens inside this node before the round.
    CircuitBuilder cb = new_builder("e3");
    auto w2c = emit_w2(cb, L, "w2c");
    std::vector<std::string> sx1, sx2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::X, "x1", &sx1);
    emit_bare_block(cb, code, L.b2, MeasureBasis::X, "x2", &sx2);
    cb.lookup_corr(make_lookup(L.b1, 'Z', sx1, {}));
    cb.lookup_corr(make_lookup(L.b2, 'Z', sx2, {}));
    std::vector<std::string> sz1, sz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &sz1, 0b100);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &sz2, 0b100);
    cb.detector("zw8", {sz1[2], sz2[2]});
    SplitInputs in;
    in.sz1 = sz1;
    in.sz2 = sz2;
    in.joint = Predicate::xor_of({Predicate::parity({w4c}, 1), Predicate::parity({w2c}, 1),
                                  compat_any_boundary(sx1, sx2)});
    Terminal t = emit_split_tail(cb, code, L, input, in);
    n3.name = "e3";
    n3.circuit = cb.take();
    n3.terminal = t;
  }
  TreeNode n4 = error_tail("e4", Predicate::parity({w4c}, 1), Predicate::parity({w2a1}, 1));
  TreeNode n5;
  {
    CircuitBuilder cb = new_builder("e5");
    auto w2c = emit_w2(cb, L, "w2c");
    std::vector<std::string> sx1, sx2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::X, "x1", &sx1);
    emit_bare_block(cb, code, L.b2, MeasureBasis::X, "x2", &sx2);
    cb.lookup_corr(make_lookup(L.b1, 'Z', sx1, {}));
    cb.lookup_corr(make_lookup(L.b2, 'Z', sx2, {}));
    std::vector<std::string> sz1, sz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &sz1, 0b100);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &sz2, 0b100);
    cb.detector("zw8", {sz1[2], sz2[2]});
    SplitInputs in;
    in.sz1 = sz1;
    in.sz2 = sz2;
    in.joint = Predicate::xor_of({Predicate::parity({w4a}, 1), Predicate::parity({w2c}, 1),
                                  compat_any_boundary(sx1, sx2)});
    Terminal t = emit_split_tail(cb, code, L, input, in);
    n5.name = "e5";
    n5.circuit = cb.take();
    n5.terminal = t;
  }

  // -- node 6: flagged S^X of both blocks.
  CircuitBuilder c6 = new_builder("m6");
  std::vector<StabBits> fx1, fx2;
  emit_flagged_block(c6, code, L.b1, MeasureBasis::X, "b1", &fx1);
  emit_flagged_block(c6, code, L.b2, MeasureBasis::X, "b2", &fx2);
  TreeNode n6;
  n6.name = "sxf";
  n6.circuit = c6.take();
  std::vector<std::string> sx_trigger;
  for (auto& sb : fx1) {
    sx_trigger.push_back(sb.synd);
    sx_trigger.push_back(sb.flag);
  }
  for (auto& sb : fx2) {
    sx_trigger.push_back(sb.synd);
    sx_trigger.push_back(sb.flag);
  }
  n6.edges.push_back({any_set(sx_trigger), 8});
  n6.edges.push_back({Predicate::negate(any_set(sx_trigger)), 7});

  // -- node 7: clean merge; split with flagged S^Z.
  CircuitBuilder c7 = new_builder("m7");
  std::vector<StabBits> fz1, fz2;
  emit_flagged_block(c7, code, L.b1, MeasureBasis::Z, "b1", &fz1, 0b100);
  emit_flagged_block(c7, code, L.b2, MeasureBasis::Z, "b2", &fz2, 0b100);
  // The two bottom plaquette readings are individually random; their product
  // is the merged weight-8 stabilizer.
  c7.detector("zw8", {fz1[2].synd, fz2[2].synd});
  TreeNode n7;
  n7.name = "szf";
  n7.circuit = c7.take();
  {
    // Trigger [8]: any flag, any non-merged syndrome bit, or a flipped
    // weight-8 product.
    std::vector<Predicate> trig;
    for (auto& sb : fz1) trig.push_back(Predicate::parity({sb.flag}, 1));
    for (auto& sb : fz2) trig.push_back(Predicate::parity({sb.flag}, 1));
    for (int p = 0; p < 2; p++) {
      trig.push_back(Predicate::parity({fz1[p].synd}, 1));
      trig.push_back(Predicate::parity({fz2[p].synd}, 1));
    }
    trig.push_back(Predicate::parity({fz1[2].synd, fz2[2].synd}, 1));
    Predicate trigger = Predicate::any_of(trig);
    n7.edges.push_back({trigger, 12});
    n7.edges.push_back({Predicate::negate(trigger), 11});
  }

  // -- node 8: un-flagged S^X after a trigger.
  CircuitBuilder c8 = new_builder("m8");
  std::vector<std::string> ux1, ux2;
  emit_bare_block(c8, code, L.b1, MeasureBasis::X, "x1", &ux1);
  emit_bare_block(c8, code, L.b2, MeasureBasis::X, "x2", &ux2);
  // Z corrections wait until after the disambiguation re-measurements: the
  // repeated boundary readout must still see the error to time-stamp it.
  TreeNode n8;
  n8.name = "sxu";
  n8.circuit = c8.take();
  {
    Predicate p45 = compat45(ux1, ux2);
    Predicate p6 = Predicate::all_of({Predicate::negate(compat45(ux1, ux2)), compat6(ux1, ux2)});
    Predicate rest = Predicate::negate(compat_any_boundary(ux1, ux2));
    n8.edges.push_back({p45, 9});
    n8.edges.push_back({p6, 10});
    n8.edges.push_back({rest, 13});
  }

  // -- node 9 / 10: boundary disambiguation re-measurements.
  CircuitBuilder c9 = new_builder("m9");
  auto w4r = emit_w4(c9, L, "w4r");
  c9.detector("w4conf", {w4a, w4r});
  c9.lookup_corr(make_lookup(L.b1, 'Z', ux1, {}));
  c9.lookup_corr(make_lookup(L.b2, 'Z', ux2, {}));
  TreeNode n9;
  n9.name = "w4third";
  n9.circuit = c9.take();
  n9.edges.push_back({Predicate::always(), 14});

  CircuitBuilder c10 = new_builder("m10");
  auto w2r = emit_w2(c10, L, "w2r");
  c10.detector("w2conf", {w2a, w2r});
  c10.lookup_corr(make_lookup(L.b1, 'Z', ux1, {}));
  c10.lookup_corr(make_lookup(L.b2, 'Z', ux2, {}));
  TreeNode n10;
  n10.name = "w2third";
  n10.circuit = c10.take();
  n10.edges.push_back({Predicate::always(), 15});

  // Joint value expressions. The agreed pair values are w4a and w2a; a
  // re-measurement that agrees with the stored value means the boundary
  // error predates the merge, so the stored value is flipped.
  Predicate joint_plain = Predicate::xor_of(
      {Predicate::parity({w4a}, 1), Predicate::parity({w2a}, 1)});
  Predicate joint_after_w4r = Predicate::xor_of(
      {Predicate::parity({w4a}, 1), Predicate::parity({w2a}, 1), Predicate::parity({w4a, w4r}, 0)});
  Predicate joint_after_w2r = Predicate::xor_of(
      {Predicate::parity({w4a}, 1), Predicate::parity({w2a}, 1), Predicate::parity({w2a, w2r}, 0)});

  auto split_err = [&](const std::string& prefix, Predicate joint,
                       std::vector<std::string> xctx1, std::vector<std::string> xctx2,
                       bool z_corr_from_sxu = false) {
    CircuitBuilder cb = new_builder(prefix);
    if (z_corr_from_sxu) {
      cb.lookup_corr(make_lookup(L.b1, 'Z', ux1, {}));
      cb.lookup_corr(make_lookup(L.b2, 'Z', ux2, {}));
    }
    std::vector<std::string> sz1, sz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &sz1, 0b100);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &sz2, 0b100);
    cb.detector("zw8", {sz1[2], sz2[2]});
    SplitInputs in;
    in.sz1 = sz1;
    in.sz2 = sz2;
    in.joint = joint;
    in.xctx1 = std::move(xctx1);
    in.xctx2 = std::move(xctx2);
    Terminal t = emit_split_tail(cb, code, L, input, in);
    TreeNode node;
    node.name = prefix;
    node.circuit = cb.take();
    node.terminal = t;
    return node;
  };

  // -- node 11: clean split terminal (uses the flagged S^Z bits).
  TreeNode n11;
  {
    CircuitBuilder cb = new_builder("t11");
    SplitInputs in;
    in.sz1 = synds_of(fz1);
    in.sz2 = synds_of(fz2);
    in.joint = joint_plain;
    in.zctx1 = flags_of(fz1);
    in.zctx2 = flags_of(fz2);
    Terminal t = emit_split_tail(cb, code, L, input, in);
    n11.name = "t_clean";
    n11.circuit = cb.take();
    n11.terminal = t;
  }

  // -- node 12: un-flagged S^Z after the [8] trigger.
  TreeNode n12;
  {
    CircuitBuilder cb = new_builder("t12");
    std::vector<std::string> sz1, sz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &sz1, 0b100);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &sz2, 0b100);
    cb.detector("zw8", {sz1[2], sz2[2]});
    SplitInputs in;
    in.sz1 = sz1;
    in.sz2 = sz2;
    in.joint = joint_plain;
    in.zctx1 = flags_of(fz1);
    in.zctx2 = flags_of(fz2);
    Terminal t = emit_split_tail(cb, code, L, input, in);
    n12.name = "t_szu";
    n12.circuit = cb.take();
    n12.terminal = t;
  }

  TreeNode n13 = split_err("t13", joint_plain, flags_of(fx1), flags_of(fx2), true);
  TreeNode n14 = split_err("t14", joint_after_w4r, flags_of(fx1), flags_of(fx2));
  TreeNode n15 = split_err("t15", joint_after_w2r, flags_of(fx1), flags_of(fx2));

  ms.nodes = {std::move(n0),  std::move(n1),  std::move(n2),  std::move(n3),
              std::move(n4),  std::move(n5),  std::move(n6),  std::move(n7),
              std::move(n8),  std::move(n9),  std::move(n10), std::move(n11),
              std::move(n12), std::move(n13), std::move(n14), std::move(n15)};

  graft(tree, ms);
  tree.n_qubits = L.n;
  for (auto& node : tree.nodes) node.circuit.n_qubits = L.n;
  tree.meta.kind = "teleport_ls";
  tree.meta.state = input;
  tree.meta.dest_data = L.b2.data;
  tree.meta.source_data = L.b1.data;
  tree.meta.post_selected = true;
  tree.meta.ft_tagged = true;
  tree.meta.data_qubits = L.b1.data;
  tree.meta.data_qubits.insert(tree.meta.data_qubits.end(), L.b2.data.begin(), L.b2.data.end());
  tree.meta.syndrome_qubits = L.b1.synd;
  tree.meta.syndrome_qubits.insert(tree.meta.syndrome_qubits.end(), L.b2.synd.begin(),
                                   L.b2.synd.end());
  tree.meta.flag_qubits = L.b1.flag;
  tree.meta.flag_qubits.insert(tree.meta.flag_qubits.end(), L.b2.flag.begin(), L.b2.flag.end());
  tree.meta.surgery_qubits = {L.w4_anc, L.w2_anc};
  return tree;
}

ProtocolTree gen_merge_only(CardinalState input) {
  // Preparation and merge as in the full protocol, halting once the joint
  // value is accepted; probes check the post-merge state directly.
  ProtocolTree full = gen_teleport_ls(input);
  for (auto& node : full.nodes) {
    if (node.name != "szf") continue;
    node.circuit = Circuit{};
    node.circuit.n_qubits = full.n_qubits;
    node.edges.clear();
    node.terminal = Terminal{"merged", nullptr, {}};
  }
  // Drop the now-unreachable split nodes and remap edges.
  std::vector<int> remap(full.nodes.size(), -1);
  std::vector<TreeNode> kept;
  std::function<void(int)> visit = [&](int i) {
    if (remap[i] != -1) return;
    remap[i] = (int)kept.size();
    kept.push_back(full.nodes[i]);
    for (auto& e : full.nodes[i].edges) visit(e.next);
  };
  visit(0);
  for (auto& node : kept)
    for (auto& e : node.edges) e.next = remap[e.next];
  full.nodes = std::move(kept);
  full.meta.kind = "merge_only";
  full.meta.ft_tagged = false;
  return full;
}

namespace {

// Signature-conditioned corrections for the flagged weight-6 joint
// measurement, enumerated by forced-fault propagation through the probe
// circuit: every flagged single fault is classified by its per-block
// syndromes, and the минимal representative modulo the two-block stabilizer
// group extended by the joint logical is applied.
struct JointHookTable {
  struct Entry {
    int s1, s2;
    Bits correction;
  };
  std::vector<Entry> entries;
};

JointHookTable build_joint_hook_table(const ColorCode& code, const SurgeryLayout& L,
                                      std::function<std::string(CircuitBuilder&)> emit_joint) {
  // Probe: joint measurement then nothing; classify final frames.
  ProtocolTree probe;
  probe.n_qubits = L.n;
  CircuitBuilder cb(L.n, "probe");
  cb.set_alive(L.alive_data);
  auto jbit = emit_joint(cb);
  (void)jbit;
  TreeNode node;
  node.name = "joint";
  node.circuit = cb.take();
  node.circuit.n_qubits = L.n;
  node.terminal = Terminal{"end", nullptr, {}};
  probe.nodes.push_back(std::move(node));

  ProtocolTree noisy = scem_attach(probe, ScemParams{0.01});
  CompiledTree ct = compile_tree(noisy);
  DenseSimulator sim(ct, 1);

  std::vector<Bits> span;
  for (auto& p : code.plaquettes) {
    span.push_back(p.support);           // block 1
    span.push_back(p.support << 7);      // block 2
  }
  Bits joint_sup = 0;
  for (int i : {4, 5, 6}) joint_sup |= (Bits{1} << i) | (Bits{1} << (i + 7));
  span.push_back(joint_sup);  // the measured joint absorbs this class

  auto synd_of = [&](Bits err, int block) {
    int s = 0;
    for (int p = 0; p < 3; p++) {
      Bits sup = block == 0 ? code.plaquettes[p].support : code.plaquettes[p].support << 7;
      s = s << 1 | parity(sup, err);
    }
    return s;
  };

  std::map<std::pair<int, int>, Bits> residue_of, rep_of;
  const Circuit& circ = noisy.nodes[0].circuit;
  // The flag bit is the second measurement of the probe node.
  for (size_t k = 0; k < circ.instrs.size(); k++) {
    const Instruction& ins = circ.instrs[k];
    auto consider = [&](const ForcedFault& ff) {
      TerminalResult res = sim.run_shot(0, &ff);
      // Flag bit name is "probe.jf"; resolve lazily.
      int flag_idx = ct.resolve(res.terminal_node, "probe.jf");
      bool flagged =
          std::binary_search(res.record.begin(), res.record.end(), (uint32_t)flag_idx);
      if (!flagged) return;
      Bits err = res.frame.x & 0x3fff;
      int s1 = synd_of(err, 0), s2 = synd_of(err, 1);
      Bits residue = gf2_reduce(span, err);
      auto key = std::make_pair(s1, s2);
      auto it = residue_of.find(key);
      if (it == residue_of.end()) {
        residue_of[key] = residue;
        // Min-weight representative in the coset.
        Bits best = err;
        std::vector<Bits> all{0};
        for (Bits r : span) {
          size_t m = all.size();
          for (size_t i = 0; i < m; i++) all.push_back(all[i] ^ r);
        }
        for (Bits g : all) {
          Bits cand = err ^ g;
          if (weight(cand) < weight(best)) best = cand;
        }
        rep_of[key] = best;
      } else if (it->second != residue) {
        throw std::runtime_error("inconsistent joint-hook signature");
      }
    };
    ForcedFault ff;
    ff.node = 0;
    ff.instr = (int)k;
    if (ins.kind == InstrKind::CHANNEL) {
      size_t letters = ins.channel == ChannelKind::DEPOL2   ? 15
                       : ins.channel == ChannelKind::DEPOL1 ? 3
                                                            : 1;
      for (size_t l = 0; l < letters; l++) {
        ff.letter = (int)l;
        consider(ff);
      }
    } else if (ins.kind == InstrKind::MEASURE) {
      ff.record_flip = true;
      consider(ff);
    } else if (ins.kind == InstrKind::RESET && ins.p > 0) {
      ff.letter = -1;
      consider(ff);
    }
  }
  JointHookTable table;
  for (auto& [key, rep] : rep_of)
    if (rep) table.entries.push_back({key.first, key.second, rep});
  return table;
}

}  // namespace

ProtocolTree gen_teleport_direct(bool repeated, CardinalState input) {
  ColorCode code = build_hex_color_code(3);
  SurgeryLayout L = teleport_layout();
  bool stab_src = input == CardinalState::PlusI || input == CardinalState::MinusI;

  auto emit_joint = [&](CircuitBuilder& cb, const std::string& tag, bool flagged,
                        SingleStab* out) {
    std::vector<int> qs = {L.b1.q(4), L.b2.q(4), L.b1.q(5), L.b2.q(5), L.b1.q(6), L.b2.q(6)};
    auto sb = emit_single_stab(cb, qs, MeasureBasis::X, L.w4_anc, flagged ? L.w2_anc : -1, tag,
                               /*random_synd=*/true);
    if (out) *out = sb;
  };

  // Hook table for the flagged weight-6 circuit, shared by both variants.
  static JointHookTable hook_table = build_joint_hook_table(
      code, L, [&](CircuitBuilder& cb) {
        SingleStab sb;
        std::vector<int> qs = {L.b1.q(4), L.b2.q(4), L.b1.q(5),
                               L.b2.q(5), L.b1.q(6), L.b2.q(6)};
        sb = emit_single_stab(cb, qs, MeasureBasis::X, L.w4_anc, L.w2_anc, "j",
                              /*random_synd=*/true);
        return sb.flag;
      });

  // Preparations as in the lattice-surgery gadget.
  ProtocolTree tree;
  if (stab_src) {
    tree = stabilizer_prep_subtree(input, L.n, L.b1, "sps");
    graft(tree, verified_prep_subtree(CardinalState::Zero, L.n, L.b2, L.b2.synd[0], "pvd"));
  } else {
    ProtocolTree both;
    both.n_qubits = L.n;
    CircuitBuilder cb(L.n, "pv");
    cb.set_alive(L.alive_data);
    emit_goto_encoding(cb, L.b1);
    emit_goto_encoding(cb, L.b2);
    cb.set_alive(L.alive_data | (Bits{1} << L.b1.synd[0]) | (Bits{1} << L.b2.synd[0]));
    auto ver1 = emit_verification(cb, L.b1, L.b1.synd[0], "ver1");
    auto ver2 = emit_verification(cb, L.b2, L.b2.synd[0], "ver2");
    cb.set_alive(L.alive_data);
    emit_state_rotation(cb, L.b1, input);
    TreeNode root;
    root.name = "prep";
    root.circuit = cb.take();
    Predicate bad =
        Predicate::any_of({Predicate::parity({ver1}, 1), Predicate::parity({ver2}, 1)});
    root.edges.push_back({bad, 1});
    root.edges.push_back({Predicate::negate(bad), 2});
    TreeNode discard;
    discard.name = "discarded";
    discard.terminal = Terminal{"discard", std::make_shared<Predicate>(bad), {}};
    TreeNode go;
    go.name = "go";
    go.terminal = Terminal{"go", nullptr, {}};
    both.nodes.push_back(std::move(root));
    both.nodes.push_back(std::move(discard));
    both.nodes.push_back(std::move(go));
    tree = std::move(both);
  }

  // Joint measurement section plus one adaptive QEC round, then the source
  // readout and conditional corrections.
  ProtocolTree jm;
  jm.n_qubits = L.n;
  Bits alive = L.alive_data;

  auto hook_corrections = [&](CircuitBuilder& cb, const Predicate& jf_any,
                              const std::vector<std::string>& sz1,
                              const std::vector<std::string>& sz2) {
    for (const auto& e : hook_table.entries) {
      Predicate cond =
          Predicate::all_of({jf_any, synd_equals(sz1, e.s1), synd_equals(sz2, e.s2)});
      cb.cond_pauli(std::move(cond), e.correction, 0);
    }
  };

  // Shared tail pieces: the transversal source readout with record decode,
  // the conditional teleport corrections, and the terminal outputs.
  auto finish_tail = [&](CircuitBuilder& cb, Predicate joint,
                         std::vector<std::string> zctx2) {
    std::vector<std::string> src_bits;
    emit_transversal_readout(cb, code, L.b1, "src", &src_bits);
    std::vector<Predicate> plaq_parities;
    for (int p = 0; p < 3; p++) {
      std::vector<std::string> ds;
      for (int i = 0; i < 7; i++)
        if (code.plaquettes[p].support >> i & 1) ds.push_back(src_bits[i]);
      plaq_parities.push_back(Predicate::parity(ds, 1));
    }
    Predicate b_corr = lookup_parity_predicate(reference_flag_table(), plaq_parities);
    Predicate b_expr = Predicate::xor_of(
        {Predicate::parity({src_bits[0], src_bits[1], src_bits[4]}, 1), b_corr});
    Bits xl2 = 0, zl2 = 0;
    for (int i : {0, 1, 4}) {
      xl2 |= Bits{1} << L.b2.q(i);
      zl2 |= Bits{1} << L.b2.q(i);
    }
    cb.cond_pauli(b_expr, xl2, 0);
    cb.cond_pauli(joint, 0, zl2);
    Terminal t;
    t.outputs.push_back({"a", joint, true});
    t.outputs.push_back({"b", b_expr, true});
    for (size_t i = 0; i < zctx2.size(); i++)
      t.outputs.push_back(
          {"zctx2_" + std::to_string(i + 1), Predicate::parity({zctx2[i]}, 1), false});
    return t;
  };

  // Error-detected tail: un-flagged rounds, hook corrections gated by the
  // joint flags, trust-the-last joint value with the boundary flip rule.
  auto error_tail = [&](const std::string& prefix, Predicate stored, Predicate jf_any) {
    CircuitBuilder cb(L.n, prefix);
    cb.set_alive(alive);
    std::vector<std::string> ux1, ux2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::X, "x1", &ux1);
    emit_bare_block(cb, code, L.b2, MeasureBasis::X, "x2", &ux2);
    cb.lookup_corr(make_lookup(L.b1, 'Z', ux1, {}));
    cb.lookup_corr(make_lookup(L.b2, 'Z', ux2, {}));
    std::vector<std::string> uz1, uz2;
    emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &uz1);
    emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &uz2);
    auto lk1 = make_lookup(L.b1, 'X', uz1, {});
    lk1->enable = std::make_shared<Predicate>(Predicate::negate(jf_any));
    cb.lookup_corr(lk1);
    auto lk2 = make_lookup(L.b2, 'X', uz2, {});
    lk2->enable = std::make_shared<Predicate>(Predicate::negate(jf_any));
    cb.lookup_corr(lk2);
    hook_corrections(cb, jf_any, uz1, uz2);
    Predicate joint = Predicate::xor_of({stored, compat_any_boundary(ux1, ux2)});
    TreeNode node;
    node.name = prefix;
    Terminal t = finish_tail(cb, joint, {});
    t.name = prefix + ".end";
    node.circuit = cb.take();
    node.terminal = t;
    return node;
  };

  if (!repeated) {
    CircuitBuilder c0(L.n, "j0");
    c0.set_alive(alive);
    SingleStab j1;
    emit_joint(c0, "j1", true, &j1);
    TreeNode n0;
    n0.name = "joint";
    n0.circuit = c0.take();
    n0.edges.push_back({Predicate::always(), 1});
    TreeNode t0 =
        error_tail("jt", Predicate::parity({j1.synd}, 1), Predicate::parity({j1.flag}, 1));
    jm.nodes = {std::move(n0), std::move(t0)};
  } else {
    // Node plan: 0 joint pair -> (trigger: 1 third joint -> 2 error tail)
    //                          / (clean: 3 flagged S^X both)
    // 3 -> (clean: 4 flagged S^Z both) / (trigger: 5 un-flagged S^X)
    // 4 -> (clean: 6 terminal) / (trigger: 7 un-flagged S^Z terminal)
    // 5 -> (boundary-compatible: 8 joint re-measure terminal)
    //    / (else: 9 plain corrected terminal)
    CircuitBuilder c0(L.n, "j0");
    c0.set_alive(alive);
    SingleStab j1, j2;
    emit_joint(c0, "j1", true, &j1);
    emit_joint(c0, "j2", true, &j2);
    c0.detector("jrep", {j1.synd, j2.synd});
    TreeNode n0;
    n0.name = "jointpair";
    n0.circuit = c0.take();
    Predicate trig0 = Predicate::any_of({Predicate::parity({j1.synd, j2.synd}, 1),
                                         Predicate::parity({j1.flag}, 1),
                                         Predicate::parity({j2.flag}, 1)});
    n0.edges.push_back({trig0, 1});
    n0.edges.push_back({Predicate::negate(trig0), 3});

    CircuitBuilder c1(L.n, "j1b");
    c1.set_alive(alive);
    SingleStab j3;
    emit_joint(c1, "j3", false, &j3);
    TreeNode n1;
    n1.name = "jointthird";
    n1.circuit = c1.take();
    n1.edges.push_back({Predicate::always(), 2});

    Predicate jf_any =
        Predicate::any_of({Predicate::parity({j1.flag}, 1), Predicate::parity({j2.flag}, 1)});
    TreeNode n2 = error_tail("jt1", Predicate::parity({j3.synd}, 1), jf_any);

    // Clean path: adaptive flagged rounds.
    CircuitBuilder c3(L.n, "q0");
    c3.set_alive(alive);
    std::vector<StabBits> fx1, fx2;
    emit_flagged_block(c3, code, L.b1, MeasureBasis::X, "b1", &fx1);
    emit_flagged_block(c3, code, L.b2, MeasureBasis::X, "b2", &fx2);
    TreeNode n3;
    n3.name = "sxf";
    n3.circuit = c3.take();
    std::vector<std::string> trigx;
    for (auto& sb : fx1) {
      trigx.push_back(sb.synd);
      trigx.push_back(sb.flag);
    }
    for (auto& sb : fx2) {
      trigx.push_back(sb.synd);
      trigx.push_back(sb.flag);
    }
    n3.edges.push_back({any_set(trigx), 5});
    n3.edges.push_back({Predicate::negate(any_set(trigx)), 4});

    CircuitBuilder c4(L.n, "q1");
    c4.set_alive(alive);
    std::vector<StabBits> fz1, fz2;
    emit_flagged_block(c4, code, L.b1, MeasureBasis::Z, "b1", &fz1);
    emit_flagged_block(c4, code, L.b2, MeasureBasis::Z, "b2", &fz2);
    TreeNode n4;
    n4.name = "szf";
    n4.circuit = c4.take();
    std::vector<std::string> trigz;
    for (auto& sb : fz1) {
      trigz.push_back(sb.synd);
      trigz.push_back(sb.flag);
    }
    for (auto& sb : fz2) {
      trigz.push_back(sb.synd);
      trigz.push_back(sb.flag);
    }
    n4.edges.push_back({any_set(trigz), 7});
    n4.edges.push_back({Predicate::negate(any_set(trigz)), 6});

    Predicate stored = Predicate::parity({j1.synd}, 1);

    TreeNode n6;
    {
      CircuitBuilder cb(L.n, "t6");
      Terminal t = finish_tail(cb, stored, {});
      t.name = "clean.end";
      n6.name = "t_clean";
      n6.circuit = cb.take();
      n6.terminal = t;
    }

    TreeNode n7;
    {
      CircuitBuilder cb(L.n, "t7");
      cb.set_alive(alive);
      std::vector<std::string> uz1, uz2;
      emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &uz1);
      emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &uz2);
      cb.lookup_corr(make_lookup(L.b1, 'X', uz1, {}));
      cb.lookup_corr(make_lookup(L.b2, 'X', uz2, {}));
      Terminal t = finish_tail(cb, stored, flags_of(fz2));
      t.name = "szu.end";
      n7.name = "t_szu";
      n7.circuit = cb.take();
      n7.terminal = t;
    }

    // Un-flagged S^X after a trigger; corrections wait for the joint
    // re-measurement on the boundary-compatible branch.
    CircuitBuilder c5(L.n, "q2");
    c5.set_alive(alive);
    std::vector<std::string> ux1, ux2;
    emit_bare_block(c5, code, L.b1, MeasureBasis::X, "x1", &ux1);
    emit_bare_block(c5, code, L.b2, MeasureBasis::X, "x2", &ux2);
    TreeNode n5;
    n5.name = "sxu";
    n5.circuit = c5.take();
    Predicate compat = compat_any_boundary(ux1, ux2);
    n5.edges.push_back({compat, 8});
    n5.edges.push_back({Predicate::negate(compat), 9});

    auto sx_tail = [&](const std::string& prefix, bool remeasure) {
      CircuitBuilder cb(L.n, prefix);
      cb.set_alive(alive);
      Predicate joint = stored;
      if (remeasure) {
        SingleStab jr;
        emit_joint(cb, "jr", false, &jr);
        joint = Predicate::xor_of(
            {stored, Predicate::parity({j1.synd, jr.synd}, 0)});
      }
      cb.lookup_corr(make_lookup(L.b1, 'Z', ux1, {}));
      cb.lookup_corr(make_lookup(L.b2, 'Z', ux2, {}));
      std::vector<std::string> uz1, uz2;
      emit_bare_block(cb, code, L.b1, MeasureBasis::Z, "z1", &uz1);
      emit_bare_block(cb, code, L.b2, MeasureBasis::Z, "z2", &uz2);
      cb.lookup_corr(make_lookup(L.b1, 'X', uz1, flags_of(fx1)));
      cb.lookup_corr(make_lookup(L.b2, 'X', uz2, flags_of(fx2)));
      TreeNode node;
      node.name = prefix;
      Terminal t = finish_tail(cb, joint, {});
      t.name = prefix + ".end";
      node.circuit = cb.take();
      node.terminal = t;
      return node;
    };
    TreeNode n8 = sx_tail("t8", true);
    TreeNode n9 = sx_tail("t9", false);

    jm.nodes = {std::move(n0), std::move(n1), std::move(n2), std::move(n3), std::move(n4),
                std::move(n5), std::move(n6), std::move(n7), std::move(n8), std::move(n9)};
  }

  graft(tree, jm);
  tree.n_qubits = L.n;
  for (auto& node : tree.nodes) node.circuit.n_qubits = L.n;
  tree.meta.kind = repeated ? "teleport_direct_repeated" : "teleport_direct";
  tree.meta.state = input;
  tree.meta.dest_data = L.b2.data;
  tree.meta.source_data = L.b1.data;
  tree.meta.post_selected = true;
  tree.meta.ft_tagged = repeated;
  tree.meta.data_qubits = L.b1.data;
  tree.meta.data_qubits.insert(tree.meta.data_qubits.end(), L.b2.data.begin(), L.b2.data.end());
  tree.meta.syndrome_qubits = L.b1.synd;
  tree.meta.syndrome_qubits.insert(tree.meta.syndrome_qubits.end(), L.b2.synd.begin(),
                                   L.b2.synd.end());
  tree.meta.flag_qubits = L.b1.flag;
  tree.meta.flag_qubits.insert(tree.meta.flag_qubits.end(), L.b2.flag.begin(), L.b2.flag.end());
  tree.meta.surgery_qubits = {L.w4_anc, L.w2_anc};
  return tree;
}

}  // namespace ccsim
