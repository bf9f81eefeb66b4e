#include "ccsim/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace ccsim {

const char* to_string(CardinalState s) {
  switch (s) {
    case CardinalState::Zero: return "0";
    case CardinalState::One: return "1";
    case CardinalState::Plus: return "+";
    case CardinalState::Minus: return "-";
    case CardinalState::PlusI: return "+i";
    case CardinalState::MinusI: return "-i";
  }
  return "?";
}

CardinalState cardinal_from_string(const std::string& s) {
  if (s == "0") return CardinalState::Zero;
  if (s == "1") return CardinalState::One;
  if (s == "+") return CardinalState::Plus;
  if (s == "-") return CardinalState::Minus;
  if (s == "+i") return CardinalState::PlusI;
  if (s == "-i") return CardinalState::MinusI;
  throw std::invalid_argument("unknown cardinal state: " + s);
}

int CompiledTree::resolve(int node, const std::string& bit) const {
  const auto& map = nodes[node].bit_index;
  auto it = map.find(bit);
  if (it == map.end())
    throw std::invalid_argument("unresolved record bit '" + bit + "' at node " +
                                tree->nodes[node].name);
  return it->second;
}

int eval_predicate(const Predicate& p, const CompiledTree& ct, int node,
                   const std::vector<uint32_t>& set_bits) {
  switch (p.kind) {
    case Predicate::Kind::TRUE_:
      return 1;
    case Predicate::Kind::PARITY: {
      int par = 0;
      for (const auto& b : p.bits) {
        uint32_t idx = (uint32_t)ct.resolve(node, b);
        par ^= std::binary_search(set_bits.begin(), set_bits.end(), idx);
      }
      return par == p.eq;
    }
    case Predicate::Kind::XOR: {
      int par = 0;
      for (const auto& a : p.args) par ^= eval_predicate(a, ct, node, set_bits);
      return par;
    }
    case Predicate::Kind::ANY:
      for (const auto& a : p.args)
        if (eval_predicate(a, ct, node, set_bits)) return 1;
      return 0;
    case Predicate::Kind::ALL:
      for (const auto& a : p.args)
        if (!eval_predicate(a, ct, node, set_bits)) return 0;
      return 1;
    case Predicate::Kind::NOT_:
      return !eval_predicate(p.args[0], ct, node, set_bits);
  }
  return 0;
}

CompiledTree compile_tree(const ProtocolTree& tree) {
  if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
  CompiledTree ct;
  ct.tree = &tree;
  ct.nodes.resize(tree.nodes.size());

  // Parent discovery; also rejects nodes with several parents (not a tree).
  std::vector<int> indeg(tree.nodes.size(), 0);
  for (size_t i = 0; i < tree.nodes.size(); i++) {
    for (const auto& e : tree.nodes[i].edges) {
      if (e.next < 0 || e.next >= (int)tree.nodes.size())
        throw std::invalid_argument("edge target out of range");
      if (ct.nodes[e.next].parent != -1)
        throw std::invalid_argument("node " + tree.nodes[e.next].name + " has two parents");
      ct.nodes[e.next].parent = (int)i;
      indeg[e.next]++;
    }
  }
  if (ct.nodes[0].parent != -1) throw std::invalid_argument("root must have no parent");

  // Record offsets and cumulative name tables, walking parents first.
  // Nodes are required to be listed in a parent-before-child order.
  for (size_t i = 0; i < tree.nodes.size(); i++) {
    CompiledNode& cn = ct.nodes[i];
    if (cn.parent >= (int)i && i != 0)
      throw std::invalid_argument("nodes must be listed parent-first");
    if (cn.parent >= 0) {
      const CompiledNode& pn = ct.nodes[cn.parent];
      cn.record_base = pn.record_base + pn.record_count;
      cn.bit_index = pn.bit_index;
    }
    int local = 0;
    for (size_t k = 0; k < tree.nodes[i].circuit.instrs.size(); k++) {
      const Instruction& ins = tree.nodes[i].circuit.instrs[k];
      if (ins.kind == InstrKind::MEASURE) {
        if (ins.label.empty()) throw std::invalid_argument("unnamed measurement");
        if (cn.bit_index.count(ins.label))
          throw std::invalid_argument("duplicate bit name " + ins.label);
        cn.bit_index[ins.label] = cn.record_base + local;
        local++;
      }
      bool draws = ins.kind == InstrKind::CHANNEL ||
                   (ins.kind == InstrKind::MEASURE && ins.p > 0) ||
                   (ins.kind == InstrKind::RESET && ins.p > 0);
      if (draws) cn.channel_instrs.push_back((int)k);
      if (ins.q0 >= tree.n_qubits || ins.q1 >= tree.n_qubits)
        throw std::invalid_argument("operand outside declared qubit count");
    }
    cn.record_count = local;
  }

  // Default edges and all-zero safety of corrections.
  std::vector<uint32_t> empty;
  for (size_t i = 0; i < tree.nodes.size(); i++) {
    const TreeNode& node = tree.nodes[i];
    if (node.edges.empty()) {
      if (!node.terminal) throw std::invalid_argument("leaf node lacks a terminal");
      if (node.terminal->discard &&
          eval_predicate(*node.terminal->discard, ct, (int)i, empty))
        throw std::invalid_argument("discard predicate fires on the all-zero record");
      continue;
    }
    int def = -1;
    for (size_t e = 0; e < node.edges.size(); e++) {
      if (eval_predicate(node.edges[e].when, ct, (int)i, empty)) {
        if (def != -1)
          throw std::invalid_argument("two edges of " + node.name + " accept the zero record");
        def = (int)e;
      }
    }
    if (def == -1)
      throw std::invalid_argument("no edge of " + node.name + " accepts the zero record");
    ct.nodes[i].default_edge = def;

    for (const Instruction& ins : node.circuit.instrs) {
      if (ins.kind == InstrKind::COND_PAULI &&
          eval_predicate(*ins.cond, ct, (int)i, empty))
        throw std::invalid_argument("correction fires on the all-zero record in " + node.name);
    }
  }
  return ct;
}

std::vector<std::vector<int>> enumerate_paths(const ProtocolTree& tree) {
  std::vector<std::vector<int>> paths;
  std::vector<int> cur;
  std::function<void(int)> walk = [&](int n) {
    cur.push_back(n);
    if (tree.nodes[n].edges.empty())
      paths.push_back(cur);
    else
      for (const auto& e : tree.nodes[n].edges) walk(e.next);
    cur.pop_back();
  };
  walk(0);
  return paths;
}

int logical_outcome(const TerminalResult& result, Bits obs_x, Bits obs_z) {
  return result.frame.anticommutes(obs_x, obs_z);
}

}  // namespace ccsim
