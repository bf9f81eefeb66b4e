#pragma once

#include <functional>
#include <map>
#include <optional>

#include "ccsim/circuit.hpp"

namespace ccsim {

/// Terminal of a protocol tree: optional post-selection predicate plus named
/// parity outputs extracted from the record. Outputs marked `dress_random`
/// report genuinely random measurement results: the flip parity is XORed
/// with a per-shot uniform reference bit at extraction time.
struct Terminal {
  std::string name;
  std::shared_ptr<Predicate> discard;
  struct Output {
    std::string name;
    Predicate value;
    bool dress_random = false;
  };
  std::vector<Output> outputs;
};

struct TreeNode {
  std::string name;
  Circuit circuit;
  struct Edge {
    Predicate when;
    int next;
  };
  std::vector<Edge> edges;  // mutually exclusive and exhaustive; empty => terminal
  std::optional<Terminal> terminal;
};

enum class CardinalState : uint8_t { Zero, One, Plus, Minus, PlusI, MinusI };

const char* to_string(CardinalState s);
CardinalState cardinal_from_string(const std::string& s);

/// Harness metadata attached to generated gadget trees.
struct GadgetMeta {
  std::string kind;
  CardinalState state = CardinalState::Zero;
  std::vector<int> dest_data;    // data qubits of the block holding the result
  std::vector<int> source_data;  // teleportation source block, if any
  bool post_selected = false;    // verified prep discards flagged shots
  bool ft_tagged = true;         // expected fault-tolerance level
  // Role partition for resource accounting.
  std::vector<int> data_qubits, syndrome_qubits, flag_qubits, surgery_qubits;
};

struct ProtocolTree {
  int n_qubits = 0;
  std::vector<TreeNode> nodes;  // root is node 0
  GadgetMeta meta;
};

/// Resolved bit-name table and channel ordinals for one node.
struct CompiledNode {
  int parent = -1;
  int record_base = 0;   // absolute index of this node's first measurement
  int record_count = 0;  // measurements in this node
  std::map<std::string, int> bit_index;    // cumulative along the path
  std::vector<int> channel_instrs;         // instruction indices that draw randomness
  int default_edge = -1;                   // edge satisfied by the all-zero record
};

struct CompiledTree {
  const ProtocolTree* tree = nullptr;
  std::vector<CompiledNode> nodes;

  int resolve(int node, const std::string& bit) const;
};

/// Resolves names, assigns record offsets, finds default edges, and checks
/// structural contracts (acyclicity, all-zero-safe corrections, exhaustive
/// default edges). Throws std::invalid_argument on violations.
CompiledTree compile_tree(const ProtocolTree& tree);

int eval_predicate(const Predicate& p, const CompiledTree& ct, int node,
                   const std::vector<uint32_t>& record_bits_set);

/// Root-to-terminal node paths.
std::vector<std::vector<int>> enumerate_paths(const ProtocolTree& tree);

struct TerminalResult {
  uint64_t shot = 0;
  int terminal_node = -1;
  bool discarded = false;
  PauliFrame frame;
  std::vector<uint32_t> record;  // indices of set bits, ascending
  std::vector<std::pair<std::string, int>> outputs;
};

/// Anticommutation parity of the final frame with an observable, XOR any
/// terminal-accumulated correction parity (corrections are folded into the
/// frame during execution, so the extra term is normally zero).
int logical_outcome(const TerminalResult& result, Bits obs_x, Bits obs_z);

}  // namespace ccsim
