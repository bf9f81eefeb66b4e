#pragma once

#include "ccsim/sim.hpp"

namespace ccsim {

struct ValidationIssue {
  int node = -1;
  int instr = -1;
  std::string what;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  std::string summary() const;
};

/// Confirms, per root-to-terminal path, that without noise every measurement
/// is deterministic-zero or declared random, using frame randomization after
/// resets and measurements; also checks detector parities and that each
/// node's out-edge predicates partition random records.
ValidationReport validate_tree(const ProtocolTree& tree, int shots_per_path = 10000,
                               uint64_t seed = 7);

}  // namespace ccsim
