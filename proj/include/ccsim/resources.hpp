#pragma once

#include "ccsim/gadgets.hpp"

namespace ccsim {

/// Gate and qubit accounting for the d=3 strategies in the teleportation
/// context. CNOT counts and depths are measured on the generated circuits;
/// depth counts one unit per CNOT layer and one each for reset and
/// measurement layers.
struct ResourceCount {
  int qubits_total = 0;
  int data = 0, syndrome = 0, flag = 0, surgery = 0;
  int cnots_flagged_per_block = 0;
  int cnots_unflagged_per_block = 0;  // 0 where the strategy has no un-flagged variant
  int depth_half = 0, depth_full = 0;
  int depth_half_unflagged = 0, depth_full_unflagged = 0;
};

ResourceCount count_resources(ProtocolKind kind);

/// Data-qubit count of one block at distance d (two blocks in the
/// teleportation context).
int data_qubits_per_block(int d);

}  // namespace ccsim
