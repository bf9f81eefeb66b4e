#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace ccsim {

// Binary vectors over up to 64 qubits are stored as bitmasks, one bit per
// qubit. Rows of parity-check matrices use the same encoding.
using Bits = uint64_t;

inline int weight(Bits v) { return std::popcount(v); }

inline int parity(Bits a, Bits b) { return std::popcount(a & b) & 1; }

/// Rank of a set of GF(2) row vectors.
int gf2_rank(std::vector<Bits> rows);

/// True if `v` lies in the row span of `rows`.
bool gf2_in_span(const std::vector<Bits>& rows, Bits v);

/// Reduces `v` against the span and returns the residue (zero iff in span).
Bits gf2_reduce(const std::vector<Bits>& rows, Bits v);

}  // namespace ccsim
