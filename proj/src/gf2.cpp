#include "ccsim/gf2.hpp"

namespace ccsim {

namespace {

inline Bits lead_bit(Bits v) { return v & ~(v - 1); }

// Gauss-Jordan elimination; returns reduced pivot rows.
std::vector<Bits> eliminate(const std::vector<Bits>& rows) {
  std::vector<Bits> pivots;
  for (Bits r : rows) {
    for (Bits p : pivots)
      if (r & lead_bit(p)) r ^= p;
    if (!r) continue;
    Bits lead = lead_bit(r);
    for (Bits& p : pivots)
      if (p & lead) p ^= r;
    pivots.push_back(r);
  }
  return pivots;
}

}  // namespace

int gf2_rank(std::vector<Bits> rows) { return (int)eliminate(rows).size(); }

Bits gf2_reduce(const std::vector<Bits>& rows, Bits v) {
  for (Bits p : eliminate(rows))
    if (v & lead_bit(p)) v ^= p;
  return v;
}

bool gf2_in_span(const std::vector<Bits>& rows, Bits v) { return gf2_reduce(rows, v) == 0; }

}  // namespace ccsim
