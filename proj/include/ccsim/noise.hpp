#pragma once

#include <string>

#include "ccsim/tree.hpp"

namespace ccsim {

struct ScemParams {
  double p = 0;
};

/// Per-kind rates of the trapped-ion multi-channel model plus the idle
/// dephasing time constant.
struct MultiChannelParams {
  double p_1q = 0, p_2q = 0, p_ct = 0, p_m = 0, p_r = 0;
  double t2_s = 1.0;
  std::string scenario;
};

/// Dephasing probability of an idle interval: (1 - exp(-t/T2)) / 2.
double idle_dephase_prob(double t_s, double t2_s);

/// Uniform depolarizing circuit-level model: depol1 after 1q gates and idle
/// markers and before measurements, depol2 after 2q gates, classical flips
/// on measurements, basis flips after resets. Throws if channels are already
/// attached.
Circuit scem_attach(const Circuit& circuit, const ScemParams& params);
ProtocolTree scem_attach(const ProtocolTree& tree, const ScemParams& params);

/// Neighbor pairs for addressed-beam crosstalk (per gate target).
using NeighborMap = std::function<std::vector<int>(int qubit)>;

/// Per-kind channels: gate/readout/reset rates, crosstalk on neighbor pairs
/// when a map is given, and Z dephasing on every idle marker, whose duration
/// must have been resolved by a schedule. Throws on unresolved idles.
Circuit multichannel_attach(const Circuit& circuit, const MultiChannelParams& params,
                            const NeighborMap& neighbors = nullptr);
ProtocolTree multichannel_attach(const ProtocolTree& tree, const MultiChannelParams& params,
                                 const NeighborMap& neighbors = nullptr);

}  // namespace ccsim
