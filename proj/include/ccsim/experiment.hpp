#pragma once

#include <optional>

#include "ccsim/gadgets.hpp"
#include "ccsim/noise.hpp"
#include "ccsim/sim.hpp"

namespace ccsim {

/// Logical failure of one finished shot: the terminal frame of the result
/// block is decoded by the lookup table (with any pending flag context the
/// terminal exported) and checked against the logical-Z support; every
/// gadget rotates its result block to the Z basis before terminating.
bool ideal_logical_error(const ProtocolTree& tree, const TerminalResult& res);

struct CertificateResult {
  long faults = 0;
  long logical_errors = 0;
  long discarded = 0;
  std::vector<ForcedFault> failing;
  std::vector<PauliFrame> failing_frames;
};

/// Exhaustive single-fault certificate: every non-identity channel letter at
/// every site and every measurement/reset flip, injected one at a time at
/// otherwise zero noise.
CertificateResult ft_certificate(const ProtocolTree& noisy_tree,
                                 int max_report = 8);

struct WilsonInterval {
  double lo = 0, hi = 0;
};
WilsonInterval wilson_interval(uint64_t failures, uint64_t trials, double z = 1.96);

struct SweepPoint {
  double value = 0;  // swept parameter (SCEM p or T2 seconds)
  uint64_t shots = 0;
  uint64_t failures = 0;
  uint64_t discards = 0;
  double p_logical = 0;
  WilsonInterval ci;
  double wall_seconds = 0;
  std::vector<std::pair<std::string, uint64_t>> branch_shots;
};

struct ExperimentConfig {
  std::string gadget;               // prep_verified, memory_simultaneous, teleport_ls, ...
  std::string state = "0";
  int rounds = 3;                   // memory rounds
  std::string noise = "scem";       // "scem" or an architecture name
  std::vector<double> sweep;        // SCEM rates or T2 values, ascending
  std::string scenario = "current"; // multi-channel scenario tag
  uint64_t shots = 100000;
  uint64_t shot_cap = 100000000;
  uint64_t min_failures = 100;      // adaptive doubling target; 0 disables
  uint64_t seed = 1;
  std::string output;
  std::string format = "csv";
};

struct RunResult {
  ExperimentConfig config;
  std::vector<SweepPoint> points;
  std::string config_hash;
};

ProtocolTree build_gadget(const std::string& name, CardinalState state, int rounds);

RunResult run_experiment(const ExperimentConfig& config);

struct SlopeFit {
  double exponent = 0;
  double stderr_ = 0;
  double offset = 0;
};

/// Least-squares fit of log p_L against log p; requires >= 3 points with
/// nonzero failure rates.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

struct FootprintResult {
  bool finite = true;
  bool extrapolated = false;
  int distance = 0;
  uint64_t qubits = 0;
  std::string note;
};

/// Power-law extrapolation of p_L(d) over the available distances; the
/// qubit count per distance comes from the protocol's scaling.
FootprintResult footprint(const std::vector<std::pair<int, double>>& pl_by_distance,
                          ProtocolKind kind, double p, double target_pl);

std::string emit_csv(const RunResult& result);
std::string emit_json(const RunResult& result);
RunResult parse_csv(const std::string& text);

}  // namespace ccsim
