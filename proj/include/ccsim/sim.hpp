#pragma once

#include <functional>

#include "ccsim/tree.hpp"

namespace ccsim {

/// Forces exactly one fault during a run while all channel rates are treated
/// as zero; used for exhaustive fault enumeration.
struct ForcedFault {
  int node = -1;
  int instr = -1;        // index into the node's instruction list
  int letter = -1;       // index into the channel's letter table; -1 for flips
  bool record_flip = false;  // flip the recorded bit of a MEASURE instead
};

/// Serial per-shot reference engine. Samples every channel with an
/// independent Bernoulli draw; the sparse engine is validated against it.
class DenseSimulator {
 public:
  DenseSimulator(const CompiledTree& ct, uint64_t seed) : ct_(ct), seed_(seed) {}

  /// Stim-style frame randomization after resets and measurements; turns
  /// genuinely random outcome bits into uniformly distributed record bits.
  void set_randomize_frames(bool on) { randomize_ = on; }
  void set_noise_off(bool off) { noise_off_ = off; }

  TerminalResult run_shot(uint64_t shot, const ForcedFault* forced = nullptr) const;
  std::vector<TerminalResult> run(uint64_t n_shots) const;

 private:
  const CompiledTree& ct_;
  uint64_t seed_;
  bool randomize_ = false;
  bool noise_off_ = false;
};

/// Per-terminal tally plus the materialized faulty shots.
struct RunStats {
  uint64_t n_shots = 0;
  std::vector<uint64_t> shots_per_terminal;   // indexed by node id
  std::vector<TerminalResult> tracked;        // shots with nonzero frame/record
  uint64_t tracked_count = 0;
};

/// Sparse engine: shots are processed in fixed blocks (independent of the
/// worker count), only faulty shots are materialized, and noise sites are
/// drawn with geometric skips. Blocks run in parallel under OpenMP.
class SparseSimulator {
 public:
  static constexpr uint64_t kBlockShots = 65536;

  SparseSimulator(const CompiledTree& ct, uint64_t seed) : ct_(ct), seed_(seed) {}

  /// Runs all shots; per-shot callback fires for every *tracked* shot at its
  /// terminal (untracked shots are tallied only). The callback must be
  /// thread-safe or `workers` forced to 1; the built-in stats path is safe.
  RunStats run(uint64_t n_shots, bool keep_tracked = false) const;

  using TerminalVisitor = std::function<void(const TerminalResult&)>;

  /// Deterministic per-block execution; visitor receives tracked shots in
  /// block order.
  RunStats run_visit(uint64_t n_shots, const TerminalVisitor& visit) const;

 private:
  RunStats run_visit_impl(uint64_t n_shots, const TerminalVisitor* visit,
                          bool keep_tracked) const;
  const CompiledTree& ct_;
  uint64_t seed_;
};

}  // namespace ccsim
