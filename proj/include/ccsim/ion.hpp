#pragma once

#include <map>
#include <string>
#include <vector>

#include "ccsim/noise.hpp"
#include "ccsim/tree.hpp"

namespace ccsim {

enum class ArchKind : uint8_t { AbaQusA, AbaQusS, AbaQusX };
enum class Scenario : uint8_t { Current, Intermediate, Optimistic };

const char* to_string(ArchKind k);
const char* to_string(Scenario s);
ArchKind arch_from_string(const std::string& s);
Scenario scenario_from_string(const std::string& s);

enum class ZoneRole : uint8_t { Working, Idle, Detection, Interface };

struct Zone {
  int id;
  ZoneRole role;
  int capacity;  // qubit ions
};

struct Architecture {
  ArchKind kind;
  std::vector<Zone> zones;
  std::vector<std::pair<int, int>> edges;  // zone adjacency
  std::vector<int> junction_hubs;          // zones acting as crossing points
  /// Chain-order neighbours for addressed-beam crosstalk (AbaQusA only).
  std::vector<std::vector<int>> chain_order;  // per working zone, ion ids in order
};

Architecture make_architecture(ArchKind kind);

enum class PrimKind : uint8_t {
  Gate1q,
  Gate2q,
  Split,
  Merge,
  LinearShuttle,
  JunctionCross,
  Swap,
  Readout,
  Recool,
};

const char* to_string(PrimKind k);

struct PrimitiveOp {
  PrimKind kind;
  std::vector<int> ions;
  int zone = -1;
  int zone2 = -1;  // source well for transport, second well for merges
  double duration_us = 0;
  double coherent_excitation = 0;
  double thermal_excitation = 0;
};

struct TimingScenario {
  Scenario tag = Scenario::Current;
  std::map<PrimKind, double> duration_us;
  std::map<PrimKind, double> coherent;  // quanta per op
  double heating_rate = 0;              // quanta/s during transport ops
  double cooling_rate = 0;              // quanta/s
  double nbar0 = 0.01;
  double recool_after_readout_us = 0;   // AbaQus-A folds cooling into readout
};

/// Loads the scenario tables (Tables IV-V) for an architecture; values ship
/// as data files under data/ and are embedded as defaults.
TimingScenario load_scenario(ArchKind arch, Scenario tag);

/// Gate/readout/reset error rates (Table VI) for an architecture/scenario.
MultiChannelParams load_noise_rates(ArchKind arch, Scenario tag, double t2_s);

/// Re-cooling time to reach nbar0: log(nbar/nbar0) / W_c; zero when already
/// at or below the target.
double cooling_time(double nbar, double nbar0, double cooling_rate);

/// Total excitation of an op sequence: coherent parts plus heating rate
/// times duration.
double accumulate_excitation(const std::vector<PrimitiveOp>& ops, const TimingScenario& sc);

struct ScheduleStep {
  std::vector<PrimitiveOp> ops;  // parallel across zones
  double duration_us = 0;        // max over ops
  Bits gated = 0;                // qubit ions covered by a gate/readout this step
};

struct Schedule {
  std::vector<ScheduleStep> steps;
  double total_us = 0;
  double gate_us = 0, transport_us = 0, recool_us = 0;
  std::vector<double> idle_us;  // per qubit ion, uncovered wall time
  // Per circuit layer, the idle seconds of every ion during that layer.
  std::vector<std::pair<int, std::vector<double>>> layer_idle_us;
  int swap_count = 0, transport_ops = 0;

  std::string to_csv() const;
};

struct ScheduleAudit {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Post-hoc legality: zone capacities, one crossing at a time per junction,
/// merges of exactly two wells, recool before gates on hot crystals.
ScheduleAudit audit_schedule(const Schedule& schedule, const Architecture& arch,
                             const TimingScenario& sc);

/// Lowers every node of the tree onto the architecture; returns per-node
/// schedules aligned with tree.nodes.
std::vector<Schedule> transpile(const ProtocolTree& tree, const Architecture& arch,
                                const TimingScenario& sc);

/// The tree with idle durations resolved from the schedules and the
/// multi-channel noise attached.
ProtocolTree lower_to_noisy_circuit(const ProtocolTree& tree, const Architecture& arch,
                                    const TimingScenario& sc, const MultiChannelParams& params);

}  // namespace ccsim
