#include "ccsim/ion.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace ccsim {

using nlohmann::json;

const char* to_string(ArchKind k) {
  switch (k) {
    case ArchKind::AbaQusA: return "abaqus-a";
    case ArchKind::AbaQusS: return "abaqus-s";
    case ArchKind::AbaQusX: return "abaqus-x";
  }
  return "?";
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Current: return "current";
    case Scenario::Intermediate: return "intermediate";
    case Scenario::Optimistic: return "optimistic";
  }
  return "?";
}

ArchKind arch_from_string(const std::string& s) {
  if (s == "abaqus-a") return ArchKind::AbaQusA;
  if (s == "abaqus-s") return ArchKind::AbaQusS;
  if (s == "abaqus-x") return ArchKind::AbaQusX;
  throw std::invalid_argument("unknown architecture: " + s);
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "current") return Scenario::Current;
  if (s == "intermediate") return Scenario::Intermediate;
  if (s == "optimistic") return Scenario::Optimistic;
  throw std::invalid_argument("unknown scenario: " + s);
}

const char* to_string(PrimKind k) {
  switch (k) {
    case PrimKind::Gate1q: return "gate1q";
    case PrimKind::Gate2q: return "gate2q";
    case PrimKind::Split: return "split";
    case PrimKind::Merge: return "merge";
    case PrimKind::LinearShuttle: return "linear_shuttle";
    case PrimKind::JunctionCross: return "junction_cross";
    case PrimKind::Swap: return "swap";
    case PrimKind::Readout: return "readout";
    case PrimKind::Recool: return "recool";
  }
  return "?";
}

Architecture make_architecture(ArchKind kind) {
  Architecture a;
  a.kind = kind;
  auto link = [&](int x, int y) { a.edges.push_back({x, y}); };
  switch (kind) {
    case ArchKind::AbaQusA: {
      // Linear: detection, working(13), interface, working(13), detection.
      a.zones = {{0, ZoneRole::Detection, 13},
                 {1, ZoneRole::Working, 13},
                 {2, ZoneRole::Interface, 13},
                 {3, ZoneRole::Working, 13},
                 {4, ZoneRole::Detection, 13}};
      for (int z = 0; z + 1 < 5; z++) link(z, z + 1);
      break;
    }
    case ArchKind::AbaQusS: {
      // 14 linear zones; the central four (two working, two idle) double as
      // the surgery interface.
      for (int z = 0; z < 14; z++) {
        bool working = z == 1 || z == 3 || z == 5 || z == 8 || z == 10 || z == 12;
        a.zones.push_back({z, working ? ZoneRole::Working : ZoneRole::Idle, working ? 2 : 4});
      }
      for (int z = 0; z + 1 < 14; z++) link(z, z + 1);
      break;
    }
    case ArchKind::AbaQusX: {
      // Two X junctions of twelve zones (four arms of three, innermost
      // working), the facing arms bridged through the surgery interface.
      // Junction j: hub = 24+j (pure crossing point); arm k: zones
      // j*12 + k*3 + {0,1,2} from inner to outer.
      for (int j = 0; j < 2; j++) {
        for (int k = 0; k < 4; k++) {
          for (int r = 0; r < 3; r++) {
            int id = j * 12 + k * 3 + r;
            a.zones.push_back({id, r == 0 ? ZoneRole::Working : ZoneRole::Idle, r == 0 ? 2 : 4});
          }
        }
      }
      a.zones.push_back({24, ZoneRole::Interface, 2});
      a.zones.push_back({25, ZoneRole::Interface, 2});
      a.junction_hubs = {24, 25};
      for (int j = 0; j < 2; j++) {
        for (int k = 0; k < 4; k++) {
          int base = j * 12 + k * 3;
          link(24 + j, base);
          link(base, base + 1);
          link(base + 1, base + 2);
        }
      }
      // Bridge between the junctions' facing arms.
      link(2, 14);
      break;
    }
  }
  return a;
}

double cooling_time(double nbar, double nbar0, double cooling_rate) {
  if (nbar0 <= 0 || cooling_rate <= 0) throw std::invalid_argument("cooling parameters positive");
  if (nbar <= nbar0) return 0;
  return std::log(nbar / nbar0) / cooling_rate;
}

double accumulate_excitation(const std::vector<PrimitiveOp>& ops, const TimingScenario& sc) {
  double total = 0;
  for (const auto& op : ops)
    total += op.coherent_excitation + sc.heating_rate * op.duration_us * 1e-6;
  return total;
}

namespace {

TimingScenario builtin_scenario(ArchKind arch, Scenario tag) {
  TimingScenario sc;
  sc.tag = tag;
  int i = (int)tag;
  if (arch == ArchKind::AbaQusA) {
    static const double split[] = {300, 200, 100}, lin[] = {300, 200, 100},
                        gate[] = {300, 250, 150}, readout[] = {400, 300, 200},
                        recool[] = {2000, 1000, 500};
    sc.duration_us = {{PrimKind::Split, split[i]},       {PrimKind::Merge, split[i]},
                      {PrimKind::LinearShuttle, lin[i]}, {PrimKind::Gate1q, gate[i]},
                      {PrimKind::Gate2q, gate[i]},       {PrimKind::Readout, readout[i]},
                      {PrimKind::Swap, lin[i]},          {PrimKind::JunctionCross, lin[i]},
                      {PrimKind::Recool, recool[i]}};
    sc.recool_after_readout_us = recool[i];
    // Chain transport barely couples to the radial gate modes; excitation
    // bookkeeping is folded into the post-readout cooling for this trap.
    sc.heating_rate = 0;
    sc.cooling_rate = 1e4;
  } else {
    static const double dur[] = {300, 200, 100}, gate[] = {300, 200, 50},
                        readout[] = {250, 200, 150};
    static const double coh_split[] = {3, 1, 0.2}, coh_junc[] = {3, 1, 0.2},
                        coh_swap[] = {4, 2, 1}, coh_lin[] = {2, 0.5, 0.1};
    static const double heat[] = {1e3, 1e2, 1.0};
    static const double cool[] = {1e4, 3e4, 5e4};
    static const double readout_exc[] = {10, 5, 1};
    sc.duration_us = {{PrimKind::Split, dur[i]},         {PrimKind::Merge, dur[i]},
                      {PrimKind::JunctionCross, dur[i]}, {PrimKind::Swap, dur[i]},
                      {PrimKind::LinearShuttle, dur[i]}, {PrimKind::Gate1q, gate[i]},
                      {PrimKind::Gate2q, gate[i]},       {PrimKind::Readout, readout[i]}};
    sc.coherent = {{PrimKind::Split, coh_split[i]},
                   {PrimKind::Merge, coh_split[i]},
                   {PrimKind::JunctionCross, coh_junc[i]},
                   {PrimKind::Swap, coh_swap[i]},
                   {PrimKind::LinearShuttle, coh_lin[i]}};
    // Readout recoil enters as a lump, independent of duration.
    sc.coherent[PrimKind::Readout] = readout_exc[i];
    sc.heating_rate = heat[i];
    sc.cooling_rate = cool[i];
  }
  return sc;
}

MultiChannelParams builtin_rates(ArchKind arch, Scenario tag) {
  MultiChannelParams p;
  int i = (int)tag;
  if (arch == ArchKind::AbaQusA) {
    static const double p1q[] = {3.6e-3, 2e-3, 1e-3}, p2q[] = {2e-2, 1e-2, 5e-3},
                        pct[] = {2e-4, 1e-4, 5e-5}, pm[] = {2e-3, 1e-3, 5e-4},
                        pr[] = {7e-4, 5e-4, 2.5e-4};
    p.p_1q = p1q[i];
    p.p_2q = p2q[i];
    p.p_ct = pct[i];
    p.p_m = pm[i];
    p.p_r = pr[i];
  } else {
    static const double p1q[] = {4e-3, 2e-3, 5e-4}, p2q[] = {1.2e-2, 6e-3, 1e-3},
                        pm[] = {2.4e-4, 1.2e-4, 5e-5}, pr[] = {2.4e-4, 1.2e-4, 5e-5};
    p.p_1q = p1q[i];
    p.p_2q = p2q[i];
    p.p_ct = 0;  // integrated addressing lists no crosstalk
    p.p_m = pm[i];
    p.p_r = pr[i];
  }
  p.scenario = to_string(tag);
  return p;
}

json* load_data_file(const char* name, json& storage) {
  namespace fs = std::filesystem;
  fs::path path = fs::path(CCSIM_DATA_DIR) / name;
  if (!fs::exists(path)) return nullptr;
  std::ifstream in(path);
  storage = json::parse(in);
  return &storage;
}

}  // namespace

TimingScenario load_scenario(ArchKind arch, Scenario tag) {
  TimingScenario sc = builtin_scenario(arch, tag);
  json j;
  const char* file =
      arch == ArchKind::AbaQusA ? "timings_abaqus_a.json" : "timings_integrated.json";
  if (json* data = load_data_file(file, j)) {
    const json& row = data->at(to_string(tag));
    auto fill = [&](const char* key, std::map<PrimKind, double>& table) {
      if (!row.contains(key)) return;
      for (auto& [name, val] : row.at(key).items())
        for (int k = 0; k <= (int)PrimKind::Recool; k++)
          if (name == to_string((PrimKind)k)) table[(PrimKind)k] = val;
    };
    fill("duration_us", sc.duration_us);
    fill("coherent", sc.coherent);
    if (row.contains("heating_rate")) sc.heating_rate = row.at("heating_rate");
    if (row.contains("cooling_rate")) sc.cooling_rate = row.at("cooling_rate");
    if (row.contains("recool_after_readout_us"))
      sc.recool_after_readout_us = row.at("recool_after_readout_us");
  }
  return sc;
}

MultiChannelParams load_noise_rates(ArchKind arch, Scenario tag, double t2_s) {
  MultiChannelParams p = builtin_rates(arch, tag);
  json j;
  if (json* data = load_data_file("noise_rates.json", j)) {
    const json& row = data->at(to_string(arch)).at(to_string(tag));
    p.p_1q = row.at("p_1q");
    p.p_2q = row.at("p_2q");
    p.p_ct = row.value("p_ct", 0.0);
    p.p_m = row.at("p_m");
    p.p_r = row.at("p_r");
  }
  p.t2_s = t2_s;
  return p;
}

std::string Schedule::to_csv() const {
  std::ostringstream os;
  os << "step,kind,zone,ions,duration_us\n";
  for (size_t s = 0; s < steps.size(); s++) {
    for (const auto& op : steps[s].ops) {
      os << s << "," << to_string(op.kind) << "," << op.zone << ",";
      for (size_t i = 0; i < op.ions.size(); i++) os << (i ? ";" : "") << op.ions[i];
      os << "," << op.duration_us << "\n";
    }
  }
  return os.str();
}

ScheduleAudit audit_schedule(const Schedule& schedule, const Architecture& arch,
                             const TimingScenario& sc) {
  ScheduleAudit out;
  (void)sc;
  for (size_t s = 0; s < schedule.steps.size(); s++) {
    const auto& step = schedule.steps[s];
    std::map<int, int> hub_use;
    for (const auto& op : step.ops) {
      if (op.kind == PrimKind::JunctionCross) hub_use[op.zone]++;
      // Merges combine exactly two wells; only swaps are bounded to two
      // information ions.
      if (op.kind == PrimKind::Swap && op.ions.size() != 2) {
        out.ok = false;
        out.violations.push_back("step " + std::to_string(s) + ": swap arity != 2");
      }
      if (op.zone >= 0 && op.zone < (int)arch.zones.size()) {
        int cap = arch.zones[op.zone].capacity;
        if ((op.kind == PrimKind::Gate2q || op.kind == PrimKind::Merge) &&
            (int)op.ions.size() > std::max(cap, 2)) {
          out.ok = false;
          out.violations.push_back("step " + std::to_string(s) + ": zone " +
                                   std::to_string(op.zone) + " over capacity");
        }
      }
    }
    for (auto& [hub, n] : hub_use)
      if (n > 1) {
        out.ok = false;
        out.violations.push_back("step " + std::to_string(s) + ": junction " +
                                 std::to_string(hub) + " crossed " + std::to_string(n) +
                                 " times");
      }
  }
  return out;
}

}  // namespace ccsim
