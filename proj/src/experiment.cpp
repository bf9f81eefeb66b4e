#include "ccsim/experiment.hpp"

#include "ccsim/ion.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ccsim {

namespace {

int block_syndrome(const ColorCode& code, Bits err, const std::vector<int>& data) {
  Bits local = 0;
  for (size_t i = 0; i < data.size(); i++)
    if (err >> data[i] & 1) local |= Bits{1} << i;
  int s = 0;
  for (int p = 0; p < 3; p++) s = s << 1 | parity(code.plaquettes[p].support, local);
  return s;
}

const ColorCode& d3_code() {
  static ColorCode code = build_hex_color_code(3);
  return code;
}

}  // namespace

bool ideal_logical_error(const ProtocolTree& tree, const TerminalResult& res) {
  if (res.discarded) return false;
  const ColorCode& code = d3_code();
  const auto& data = tree.meta.dest_data;
  if (data.size() != 7) throw std::invalid_argument("gadget lacks a d=3 result block");

  // Pending flag contexts exported by the terminal (first raised wins).
  // A raised flag of an S^Z round marks a possible phase-hook pair; the
  // matching flag column decodes it, as the next QEC round would.
  int ctx_z = 0, ctx_x = 0;
  for (auto& [name, v] : res.outputs) {
    if (!v) continue;
    if (name.rfind("zctx2_", 0) == 0 && ctx_z == 0) ctx_z = name.back() - '0';
    if (name.rfind("xctx2_", 0) == 0 && ctx_x == 0) ctx_x = name.back() - '0';
  }

  auto decode_sector = [&](Bits part, int ctx) {
    int synd = block_syndrome(code, part, data);
    uint8_t corr = decode_lookup(reference_flag_table(), synd, ctx);
    Bits net = part;
    for (int i = 0; i < 7; i++)
      if (corr >> i & 1) net ^= Bits{1} << data[i];
    return net;
  };
  // CSS decoding: bit and phase flips are corrected independently; the
  // residual logical content is checked against the prepared state's
  // stabilizing observable.
  Bits net_x = decode_sector(res.frame.x, ctx_x);
  Bits net_z = decode_sector(res.frame.z, ctx_z);
  auto [obs_x, obs_z] = state_observable(tree.meta.state, data);
  return (parity(net_x, obs_z) ^ parity(net_z, obs_x)) != 0;
}

CertificateResult ft_certificate(const ProtocolTree& noisy_tree, int max_report) {
  CompiledTree ct = compile_tree(noisy_tree);
  DenseSimulator sim(ct, 1);
  CertificateResult out;
  for (size_t n = 0; n < noisy_tree.nodes.size(); n++) {
    const Circuit& circ = noisy_tree.nodes[n].circuit;
    for (size_t k = 0; k < circ.instrs.size(); k++) {
      const Instruction& ins = circ.instrs[k];
      ForcedFault ff;
      ff.node = (int)n;
      ff.instr = (int)k;
      auto consider = [&](const ForcedFault& f) {
        out.faults++;
        TerminalResult res = sim.run_shot(0, &f);
        if (res.discarded) {
          out.discarded++;
          return;
        }
        if (ideal_logical_error(noisy_tree, res)) {
          out.logical_errors++;
          if ((int)out.failing.size() < max_report) {
            out.failing.push_back(f);
            out.failing_frames.push_back(res.frame);
          }
        }
      };
      if (ins.kind == InstrKind::CHANNEL) {
        size_t letters = ins.channel == ChannelKind::DEPOL2   ? 15
                         : ins.channel == ChannelKind::DEPOL1 ? 3
                                                              : 1;
        for (size_t l = 0; l < letters; l++) {
          ff.letter = (int)l;
          consider(ff);
        }
      } else if (ins.kind == InstrKind::MEASURE && ins.p > 0) {
        ff.record_flip = true;
        consider(ff);
      } else if (ins.kind == InstrKind::RESET && ins.p > 0) {
        ff.letter = -1;
        consider(ff);
      }
    }
  }
  return out;
}

WilsonInterval wilson_interval(uint64_t failures, uint64_t trials, double z) {
  if (trials == 0) return {0, 1};
  double n = (double)trials, ph = (double)failures / n;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (ph + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ProtocolTree build_gadget(const std::string& name, CardinalState state, int rounds) {
  if (name == "prep_verified") return gen_prep_verified(state);
  if (name == "prep_stabilizer") return gen_prep_stabilizer(state);
  if (name == "memory_sequential") return gen_memory(ProtocolKind::Sequential, state, rounds);
  if (name == "memory_simultaneous") return gen_memory(ProtocolKind::Simultaneous, state, rounds);
  if (name == "memory_superdense") return gen_memory(ProtocolKind::Superdense, state, rounds);
  if (name == "teleport_ls") return gen_teleport_ls(state);
  if (name == "teleport_direct") return gen_teleport_direct(false, state);
  if (name == "teleport_direct_repeated") return gen_teleport_direct(true, state);
  if (name == "merge_only") return gen_merge_only(state);
  throw std::invalid_argument("unknown gadget: " + name);
}

namespace {

struct PointTally {
  uint64_t failures = 0;
  uint64_t discards = 0;
  std::map<int, uint64_t> branch;
};

PointTally run_point(const ProtocolTree& noisy, uint64_t seed, uint64_t shots) {
  CompiledTree ct = compile_tree(noisy);
  SparseSimulator sim(ct, seed);
  PointTally tally;
  RunStats stats = sim.run_visit(shots, [&](const TerminalResult& res) {
    if (res.discarded) {
      tally.discards++;
      return;
    }
    if (ideal_logical_error(noisy, res)) tally.failures++;
  });
  for (size_t i = 0; i < stats.shots_per_terminal.size(); i++)
    if (stats.shots_per_terminal[i]) tally.branch[(int)i] += stats.shots_per_terminal[i];
  return tally;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= (unsigned char)c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_string(const ExperimentConfig& c) {
  std::ostringstream os;
  os << c.gadget << '|' << c.state << '|' << c.rounds << '|' << c.noise << '|' << c.scenario
     << '|' << c.shots << '|' << c.shot_cap << '|' << c.min_failures << '|' << c.seed;
  for (double v : c.sweep) os << '|' << v;
  return os.str();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  if (config.shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (config.sweep.empty()) throw std::invalid_argument("sweep must be non-empty");
  if (!std::is_sorted(config.sweep.begin(), config.sweep.end()))
    throw std::invalid_argument("sweep must be sorted");
  CardinalState state = cardinal_from_string(config.state);
  ProtocolTree base = build_gadget(config.gadget, state, config.rounds);

  RunResult out;
  out.config = config;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                (unsigned long long)fnv1a(config_string(config)));
  out.config_hash = hash;

  for (double value : config.sweep) {
    ProtocolTree noisy;
    if (config.noise == "scem") {
      noisy = scem_attach(base, ScemParams{value});
    } else {
      // Architecture run: the sweep variable is the T2 time in seconds.
      ArchKind arch = arch_from_string(config.noise);
      Scenario tag = scenario_from_string(config.scenario);
      noisy = lower_to_noisy_circuit(base, make_architecture(arch), load_scenario(arch, tag),
                                     load_noise_rates(arch, tag, value));
    }
    SweepPoint pt;
    pt.value = value;
    auto t0 = std::chrono::steady_clock::now();
    uint64_t shots = config.shots;
    PointTally tally;
    uint64_t done = 0;
    uint64_t seed_step = 0;
    while (true) {
      ProtocolTree copy = noisy;
      PointTally t = run_point(copy, mix_key(config.seed, seed_step++), shots);
      tally.failures += t.failures;
      tally.discards += t.discards;
      for (auto& [k, v] : t.branch) tally.branch[k] += v;
      done += shots;
      bool enough = config.min_failures == 0 || tally.failures >= config.min_failures ||
                    done >= config.shot_cap || value == 0;
      if (enough) break;
      shots = std::min(shots * 2, config.shot_cap - done);
      if (shots == 0) break;
    }
    pt.shots = done;
    pt.failures = tally.failures;
    pt.discards = tally.discards;
    uint64_t kept = done - tally.discards;
    pt.p_logical = kept ? (double)tally.failures / (double)kept : 0.0;
    auto ci = wilson_interval(tally.failures, kept ? kept : 1);
    pt.ci = ci;
    pt.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& [node, count] : tally.branch)
      pt.branch_shots.push_back({base.nodes[node].name, count});
    out.points.push_back(std::move(pt));
  }
  return out;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  for (auto& [p, pl] : points)
    if (p > 0 && pl > 0) logs.push_back({std::log(p), std::log(pl)});
  if (logs.size() < 3) throw std::invalid_argument("fit_slope needs >= 3 nonzero points");
  double n = (double)logs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  SlopeFit fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.offset = (sy - fit.exponent * sx) / n;
  double ss = 0;
  for (auto& [x, y] : logs) {
    double r = y - (fit.offset + fit.exponent * x);
    ss += r * r;
  }
  double var = logs.size() > 2 ? ss / (n - 2) : 0;
  fit.stderr_ = std::sqrt(var * n / denom);
  return fit;
}

namespace {

uint64_t qubits_for_distance(ProtocolKind kind, int d) {
  // Teleportation context: two blocks plus surgery ancillas, following the
  // per-strategy ancilla scaling.
  uint64_t data = (uint64_t)((3 * d * d + 1) / 4);
  uint64_t plaq = (data - 1) / 2;
  switch (kind) {
    case ProtocolKind::Sequential: return 2 * (data + 2) + 2;
    case ProtocolKind::Simultaneous: return 2 * (data + 2 * plaq) + (uint64_t)(d - 1);
    case ProtocolKind::Superdense: return 2 * (data + 2 * plaq) + (uint64_t)(d - 1);
  }
  return 0;
}

}  // namespace

FootprintResult footprint(const std::vector<std::pair<int, double>>& pl_by_distance,
                          ProtocolKind kind, double p, double target_pl) {
  FootprintResult out;
  if (pl_by_distance.empty()) throw std::invalid_argument("footprint needs at least one point");
  std::vector<std::pair<int, double>> pts = pl_by_distance;
  std::sort(pts.begin(), pts.end());

  // Already met at the smallest simulated distance.
  if (pts.front().second <= target_pl) {
    out.distance = pts.front().first;
    out.qubits = qubits_for_distance(kind, out.distance);
    out.note = "target met at smallest simulated distance";
    return out;
  }
  // Above pseudo-threshold: growing the code does not help.
  if (pts.front().second >= p ||
      (pts.size() >= 2 && pts.back().second >= pts.front().second)) {
    out.finite = false;
    out.note = "no finite footprint (at or above pseudo-threshold)";
    return out;
  }
  if (pts.size() < 2) throw std::invalid_argument("extrapolation needs two distances");

  // Fit log p_L = log A + ((d+1)/2) log(p/p_th).
  double n = (double)pts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [d, pl] : pts) {
    double x = (d + 1) / 2.0, y = std::log(pl);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double off = (sy - slope * sx) / n;
  if (slope >= 0) {
    out.finite = false;
    out.note = "no finite footprint (p_L not decreasing with distance)";
    return out;
  }
  for (int d = pts.front().first;; d += 2) {
    double pl = std::exp(off + slope * (d + 1) / 2.0);
    if (pl <= target_pl) {
      out.distance = d;
      out.qubits = qubits_for_distance(kind, d);
      out.extrapolated = d > pts.back().first;
      if (out.extrapolated) out.note = "extrapolated beyond simulated d";
      return out;
    }
    if (d > 101) {
      out.finite = false;
      out.note = "no finite footprint within d <= 101";
      return out;
    }
  }
}

std::string emit_csv(const RunResult& result) {
  std::ostringstream os;
  os << "# config_hash=" << result.config_hash << " seed=" << result.config.seed << "\n";
  os << "value,shots,failures,discards,p_logical,ci_lo,ci_hi,wall_seconds\n";
  char buf[256];
  for (const auto& pt : result.points) {
    std::snprintf(buf, sizeof buf, "%.9g,%llu,%llu,%llu,%.9g,%.9g,%.9g,%.3f\n", pt.value,
                  (unsigned long long)pt.shots, (unsigned long long)pt.failures,
                  (unsigned long long)pt.discards, pt.p_logical, pt.ci.lo, pt.ci.hi,
                  pt.wall_seconds);
    os << buf;
  }
  return os.str();
}

std::string emit_json(const RunResult& result) {
  std::ostringstream os;
  os << "{\n \"config_hash\": \"" << result.config_hash << "\",\n \"seed\": "
     << result.config.seed << ",\n \"points\": [\n";
  char buf[256];
  for (size_t i = 0; i < result.points.size(); i++) {
    const auto& pt = result.points[i];
    std::snprintf(buf, sizeof buf,
                  "  {\"value\": %.9g, \"shots\": %llu, \"failures\": %llu, \"discards\": %llu, "
                  "\"p_logical\": %.9g, \"ci\": [%.9g, %.9g]}%s\n",
                  pt.value, (unsigned long long)pt.shots, (unsigned long long)pt.failures,
                  (unsigned long long)pt.discards, pt.p_logical, pt.ci.lo, pt.ci.hi,
                  i + 1 < result.points.size() ? "," : "");
    os << buf;
  }
  os << " ]\n}\n";
  return os.str();
}

RunResult parse_csv(const std::string& text) {
  RunResult out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') {
      auto pos = line.find("config_hash=");
      if (pos != std::string::npos) out.config_hash = line.substr(pos + 12, 16);
      continue;
    }
    if (line.rfind("value,", 0) == 0) continue;
    SweepPoint pt;
    unsigned long long shots, fails, disc;
    double lo, hi;
    if (std::sscanf(line.c_str(), "%lg,%llu,%llu,%llu,%lg,%lg,%lg,%lg", &pt.value, &shots,
                    &fails, &disc, &pt.p_logical, &lo, &hi, &pt.wall_seconds) >= 7) {
      pt.shots = shots;
      pt.failures = fails;
      pt.discards = disc;
      pt.ci = {lo, hi};
      out.points.push_back(pt);
    }
  }
  return out;
}

}  // namespace ccsim
