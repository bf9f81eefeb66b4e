#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "ccsim/ion.hpp"

namespace ccsim {

namespace {

struct LayerOps {
  int layer;
  std::vector<const Instruction*> gates2;  // two-qubit gates
  std::vector<const Instruction*> gates1;
  std::vector<const Instruction*> measures;
  std::vector<const Instruction*> resets;
};

std::vector<LayerOps> split_layers(const Circuit& c) {
  std::map<int, LayerOps> by_layer;
  for (const auto& ins : c.instrs) {
    LayerOps& lo = by_layer[ins.layer];
    lo.layer = ins.layer;
    switch (ins.kind) {
      case InstrKind::GATE:
        if (gate_is_two_qubit(ins.gate))
          lo.gates2.push_back(&ins);
        else if (ins.gate != GateKind::I)
          lo.gates1.push_back(&ins);
        break;
      case InstrKind::MEASURE: lo.measures.push_back(&ins); break;
      case InstrKind::RESET: lo.resets.push_back(&ins); break;
      default: break;
    }
  }
  std::vector<LayerOps> out;
  for (auto& [l, lo] : by_layer)
    if (!lo.gates2.empty() || !lo.gates1.empty() || !lo.measures.empty() || !lo.resets.empty())
      out.push_back(std::move(lo));
  return out;
}

// ---------------------------------------------------------------------------
// Integrated architectures: swap-based routing on the zone graph with
// synchronous steps.

class IntegratedRouter {
 public:
  IntegratedRouter(const Architecture& arch, const TimingScenario& sc, int n_ions)
      : arch_(arch), sc_(sc), nbar_(n_ions, sc.nbar0), pos_(n_ions, -1) {
    occupants_.resize(arch.zones.size());
    adj_.resize(arch.zones.size());
    for (auto [a, b] : arch.edges) {
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (auto& v : adj_) std::sort(v.begin(), v.end());
    hub_.assign(arch.zones.size(), false);
    for (int h : arch.junction_hubs) hub_[h] = true;
  }

  void place(int ion, int zone) {
    pos_[ion] = zone;
    occupants_[zone].push_back(ion);
  }
  int position(int ion) const { return pos_[ion]; }

  // Runs one circuit layer; appends steps to `sched` and the per-ion idle
  // seconds of this layer to `idle_out`.
  void run_layer(const LayerOps& lo, Schedule& sched, std::vector<double>& idle_out) {
    size_t first_step = sched.steps.size();
    transport_floor_ = first_step;

    // Transport phase: bring each two-qubit pair into one working zone and
    // singles into any working zone.
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> singles;
    for (auto* g : lo.gates2) pairs.push_back({g->q0, g->q1});
    for (auto* g : lo.gates1) singles.push_back(g->q0);
    for (auto* m : lo.measures) singles.push_back(m->q0);
    for (auto* r : lo.resets) singles.push_back(r->q0);
    std::sort(pairs.begin(), pairs.end());
    std::sort(singles.begin(), singles.end());
    singles.erase(std::unique(singles.begin(), singles.end()), singles.end());

    // Waves: a pair claims a working zone exclusively, singles may share a
    // zone up to its capacity; overflow rolls into further transport+op
    // rounds below (rare for these circuits).
    int n_working = 0;
    for (const auto& z : arch_.zones) n_working += z.role == ZoneRole::Working;
    size_t pair_cap = (size_t)n_working;
    size_t single_cap = (size_t)n_working * 2;
    if (pairs.size() > pair_cap || singles.size() > single_cap) {
      // Split into two half-layers processed recursively.
      LayerOps first = lo, second = lo;
      first.gates2.assign(lo.gates2.begin(),
                          lo.gates2.begin() + std::min(lo.gates2.size(), pair_cap));
      second.gates2.assign(lo.gates2.begin() + (long)first.gates2.size(), lo.gates2.end());
      size_t scut = std::min(lo.gates1.size(), single_cap);
      first.gates1.assign(lo.gates1.begin(), lo.gates1.begin() + scut);
      second.gates1.assign(lo.gates1.begin() + scut, lo.gates1.end());
      size_t mcut = std::min(lo.measures.size(), single_cap);
      first.measures.assign(lo.measures.begin(), lo.measures.begin() + mcut);
      second.measures.assign(lo.measures.begin() + mcut, lo.measures.end());
      size_t rcut = std::min(lo.resets.size(), single_cap);
      first.resets.assign(lo.resets.begin(), lo.resets.begin() + rcut);
      second.resets.assign(lo.resets.begin() + rcut, lo.resets.end());
      run_layer(first, sched, idle_out);
      run_layer(second, sched, idle_out);
      return;
    }

    std::set<int> reserved;            // zones claimed by pairs
    std::map<int, int> single_load;    // zone -> singles assigned
    for (auto& [a, b] : pairs) {
      int w = pick_working_zone({a, b}, reserved);
      reserved.insert(w);
      evacuate(w, {a, b}, sched);
      route(a, w, sched);
      route(b, w, sched);
    }
    for (int q : singles) {
      int here = pos_[q];
      if (arch_.zones[here].role == ZoneRole::Working && !reserved.count(here) &&
          single_load[here] < arch_.zones[here].capacity) {
        single_load[here]++;
        continue;
      }
      int w = -1, best_d = 1 << 30;
      for (const auto& z : arch_.zones) {
        if (z.role != ZoneRole::Working || reserved.count(z.id)) continue;
        if (single_load[z.id] >= z.capacity) continue;
        int d = (int)bfs_path(here, z.id).size();
        if (d < best_d || (d == best_d && z.id < w)) {
          best_d = d;
          w = z.id;
        }
      }
      if (w < 0) throw std::runtime_error("no free working zone");
      single_load[w]++;
      if ((int)occupants_[w].size() >= arch_.zones[w].capacity) evacuate(w, {q}, sched);
      route(q, w, sched);
    }

    // Recool phase: crystals about to be driven must sit near the ground
    // state.
    ScheduleStep recool;
    double worst = 0;
    std::set<int> zones_cooled;
    auto need_cool = [&](int ion) {
      if (nbar_[ion] <= sc_.nbar0 + 1e-12) return;
      int z = pos_[ion];
      if (zones_cooled.count(z)) return;
      zones_cooled.insert(z);
      double t_us = cooling_time(crystal_nbar(z), sc_.nbar0, sc_.cooling_rate) * 1e6;
      PrimitiveOp op;
      op.kind = PrimKind::Recool;
      op.zone = z;
      op.ions = occupants_[z];
      op.duration_us = t_us;
      worst = std::max(worst, t_us);
      recool.ops.push_back(op);
      for (int i : occupants_[z]) nbar_[i] = sc_.nbar0;
    };
    for (auto& [a, b] : pairs) {
      need_cool(a);
      need_cool(b);
    }
    for (int q : singles) need_cool(q);
    if (!recool.ops.empty()) {
      recool.duration_us = worst;
      sched.recool_us += worst;
      sched.steps.push_back(std::move(recool));
    }

    // Operation phases, one step per op family (every working zone performs
    // the same operation simultaneously).
    auto op_step = [&](PrimKind kind, const std::vector<const Instruction*>& list) {
      if (list.empty()) return;
      ScheduleStep step;
      double dur = sc_.duration_us.at(kind);
      for (auto* ins : list) {
        PrimitiveOp op;
        op.kind = kind;
        op.zone = pos_[ins->q0];
        op.ions = ins->q1 >= 0 ? std::vector<int>{ins->q0, ins->q1} : std::vector<int>{ins->q0};
        op.duration_us = dur;
        op.coherent_excitation = sc_.coherent.count(kind) ? sc_.coherent.at(kind) : 0;
        for (int i : op.ions) step.gated |= Bits{1} << i;
        if (kind == PrimKind::Readout)
          for (int i : occupants_[op.zone]) nbar_[i] += op.coherent_excitation;
        step.ops.push_back(op);
      }
      step.duration_us = dur;
      sched.gate_us += dur;
      sched.steps.push_back(std::move(step));
    };
    op_step(PrimKind::Gate2q, lo.gates2);
    op_step(PrimKind::Gate1q, lo.gates1);
    op_step(PrimKind::Readout, lo.measures);
    op_step(PrimKind::Gate1q, lo.resets);  // optical pumping, gate-scale

    // Idle accounting: any step time not covered by the ion's own gate.
    for (size_t s = first_step; s < sched.steps.size(); s++) {
      const auto& st = sched.steps[s];
      for (size_t ion = 0; ion < idle_out.size(); ion++) {
        if (pos_[ion] < 0) continue;
        if (!(st.gated >> ion & 1)) idle_out[ion] += st.duration_us * 1e-6;
      }
    }
  }

 private:
  double crystal_nbar(int zone) const {
    double m = 0;
    for (int i : occupants_[zone]) m = std::max(m, nbar_[i]);
    return m;
  }

  // Cheapest path with congestion weights: entering a full zone costs a
  // swap (three primitives) instead of one shuttle.
  std::vector<int> bfs_path(int from, int to) const {
    size_t nz = arch_.zones.size();
    std::vector<int> prev(nz, -1), dist(nz, 1 << 28);
    dist[from] = 0;
    std::set<std::pair<int, int>> heap{{0, from}};
    while (!heap.empty()) {
      auto [d, z] = *heap.begin();
      heap.erase(heap.begin());
      if (z == to) break;
      for (int n2 : adj_[z]) {
        int w = hub_[n2] ? 1
                : (int)occupants_[n2].size() >= arch_.zones[n2].capacity ? 3
                                                                         : 1;
        if (dist[z] + w < dist[n2]) {
          heap.erase({dist[n2], n2});
          dist[n2] = dist[z] + w;
          prev[n2] = z;
          heap.insert({dist[n2], n2});
        }
      }
    }
    std::vector<int> path;
    for (int z = to; z != -1; z = prev[z]) path.push_back(z);
    std::reverse(path.begin(), path.end());
    return path;
  }

  int path_cost(int from, int to) const { return (int)bfs_path(from, to).size(); }

  int pick_working_zone(std::vector<int> ions, const std::set<int>& reserved) const {
    int best = -1, best_d = 1 << 30;
    for (const auto& z : arch_.zones) {
      if (z.role != ZoneRole::Working || reserved.count(z.id)) continue;
      int d = 0;
      for (int ion : ions) d += path_cost(pos_[ion], z.id);
      if (d < best_d || (d == best_d && z.id < best)) {
        best_d = d;
        best = z.id;
      }
    }
    if (best < 0) throw std::runtime_error("no free working zone");
    return best;
  }

  void evacuate(int zone, std::vector<int> keep, Schedule& sched) {
    auto keeps = [&](int ion) { return std::find(keep.begin(), keep.end(), ion) != keep.end(); };
    std::vector<int> movers;
    for (int ion : occupants_[zone])
      if (!keeps(ion)) movers.push_back(ion);
    int needed = (int)keep.size();
    int cap = arch_.zones[zone].capacity;
    int excess = (int)occupants_[zone].size() + needed -
                 (int)std::count_if(occupants_[zone].begin(), occupants_[zone].end(), keeps) - cap;
    for (int ion : movers) {
      if (excess <= 0) break;
      int target = nearest_idle_slot(zone);
      route(ion, target, sched);
      excess--;
    }
  }

  int nearest_idle_slot(int from) const {
    int best = -1, best_d = 1 << 30;
    for (const auto& z : arch_.zones) {
      if (z.role != ZoneRole::Idle) continue;
      if ((int)occupants_[z.id].size() >= z.capacity) continue;
      int d = (int)bfs_path(from, z.id).size();
      if (d < best_d || (d == best_d && z.id < best)) {
        best_d = d;
        best = z.id;
      }
    }
    if (best < 0) throw std::runtime_error("no idle slot available");
    return best;
  }

  void move_record(int ion, int to) {
    auto& occ = occupants_[pos_[ion]];
    occ.erase(std::find(occ.begin(), occ.end(), ion));
    pos_[ion] = to;
    occupants_[to].push_back(ion);
  }

  void emit(Schedule& sched, PrimitiveOp op, bool transport) {
    for (int i : op.ions)
      nbar_[i] += op.coherent_excitation + sc_.heating_rate * op.duration_us * 1e-6;
    if (transport) sched.transport_ops++;
    // Transport ops across disjoint zones run in parallel: join the latest
    // step this op's zones and ions do not conflict with, provided no later
    // step conflicts (which would reorder this ion's itinerary).
    auto zones_of = [](const PrimitiveOp& o) {
      std::set<int> zs{o.zone};
      if (o.zone2 >= 0) zs.insert(o.zone2);
      return zs;
    };
    auto conflicts = [&](const ScheduleStep& st) {
      auto mine = zones_of(op);
      for (const auto& other : st.ops) {
        for (int z : zones_of(other))
          if (mine.count(z)) return true;
        for (int i : other.ions)
          if (std::find(op.ions.begin(), op.ions.end(), i) != op.ions.end()) return true;
      }
      return false;
    };
    int target = -1;
    for (int s = (int)sched.steps.size() - 1; s >= 0 && s >= (int)transport_floor_; s--) {
      if (conflicts(sched.steps[s])) break;
      target = s;
    }
    if (target < 0) {
      ScheduleStep step;
      step.duration_us = op.duration_us;
      if (transport) sched.transport_us += step.duration_us;
      step.ops.push_back(std::move(op));
      sched.steps.push_back(std::move(step));
    } else {
      ScheduleStep& st = sched.steps[target];
      if (op.duration_us > st.duration_us) {
        if (transport) sched.transport_us += op.duration_us - st.duration_us;
        st.duration_us = op.duration_us;
      }
      st.ops.push_back(std::move(op));
    }
  }

  void route(int ion, int target, Schedule& sched) {
    while (pos_[ion] != target) {
      auto path = bfs_path(pos_[ion], target);
      if (path.size() < 2) throw std::runtime_error("no route between zones");
      int next = path[1];
      if (hub_[next]) {
        // Cross the junction in one primitive; land on the following zone.
        if (path.size() < 3) throw std::runtime_error("route ends on a junction hub");
        int land = path[2];
        if ((int)occupants_[land].size() < arch_.zones[land].capacity) {
          PrimitiveOp op;
          op.kind = PrimKind::JunctionCross;
          op.zone = next;
          op.zone2 = pos_[ion];
          op.ions = {ion};
          op.duration_us = sc_.duration_us.at(PrimKind::JunctionCross);
          op.coherent_excitation = sc_.coherent.count(PrimKind::JunctionCross)
                                       ? sc_.coherent.at(PrimKind::JunctionCross)
                                       : 0;
          emit(sched, op, true);
          move_record(ion, land);
          continue;
        }
        // Landing zone full: swap with its lowest-id occupant through the hub.
        int other = *std::min_element(occupants_[land].begin(), occupants_[land].end());
        swap_ions(ion, other, sched, next);
        continue;
      }
      if ((int)occupants_[next].size() < arch_.zones[next].capacity) {
        PrimitiveOp op;
        op.kind = PrimKind::LinearShuttle;
        op.zone = next;
        op.zone2 = pos_[ion];
        op.ions = {ion};
        op.duration_us = sc_.duration_us.at(PrimKind::LinearShuttle);
        op.coherent_excitation =
            sc_.coherent.count(PrimKind::LinearShuttle) ? sc_.coherent.at(PrimKind::LinearShuttle) : 0;
        emit(sched, op, true);
        move_record(ion, next);
        continue;
      }
      int other = *std::min_element(occupants_[next].begin(), occupants_[next].end());
      swap_ions(ion, other, sched, -1);
    }
  }

  // Physical exchange: merge the two wells, rotate, split.
  void swap_ions(int a, int b, Schedule& sched, int via_hub) {
    int za = pos_[a], zb = pos_[b];
    auto prim = [&](PrimKind k) {
      PrimitiveOp op;
      op.kind = k;
      op.zone = via_hub >= 0 ? via_hub : zb;
      op.zone2 = za;
      op.ions = {a, b};
      op.duration_us = sc_.duration_us.at(k);
      op.coherent_excitation = sc_.coherent.count(k) ? sc_.coherent.at(k) : 0;
      emit(sched, op, true);
    };
    prim(PrimKind::Merge);
    prim(PrimKind::Swap);
    prim(PrimKind::Split);
    sched.swap_count++;
    move_record(a, zb);
    move_record(b, za);
  }

  const Architecture& arch_;
  const TimingScenario& sc_;
  std::vector<double> nbar_;
  std::vector<int> pos_;
  std::vector<std::vector<int>> occupants_;
  std::vector<std::vector<int>> adj_;
  std::vector<bool> hub_;
  size_t transport_floor_ = 0;
};

// ---------------------------------------------------------------------------
// AbaQus-A: two static chains with all-to-all addressing, sequential gates
// within a chain, ancilla excursions to the detection zones for readout.

class ChainScheduler {
 public:
  ChainScheduler(const TimingScenario& sc, const std::vector<int>& chain1,
                 const std::vector<int>& chain2, const std::vector<int>& surgery, int n_ions)
      : sc_(sc), n_ions_(n_ions) {
    chain_of_.assign(n_ions, -1);
    for (int i : chain1) chain_of_[i] = 0;
    for (int i : chain2) chain_of_[i] = 1;
    for (int i : surgery) chain_of_[i] = 2;  // interface residents
  }

  void run_layer(const LayerOps& lo, Schedule& sched, std::vector<double>& idle_out) {
    size_t first_step = sched.steps.size();
    // Gates execute sequentially within a chain; the two chains proceed in
    // parallel, so the layer time is the longer chain program.
    std::vector<std::vector<const Instruction*>> lane(3);
    for (auto* g : lo.gates2) lane[lane_of(g)].push_back(g);
    for (auto* g : lo.gates1) lane[lane_of(g)].push_back(g);
    size_t rounds = std::max(lane[0].size(), std::max(lane[1].size(), lane[2].size()));
    for (size_t r = 0; r < rounds; r++) {
      ScheduleStep step;
      double dur = 0;
      for (int c = 0; c < 3; c++) {
        if (r >= lane[c].size()) continue;
        const Instruction* ins = lane[c][r];
        PrimitiveOp op;
        op.kind = gate_is_two_qubit(ins->gate) ? PrimKind::Gate2q : PrimKind::Gate1q;
        op.zone = c == 0 ? 1 : c == 1 ? 3 : 2;
        op.ions = ins->q1 >= 0 ? std::vector<int>{ins->q0, ins->q1} : std::vector<int>{ins->q0};
        op.duration_us = sc_.duration_us.at(op.kind);
        for (int i : op.ions) step.gated |= Bits{1} << i;
        dur = std::max(dur, op.duration_us);
        step.ops.push_back(op);
      }
      if (step.ops.empty()) continue;
      step.duration_us = dur;
      sched.gate_us += dur;
      sched.steps.push_back(std::move(step));
    }

    // Resets: in-place optical pumping, one parallel step.
    if (!lo.resets.empty()) {
      ScheduleStep step;
      double dur = sc_.duration_us.at(PrimKind::Gate1q);
      for (auto* ins : lo.resets) {
        PrimitiveOp op;
        op.kind = PrimKind::Gate1q;
        op.zone = zone_of(ins->q0);
        op.ions = {ins->q0};
        op.duration_us = dur;
        step.gated |= Bits{1} << ins->q0;
        step.ops.push_back(op);
      }
      step.duration_us = dur;
      sched.gate_us += dur;
      sched.steps.push_back(std::move(step));
    }

    // Measurement excursion: split the measured sub-chains, shuttle to the
    // detection zones, read out (cooling folded into the readout time),
    // return and re-merge. Both chains operate in parallel.
    if (!lo.measures.empty()) {
      std::vector<std::vector<int>> meas(3);
      for (auto* m : lo.measures) meas[chain_of_[m->q0]].push_back(m->q0);
      auto emit_phase = [&](PrimKind kind, double dur, bool transport, double extra = 0) {
        ScheduleStep step;
        for (int c = 0; c < 3; c++) {
          if (meas[c].empty()) continue;
          PrimitiveOp op;
          op.kind = kind;
          op.zone = c == 0 ? 0 : c == 1 ? 4 : 2;
          op.ions = meas[c];
          op.duration_us = dur + extra;
          if (kind == PrimKind::Readout)
            for (int i : meas[c]) step.gated |= Bits{1} << i;
          step.ops.push_back(op);
        }
        if (step.ops.empty()) return;
        step.duration_us = dur + extra;
        if (transport)
          sched.transport_us += step.duration_us;
        else if (kind == PrimKind::Readout)
          sched.recool_us += extra, sched.gate_us += dur;
        if (transport) sched.transport_ops += (int)step.ops.size();
        sched.steps.push_back(std::move(step));
      };
      bool chain_meas = !meas[0].empty() || !meas[1].empty();
      if (chain_meas) emit_phase(PrimKind::Split, sc_.duration_us.at(PrimKind::Split), true);
      emit_phase(PrimKind::LinearShuttle, sc_.duration_us.at(PrimKind::LinearShuttle), true);
      emit_phase(PrimKind::Readout, sc_.duration_us.at(PrimKind::Readout), false,
                 sc_.recool_after_readout_us);
      emit_phase(PrimKind::LinearShuttle, sc_.duration_us.at(PrimKind::LinearShuttle), true);
      if (chain_meas) emit_phase(PrimKind::Merge, sc_.duration_us.at(PrimKind::Merge), true);
    }

    for (size_t s = first_step; s < sched.steps.size(); s++) {
      const auto& st = sched.steps[s];
      for (int ion = 0; ion < n_ions_; ion++) {
        if (chain_of_[ion] < 0) continue;
        if (!(st.gated >> ion & 1)) idle_out[ion] += st.duration_us * 1e-6;
      }
    }
  }

 private:
  int lane_of(const Instruction* ins) const {
    // Surgery-ancilla gates run in the chain that hosts the data operand.
    int a = chain_of_[ins->q0];
    int b = ins->q1 >= 0 ? chain_of_[ins->q1] : a;
    if (a >= 0 && a <= 1) return a;
    if (b >= 0 && b <= 1) return b;
    return 2;
  }
  int zone_of(int ion) const {
    int c = chain_of_[ion];
    return c == 0 ? 1 : c == 1 ? 3 : 2;
  }
  const TimingScenario& sc_;
  int n_ions_;
  std::vector<int> chain_of_;
};

// Surgery-ancilla excursions for AbaQus-A: the itinerary cost of moving the
// surgery ions between the interface and the working zones is charged as
// transport steps bracketing the layers that use them.
void charge_surgery_trips(const ProtocolTree& tree, int node, Schedule& sched,
                          const TimingScenario& sc, const std::vector<int>& surgery,
                          std::vector<double>& idle_layer_total) {
  // One merge+shuttle out and shuttle+merge back per block visited.
  std::set<int> blocks;
  for (const auto& ins : tree.nodes[node].circuit.instrs) {
    if (ins.kind != InstrKind::GATE || ins.q1 < 0) continue;
    bool surg = std::find(surgery.begin(), surgery.end(), ins.q0) != surgery.end() ||
                std::find(surgery.begin(), surgery.end(), ins.q1) != surgery.end();
    if (!surg) continue;
    int data = std::find(surgery.begin(), surgery.end(), ins.q0) != surgery.end() ? ins.q1 : ins.q0;
    blocks.insert(data >= 7 && data < 14 ? 1 : 0);
  }
  if (blocks.empty()) return;
  double trip = 2 * (sc.duration_us.at(PrimKind::LinearShuttle) +
                     sc.duration_us.at(PrimKind::Merge));
  double total = trip * (double)blocks.size();
  ScheduleStep step;
  PrimitiveOp op;
  op.kind = PrimKind::LinearShuttle;
  op.zone = 2;
  op.ions = surgery;
  op.duration_us = total;
  step.ops.push_back(op);
  step.duration_us = total;
  sched.transport_us += total;
  sched.transport_ops += 2 * (int)blocks.size();
  sched.steps.push_back(std::move(step));
  for (double& v : idle_layer_total) v += total * 1e-6;
}

}  // namespace

std::vector<Schedule> transpile(const ProtocolTree& tree, const Architecture& arch,
                                const TimingScenario& sc) {
  int n = tree.n_qubits;
  std::vector<Schedule> out(tree.nodes.size());

  if (arch.kind == ArchKind::AbaQusA) {
    // Chains: each block's data plus its half of the ancillas.
    std::vector<int> chain1, chain2;
    for (int q : tree.meta.data_qubits) (q < 7 ? chain1 : chain2).push_back(q);
    auto half = [&](const std::vector<int>& v, std::vector<int>& lo, std::vector<int>& hi) {
      for (size_t i = 0; i < v.size(); i++) (i < v.size() / 2 ? lo : hi).push_back(v[i]);
    };
    half(tree.meta.syndrome_qubits, chain1, chain2);
    half(tree.meta.flag_qubits, chain1, chain2);
    for (size_t ni = 0; ni < tree.nodes.size(); ni++) {
      Schedule& sched = out[ni];
      sched.idle_us.assign(n, 0);
      ChainScheduler cs(sc, chain1, chain2, tree.meta.surgery_qubits, n);
      auto layers = split_layers(tree.nodes[ni].circuit);
      for (const auto& lo : layers) {
        size_t before = sched.steps.size();
        std::vector<double> idle(n, 0);
        cs.run_layer(lo, sched, idle);
        (void)before;
        sched.layer_idle_us.push_back({lo.layer, idle});
        for (int q = 0; q < n; q++) sched.idle_us[q] += idle[q];
      }
      charge_surgery_trips(tree, (int)ni, sched, sc, tree.meta.surgery_qubits, sched.idle_us);
      for (const auto& st : sched.steps) sched.total_us += st.duration_us;
    }
    return out;
  }

  // Integrated architectures: positions persist down the tree; each node
  // starts from its parent's exit layout.
  CompiledTree ct = compile_tree(tree);
  std::vector<IntegratedRouter> entry;  // one router state per node
  entry.reserve(tree.nodes.size());

  std::vector<int> home(n, -1);
  {
    // Placement tuned for one-hop gate routing: syndrome ancillas parked in
    // the working zones, data and flag ions in the adjacent idle zones;
    // block 1 on the left/first junction, block 2 opposite, surgery ions by
    // the interface.
    std::vector<int> d1, d2, s1, s2, f1, f2;
    for (int q : tree.meta.data_qubits) (q < 7 ? d1 : d2).push_back(q);
    auto halveto = [&](const std::vector<int>& v, std::vector<int>& lo, std::vector<int>& hi) {
      for (size_t i = 0; i < v.size(); i++) (i < v.size() / 2 ? lo : hi).push_back(v[i]);
    };
    halveto(tree.meta.syndrome_qubits, s1, s2);
    halveto(tree.meta.flag_qubits, f1, f2);
    std::map<int, int> used;
    auto fill = [&](const std::vector<int>& ions, std::vector<int> zones) {
      size_t zi = 0;
      for (int ion : ions) {
        while (used[zones[zi]] >= arch.zones[zones[zi]].capacity)
          zi = (zi + 1) % zones.size();
        home[ion] = zones[zi];
        used[zones[zi]]++;
        zi = (zi + 1) % zones.size();
      }
    };
    if (arch.kind == ArchKind::AbaQusS) {
      fill(s1, {1, 3, 5});
      fill(s2, {8, 10, 12});
      fill(f1, {0, 2, 4});
      fill(f2, {9, 11, 13});
      fill(d1, {0, 2, 4, 6});
      fill(d2, {9, 11, 13, 7});
      fill(tree.meta.surgery_qubits, {6, 7});
    } else {
      // Junction arms: inner zones {0,3,6,9} (+12) are the working ones.
      fill(s1, {0, 3, 6});
      fill(s2, {12, 15, 18});
      fill(f1, {1, 4, 7});
      fill(f2, {13, 16, 19});
      fill(d1, {1, 4, 7, 10});
      fill(d2, {13, 16, 19, 22});
      fill(tree.meta.surgery_qubits, {2, 14});
    }
  }

  // Walk nodes parent-first, carrying router state by value.
  std::vector<IntegratedRouter> states;
  states.reserve(tree.nodes.size());
  for (size_t ni = 0; ni < tree.nodes.size(); ni++) {
    int parent = ct.nodes[ni].parent;
    IntegratedRouter router = parent >= 0 ? states[parent] : [&] {
      IntegratedRouter r(arch, sc, n);
      for (int q = 0; q < n; q++)
        if (home[q] >= 0) r.place(q, home[q]);
      return r;
    }();
    Schedule& sched = out[ni];
    sched.idle_us.assign(n, 0);
    auto layers = split_layers(tree.nodes[ni].circuit);
    for (const auto& lo : layers) {
      std::vector<double> idle(n, 0);
      router.run_layer(lo, sched, idle);
      sched.layer_idle_us.push_back({lo.layer, idle});
      for (int q = 0; q < n; q++) sched.idle_us[q] += idle[q];
    }
    for (const auto& st : sched.steps) sched.total_us += st.duration_us;
    states.push_back(std::move(router));
  }
  return out;
}

ProtocolTree lower_to_noisy_circuit(const ProtocolTree& tree, const Architecture& arch,
                                    const TimingScenario& sc,
                                    const MultiChannelParams& params) {
  std::vector<Schedule> schedules = transpile(tree, arch, sc);

  // Crosstalk neighbour map (AbaQus-A): adjacency in the stored chain order.
  NeighborMap neighbors = nullptr;
  if (arch.kind == ArchKind::AbaQusA && params.p_ct > 0) {
    std::vector<int> order1, order2;
    for (int q : tree.meta.data_qubits) (q < 7 ? order1 : order2).push_back(q);
    auto half = [&](const std::vector<int>& v) {
      for (size_t i = 0; i < v.size(); i++) (i < v.size() / 2 ? order1 : order2).push_back(v[i]);
    };
    half(tree.meta.syndrome_qubits);
    half(tree.meta.flag_qubits);
    auto nb = std::make_shared<std::map<int, std::vector<int>>>();
    auto chain_neighbors = [&](const std::vector<int>& chain) {
      for (size_t i = 0; i < chain.size(); i++) {
        std::vector<int> v;
        if (i > 0) v.push_back(chain[i - 1]);
        if (i + 1 < chain.size()) v.push_back(chain[i + 1]);
        (*nb)[chain[i]] = v;
      }
    };
    chain_neighbors(order1);
    chain_neighbors(order2);
    neighbors = [nb](int q) {
      auto it = nb->find(q);
      return it == nb->end() ? std::vector<int>{} : it->second;
    };
  }

  ProtocolTree lowered = tree;
  for (size_t ni = 0; ni < tree.nodes.size(); ni++) {
    const Circuit& src = tree.nodes[ni].circuit;
    const Schedule& sched = schedules[ni];
    std::map<int, const std::vector<double>*> idle_of_layer;
    for (const auto& [layer, idles] : sched.layer_idle_us) idle_of_layer[layer] = &idles;

    Circuit mid;
    mid.n_qubits = src.n_qubits;
    std::set<int> layers_done;
    for (const auto& ins : src.instrs) {
      if (ins.kind == InstrKind::IDLE) continue;  // replaced by resolved markers
      bool phys = ins.kind == InstrKind::GATE || ins.kind == InstrKind::MEASURE ||
                  ins.kind == InstrKind::RESET;
      if (phys && !layers_done.count(ins.layer)) {
        layers_done.insert(ins.layer);
        auto it = idle_of_layer.find(ins.layer);
        if (it != idle_of_layer.end()) {
          for (int q = 0; q < src.n_qubits; q++) {
            double t = (*it->second)[q];
            if (t <= 0) continue;
            Instruction idle;
            idle.kind = InstrKind::IDLE;
            idle.q0 = q;
            idle.duration_s = t;
            idle.layer = ins.layer;
            mid.instrs.push_back(idle);
          }
        }
      }
      mid.instrs.push_back(ins);
    }
    lowered.nodes[ni].circuit = multichannel_attach(mid, params, neighbors);
  }
  return lowered;
}

}  // namespace ccsim
