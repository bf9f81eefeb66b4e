#include <algorithm>

#include "ccsim/decoder.hpp"
#include "ccsim/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccsim {

namespace {

// Ascending shot ids as a union of half-open intervals.
struct ShotSet {
  std::vector<std::pair<uint64_t, uint64_t>> iv;
  uint64_t total = 0;

  static ShotSet range(uint64_t lo, uint64_t hi) {
    ShotSet s;
    if (hi > lo) {
      s.iv.push_back({lo, hi});
      s.total = hi - lo;
    }
    return s;
  }

  uint64_t nth(uint64_t k) const {  // k-th smallest member
    for (const auto& [lo, hi] : iv) {
      uint64_t len = hi - lo;
      if (k < len) return lo + k;
      k -= len;
    }
    throw std::logic_error("nth out of range");
  }

  // Removes the given ascending ids (all must be members).
  void subtract(const std::vector<uint64_t>& ids) {
    if (ids.empty()) return;
    std::vector<std::pair<uint64_t, uint64_t>> out;
    out.reserve(iv.size() + ids.size());
    size_t j = 0;
    for (auto [lo, hi] : iv) {
      uint64_t cur = lo;
      while (j < ids.size() && ids[j] < hi) {
        uint64_t id = ids[j++];
        if (id > cur) out.push_back({cur, id});
        cur = id + 1;
      }
      if (hi > cur) out.push_back({cur, hi});
    }
    iv = std::move(out);
    total -= ids.size();
  }

  static ShotSet from_ids(const std::vector<uint64_t>& ids) {
    ShotSet s;
    size_t i = 0;
    while (i < ids.size()) {
      size_t j = i;
      while (j + 1 < ids.size() && ids[j + 1] == ids[j] + 1) j++;
      s.iv.push_back({ids[i], ids[j] + 1});
      i = j + 1;
    }
    s.total = ids.size();
    return s;
  }
};

struct Tracked {
  uint64_t shot;
  PauliFrame frame;
  std::vector<uint32_t> bits;  // set record bits, ascending
};

struct WorkItem {
  int node;
  ShotSet set;
  std::vector<Tracked> tracked;  // sorted by shot id
};

void toggle_bit(std::vector<uint32_t>& bits, uint32_t idx) {
  auto it = std::lower_bound(bits.begin(), bits.end(), idx);
  if (it != bits.end() && *it == idx)
    bits.erase(it);
  else
    bits.insert(it, idx);
}

class BlockRunner {
 public:
  BlockRunner(const CompiledTree& ct, uint64_t seed, uint64_t block_index)
      : ct_(ct), tree_(*ct.tree), seed_(seed), block_(block_index) {}

  void run(uint64_t lo, uint64_t hi, RunStats& stats) {
    std::vector<WorkItem> stack;
    stack.push_back({0, ShotSet::range(lo, hi), {}});
    while (!stack.empty()) {
      WorkItem item = std::move(stack.back());
      stack.pop_back();
      exec_node(item);
      const TreeNode& tn = tree_.nodes[item.node];
      if (tn.edges.empty()) {
        finish(item, stats);
        continue;
      }
      partition(std::move(item), stack);
    }
  }

 private:
  void exec_node(WorkItem& item) {
    const TreeNode& tn = tree_.nodes[item.node];
    const CompiledNode& cn = ct_.nodes[item.node];
    int meas_cursor = cn.record_base;
    int channel_ordinal = 0;
    for (size_t k = 0; k < tn.circuit.instrs.size(); k++) {
      const Instruction& ins = tn.circuit.instrs[k];
      switch (ins.kind) {
        case InstrKind::GATE:
          for (Tracked& t : item.tracked)
            if (!t.frame.trivial()) conjugate_apply(t.frame, ins);
          break;
        case InstrKind::RESET: {
          for (Tracked& t : item.tracked) t.frame = apply_reset(t.frame, ins.q0);
          if (ins.p > 0) {
            StreamRng rng(stream_key(item.node, channel_ordinal++));
            for_sites(item, ins.p, rng, [&](Tracked& t, StreamRng&) {
              if (ins.basis == MeasureBasis::Z)
                t.frame.mul_x(ins.q0);
              else
                t.frame.mul_z(ins.q0);
            });
          }
          break;
        }
        case InstrKind::MEASURE: {
          uint32_t idx = (uint32_t)meas_cursor++;
          for (Tracked& t : item.tracked) {
            auto [nf, bit] = apply_measurement(t.frame, ins.q0, ins.basis);
            t.frame = nf;
            if (bit) toggle_bit(t.bits, idx);
          }
          if (ins.p > 0) {
            StreamRng rng(stream_key(item.node, channel_ordinal++));
            for_sites(item, ins.p, rng,
                      [&](Tracked& t, StreamRng&) { toggle_bit(t.bits, idx); });
          }
          break;
        }
        case InstrKind::CHANNEL: {
          StreamRng rng(stream_key(item.node, channel_ordinal++));
          NoiseChannel ch = ins.channel == ChannelKind::DEPOL2 ? NoiseChannel::depol2(ins.p)
                             : ins.channel == ChannelKind::DEPOL1 ? NoiseChannel::depol1(ins.p)
                             : ins.channel == ChannelKind::X_FLIP ? NoiseChannel::x_flip(ins.p)
                                                                  : NoiseChannel::z_flip(ins.p);
          for_sites(item, ins.p, rng, [&](Tracked& t, StreamRng& r) {
            const auto& l = ch.draw(r);
            if (l.x & 1) t.frame.mul_x(ins.q0);
            if (l.z & 1) t.frame.mul_z(ins.q0);
            if (l.x & 2) t.frame.mul_x(ins.q1);
            if (l.z & 2) t.frame.mul_z(ins.q1);
          });
          break;
        }
        case InstrKind::IDLE:
        case InstrKind::DETECTOR:
          break;
        case InstrKind::COND_PAULI:
          for (Tracked& t : item.tracked) {
            if (t.bits.empty()) continue;
            if (eval_predicate(*ins.cond, ct_, item.node, t.bits)) {
              t.frame.x ^= ins.pauli_x;
              t.frame.z ^= ins.pauli_z;
            }
          }
          break;
        case InstrKind::LOOKUP_CORR:
          for (Tracked& t : item.tracked) {
            if (t.bits.empty()) continue;
            apply_lookup_correction(*ins.lookup, ct_, item.node, t.bits, t.frame);
          }
          break;
      }
    }
  }

  static void conjugate_apply(PauliFrame& f, const Instruction& ins) {
    if (gate_is_two_qubit(ins.gate))
      conjugate2(f, ins.gate, ins.q0, ins.q1);
    else
      conjugate1(f, ins.gate, ins.q0);
  }

  uint64_t stream_key(int node, int ordinal) const {
    return mix_key(seed_, (uint64_t)node << 20 | (uint64_t)ordinal, block_, 0x73706172);
  }

  // Applies `fn` to each geometric-sampled site among the item's shots,
  // materializing previously trivial shots on demand.
  template <typename Fn>
  void for_sites(WorkItem& item, double p, StreamRng& rng, Fn fn) {
    if (p <= 0 || item.set.total == 0) return;
    uint64_t pos = rng.geometric_skip(p);
    std::vector<Tracked> fresh;
    while (pos < item.set.total) {
      uint64_t shot = item.set.nth(pos);
      auto it = std::lower_bound(item.tracked.begin(), item.tracked.end(), shot,
                                 [](const Tracked& t, uint64_t s) { return t.shot < s; });
      if (it != item.tracked.end() && it->shot == shot) {
        fn(*it, rng);
      } else {
        auto fit = std::lower_bound(fresh.begin(), fresh.end(), shot,
                                    [](const Tracked& t, uint64_t s) { return t.shot < s; });
        if (fit != fresh.end() && fit->shot == shot) {
          fn(*fit, rng);
        } else {
          Tracked t;
          t.shot = shot;
          fn(t, rng);
          fresh.insert(fit, std::move(t));
        }
      }
      uint64_t skip = rng.geometric_skip(p);
      if (skip >= item.set.total - pos - 1) break;
      pos += 1 + skip;
    }
    if (!fresh.empty()) {
      size_t old = item.tracked.size();
      item.tracked.insert(item.tracked.end(), std::make_move_iterator(fresh.begin()),
                          std::make_move_iterator(fresh.end()));
      std::inplace_merge(item.tracked.begin(), item.tracked.begin() + old, item.tracked.end(),
                         [](const Tracked& a, const Tracked& b) { return a.shot < b.shot; });
    }
  }

  void partition(WorkItem item, std::vector<WorkItem>& stack) {
    const TreeNode& tn = tree_.nodes[item.node];
    const CompiledNode& cn = ct_.nodes[item.node];
    size_t n_edges = tn.edges.size();
    std::vector<std::vector<Tracked>> buckets(n_edges);
    std::vector<uint64_t> defectors;  // tracked shots leaving the default edge
    for (Tracked& t : item.tracked) {
      int taken = -1;
      if (t.bits.empty()) {
        taken = cn.default_edge;
      } else {
        for (size_t e = 0; e < n_edges; e++)
          if (eval_predicate(tn.edges[e].when, ct_, item.node, t.bits)) {
            if (taken != -1)
              throw std::runtime_error("two edges satisfied at node " + tn.name);
            taken = (int)e;
          }
        if (taken == -1) throw std::runtime_error("no edge satisfied at node " + tn.name);
      }
      if (taken != cn.default_edge) defectors.push_back(t.shot);
      buckets[taken].push_back(std::move(t));
    }
    ShotSet def_set = std::move(item.set);
    def_set.subtract(defectors);
    for (size_t e = 0; e < n_edges; e++) {
      WorkItem next;
      next.node = tn.edges[e].next;
      if ((int)e == cn.default_edge) {
        next.set = std::move(def_set);
      } else {
        std::vector<uint64_t> ids;
        ids.reserve(buckets[e].size());
        for (const Tracked& t : buckets[e]) ids.push_back(t.shot);
        next.set = ShotSet::from_ids(ids);
      }
      next.tracked = std::move(buckets[e]);
      if (next.set.total == 0) continue;
      stack.push_back(std::move(next));
    }
  }

  void finish(WorkItem& item, RunStats& stats) {
    stats.shots_per_terminal[item.node] += item.set.total;
    stats.tracked_count += item.tracked.size();
    const TreeNode& tn = tree_.nodes[item.node];
    for (Tracked& t : item.tracked) {
      TerminalResult res;
      res.shot = t.shot;
      res.terminal_node = item.node;
      res.frame = t.frame;
      res.record = std::move(t.bits);
      if (tn.terminal) {
        if (tn.terminal->discard)
          res.discarded = eval_predicate(*tn.terminal->discard, ct_, item.node, res.record);
        for (const auto& out : tn.terminal->outputs) {
          int v = eval_predicate(out.value, ct_, item.node, res.record);
          if (out.dress_random)
            v ^= keyed_bit(seed_, splitmix64(std::hash<std::string>{}(out.name)), res.shot);
          res.outputs.push_back({out.name, v});
        }
      }
      stats.tracked.push_back(std::move(res));
    }
  }

  const CompiledTree& ct_;
  const ProtocolTree& tree_;
  uint64_t seed_;
  uint64_t block_;
};

}  // namespace

RunStats SparseSimulator::run(uint64_t n_shots, bool keep_tracked) const {
  return run_visit_impl(n_shots, nullptr, keep_tracked);
}

RunStats SparseSimulator::run_visit(uint64_t n_shots, const TerminalVisitor& visit) const {
  return run_visit_impl(n_shots, &visit, false);
}

RunStats SparseSimulator::run_visit_impl(uint64_t n_shots, const TerminalVisitor* visit,
                                         bool keep_tracked) const {
  uint64_t n_blocks = (n_shots + kBlockShots - 1) / kBlockShots;
  std::vector<RunStats> per_block((size_t)n_blocks);

#pragma omp parallel for schedule(dynamic)
  for (int64_t b = 0; b < (int64_t)n_blocks; b++) {
    RunStats& bs = per_block[b];
    bs.shots_per_terminal.assign(ct_.tree->nodes.size(), 0);
    uint64_t lo = (uint64_t)b * kBlockShots;
    uint64_t hi = std::min(n_shots, lo + kBlockShots);
    bs.n_shots = hi - lo;
    BlockRunner runner(ct_, seed_, (uint64_t)b);
    runner.run(lo, hi, bs);  // collect per block, emit in order below
  }

  RunStats total;
  total.n_shots = n_shots;
  total.shots_per_terminal.assign(ct_.tree->nodes.size(), 0);
  for (auto& bs : per_block) {
    for (size_t i = 0; i < bs.shots_per_terminal.size(); i++)
      total.shots_per_terminal[i] += bs.shots_per_terminal[i];
    total.tracked_count += bs.tracked_count;
    std::sort(bs.tracked.begin(), bs.tracked.end(),
              [](const TerminalResult& a, const TerminalResult& b) { return a.shot < b.shot; });
    for (auto& res : bs.tracked) {
      if (visit) (*visit)(res);
      if (keep_tracked) total.tracked.push_back(std::move(res));
    }
  }
  return total;
}

}  // namespace ccsim
