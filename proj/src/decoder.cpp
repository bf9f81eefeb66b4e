#include "ccsim/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ccsim/sim.hpp"

namespace ccsim {

uint8_t decode_lookup(const LookupTable& table, int syndrome, int flag_context) {
  return table.entry[syndrome & 7][flag_context & 3];
}

bool tables_equal_mod_stabilizer(const LookupTable& a, const LookupTable& b,
                                 const ColorCode& code) {
  auto rows = code.check_rows();
  for (int s = 0; s < 8; s++) {
    for (int c = 0; c < 4; c++) {
      Bits ea = a.entry[s][c], eb = b.entry[s][c];
      if (!gf2_in_span(rows, ea ^ eb)) return false;
    }
  }
  return true;
}

LookupTable reference_flag_table() {
  auto bits = [](std::initializer_list<int> qs) {
    uint8_t m = 0;
    for (int q : qs) m |= uint8_t(1) << q;
    return m;
  };
  LookupTable t;
  auto row = [&](int s, uint8_t none, uint8_t f1, uint8_t f2, uint8_t f3) {
    t.entry[s] = {none, f1, f2, f3};
  };
  // Syndrome digits read (plaquette1, plaquette2, plaquette3).
  row(0b000, 0, 0, 0, 0);
  row(0b001, bits({6}), bits({6}), bits({4, 5}), bits({6}));
  row(0b010, bits({4}), bits({2, 3}), bits({4}), bits({5, 6}));
  row(0b011, bits({5}), bits({5}), bits({5}), bits({5}));
  row(0b100, bits({0}), bits({0}), bits({0}), bits({0}));
  row(0b101, bits({3}), bits({3}), bits({3}), bits({3}));
  row(0b110, bits({1}), bits({1}), bits({1}), bits({1}));
  row(0b111, bits({2}), bits({2}), bits({2}), bits({2}));
  return t;
}

namespace {

// Lexicographic order on supports viewed as ascending qubit lists.
bool lex_less(Bits a, Bits b) {
  while (a && b) {
    Bits la = a & ~(a - 1), lb = b & ~(b - 1);
    if (la != lb) return la < lb;
    a ^= la;
    b ^= lb;
  }
  return a == 0 && b != 0;
}

Bits min_weight_in_coset(Bits e, const std::vector<Bits>& span_rows) {
  // Enumerate the whole coset through the span (small codes only).
  std::vector<Bits> span{0};
  for (Bits r : span_rows) {
    size_t m = span.size();
    for (size_t i = 0; i < m; i++) span.push_back(span[i] ^ r);
  }
  Bits best = e;
  for (Bits g : span) {
    Bits cand = e ^ g;
    if (weight(cand) < weight(best) ||
        (weight(cand) == weight(best) && lex_less(cand, best)))
      best = cand;
  }
  return best;
}

}  // namespace

LookupTable build_lookup(const ProtocolTree& se_tree, const LookupBuildSpec& spec,
                         const ColorCode& code) {
  CompiledTree ct = compile_tree(se_tree);
  DenseSimulator sim(ct, 1);

  // Signature -> canonical coset residue (for consistency) and best rep.
  std::map<std::pair<int, int>, Bits> coset_of;
  std::map<std::pair<int, int>, Bits> rep_of;
  auto rows = code.check_rows();

  Bits data_mask = 0;
  for (int q : spec.data_qubits) data_mask |= Bits{1} << q;

  auto local = [&](Bits absolute) {
    uint8_t m = 0;
    for (size_t i = 0; i < spec.data_qubits.size(); i++)
      if (absolute >> spec.data_qubits[i] & 1) m |= uint8_t(1) << i;
    return (Bits)m;
  };

  auto consider = [&](const TerminalResult& res) {
    auto has = [&](const std::string& name) {
      int idx = ct.resolve(res.terminal_node, name);
      return std::binary_search(res.record.begin(), res.record.end(), (uint32_t)idx);
    };
    auto bit_known = [&](const std::string& name) {
      return ct.nodes[res.terminal_node].bit_index.count(name) != 0;
    };
    int syndrome = 0;
    const auto& synd_bits = (!spec.fallback_syndrome_bits.empty() &&
                             !bit_known(spec.syndrome_bits[0]))
                                ? spec.fallback_syndrome_bits
                                : spec.syndrome_bits;
    for (int i = 0; i < 3; i++) syndrome = syndrome << 1 | has(synd_bits[i]);
    int ctx = 0;
    for (int i = 0; i < 3 && i < (int)spec.flag_bits.size(); i++) {
      if (bit_known(spec.flag_bits[i]) && has(spec.flag_bits[i])) {
        ctx = i + 1;
        break;
      }
    }
    Bits err = local(spec.letter == 'X' ? (res.frame.x & data_mask) : (res.frame.z & data_mask));
    if (syndrome == 0 && ctx == 0) return;  // pending faults wait for the next round
    Bits residue = gf2_reduce(rows, err);
    auto key = std::make_pair(syndrome, ctx);
    auto it = coset_of.find(key);
    if (it == coset_of.end()) {
      coset_of[key] = residue;
      rep_of[key] = min_weight_in_coset(err, rows);
    } else if (it->second != residue) {
      std::ostringstream os;
      os << "inconsistent fault classes at signature (syndrome=" << syndrome << ", flag=" << ctx
         << ")";
      throw std::runtime_error(os.str());
    } else {
      Bits cand = min_weight_in_coset(err, rows);
      if (weight(cand) < weight(rep_of[key]) ||
          (weight(cand) == weight(rep_of[key]) && lex_less(cand, rep_of[key])))
        rep_of[key] = cand;
    }
  };

  // Every channel letter at every site, every measurement flip.
  for (size_t n = 0; n < se_tree.nodes.size(); n++) {
    const Circuit& circ = se_tree.nodes[n].circuit;
    for (size_t k = 0; k < circ.instrs.size(); k++) {
      const Instruction& ins = circ.instrs[k];
      ForcedFault ff;
      ff.node = (int)n;
      ff.instr = (int)k;
      if (ins.kind == InstrKind::CHANNEL) {
        NoiseChannel ch = ins.channel == ChannelKind::DEPOL2 ? NoiseChannel::depol2(1)
                           : ins.channel == ChannelKind::DEPOL1 ? NoiseChannel::depol1(1)
                           : ins.channel == ChannelKind::X_FLIP ? NoiseChannel::x_flip(1)
                                                                : NoiseChannel::z_flip(1);
        for (size_t l = 0; l < ch.letters.size(); l++) {
          ff.letter = (int)l;
          consider(sim.run_shot(0, &ff));
        }
      } else if (ins.kind == InstrKind::MEASURE) {
        ff.record_flip = true;
        consider(sim.run_shot(0, &ff));
      } else if (ins.kind == InstrKind::RESET && ins.p > 0) {
        consider(sim.run_shot(0, &ff));
      }
    }
  }

  LookupTable table;
  for (auto& [key, rep] : rep_of) table.entry[key.first][key.second] = (uint8_t)rep;
  // Unreached contexts inherit the no-flag column.
  for (int s = 0; s < 8; s++)
    for (int c = 1; c < 4; c++)
      if (!rep_of.count({s, c})) table.entry[s][c] = table.entry[s][0];
  return table;
}

MlDecoder::MlDecoder(std::vector<Bits> detecting, std::vector<Bits> degeneracy, Bits logical,
                     int n, double p)
    : detecting_(std::move(detecting)),
      degeneracy_(std::move(degeneracy)),
      logical_(logical),
      n_(n),
      p_(p) {
  if (n_ > 20) throw std::invalid_argument("ml decoder capped at n=20");
}

Bits MlDecoder::decode(uint32_t syndrome) const {
  auto it = cache_.find(syndrome);
  if (it != cache_.end()) return it->second;

  // Solve for any error with the requested syndrome by Gauss-Jordan over
  // single-qubit columns (each basis row ends up owning its leading bit).
  Bits e0 = 0;
  {
    std::vector<std::pair<uint32_t, Bits>> basis;  // (syndrome pattern, error)
    for (int q = 0; q < n_; q++) {
      uint32_t sr = 0;
      for (size_t r = 0; r < detecting_.size(); r++)
        sr |= (uint32_t)parity(detecting_[r], Bits{1} << q) << r;
      Bits er = Bits{1} << q;
      for (auto& [bs, be] : basis)
        if (sr & (bs & ~(bs - 1))) {
          sr ^= bs;
          er ^= be;
        }
      if (!sr) continue;
      uint32_t lead = sr & ~(sr - 1);
      for (auto& [bs, be] : basis)
        if (bs & lead) {
          bs ^= sr;
          be ^= er;
        }
      basis.push_back({sr, er});
    }
    uint32_t remaining = syndrome;
    for (auto& [bs, be] : basis)
      if (remaining & (bs & ~(bs - 1))) {
        remaining ^= bs;
        e0 ^= be;
      }
    if (remaining) throw std::invalid_argument("syndrome outside the image of the check matrix");
  }

  std::vector<Bits> span{0};
  for (Bits r : degeneracy_) {
    size_t m = span.size();
    for (size_t i = 0; i < m; i++) span.push_back(span[i] ^ r);
  }
  double like[2] = {0, 0};
  Bits best[2] = {0, 0};
  int bestw[2] = {1 << 30, 1 << 30};
  double logit = std::log(p_ / (1 - p_));
  for (int cls = 0; cls < 2; cls++) {
    Bits base = cls ? e0 ^ logical_ : e0;
    for (Bits g : span) {
      Bits e = base ^ g;
      like[cls] += std::exp(weight(e) * logit);
      if (weight(e) < bestw[cls] || (weight(e) == bestw[cls] && lex_less(e, best[cls]))) {
        bestw[cls] = weight(e);
        best[cls] = e;
      }
    }
  }
  Bits ans = like[1] > like[0] ? best[1] : best[0];  // ties -> identity-logical coset
  cache_[syndrome] = ans;
  return ans;
}

PauliCorrection brute_force_ml_decode(const ColorCode& code, uint32_t syndrome_of_x_errors,
                                      uint32_t syndrome_of_z_errors, double p) {
  if (code.n > 20) throw std::invalid_argument("brute_force_ml_decode capped at n=20");
  auto rows = code.check_rows();
  MlDecoder dec(rows, rows, code.logical_z, code.n, p);
  PauliCorrection corr;
  corr.x = dec.decode(syndrome_of_x_errors);
  corr.z = dec.decode(syndrome_of_z_errors);
  return corr;
}

void apply_lookup_correction(const LookupCorrInfo& info, const CompiledTree& ct, int node,
                             const std::vector<uint32_t>& set_bits, PauliFrame& frame) {
  if (info.enable && !eval_predicate(*info.enable, ct, node, set_bits)) return;
  auto has = [&](const std::string& name) {
    uint32_t idx = (uint32_t)ct.resolve(node, name);
    return (int)std::binary_search(set_bits.begin(), set_bits.end(), idx);
  };
  int syndrome = 0;
  if (!info.syndrome_exprs.empty()) {
    for (const auto& e : info.syndrome_exprs)
      syndrome = syndrome << 1 | eval_predicate(e, ct, node, set_bits);
  } else {
    for (const auto& b : info.syndrome_bits) syndrome = syndrome << 1 | has(b);
  }
  int ctx = 0;
  for (size_t i = 0; i < info.flag_bits.size(); i++) {
    if (has(info.flag_bits[i])) {
      ctx = (int)i + 1;
      break;
    }
  }
  uint8_t corr = decode_lookup(*info.table, syndrome, ctx);
  for (int i = 0; i < 7; i++) {
    if (!(corr >> i & 1)) continue;
    if (info.letter == 'X')
      frame.mul_x(info.targets[i]);
    else
      frame.mul_z(info.targets[i]);
  }
}

}  // namespace ccsim
