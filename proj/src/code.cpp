#include "ccsim/code.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ccsim {

namespace {

struct Pt {
  int x, y;
  auto operator<=>(const Pt&) const = default;
};

// Hexagon centers live at (4q+2r, 3r); the six corners of a hexagon sit at
// these offsets from its center.
constexpr Pt kCorner[6] = {{0, 2}, {2, 1}, {2, -1}, {0, -2}, {-2, -1}, {-2, 1}};

// Left boundary side of the code: shortest chain of boundary qubits between
// the bottom-left and top corner, stepping through shared plaquettes.
Bits left_side(const ColorCode& code, int bl, int top) {
  int n = code.n;
  std::vector<int> deg(n, 0);
  for (const auto& p : code.plaquettes)
    for (int q = 0; q < n; q++)
      if (p.support >> q & 1) deg[q]++;
  std::vector<int> prev(n, -1);
  std::deque<int> queue{bl};
  std::vector<bool> seen(n, false);
  seen[bl] = true;
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    if (q == top) break;
    for (const auto& p : code.plaquettes) {
      if (!(p.support >> q & 1)) continue;
      for (int q2 = 0; q2 < n; q2++) {
        if (!(p.support >> q2 & 1) || seen[q2] || deg[q2] > 2) continue;
        seen[q2] = true;
        prev[q2] = q;
        queue.push_back(q2);
      }
    }
  }
  Bits side = 0;
  for (int q = top; q != -1; q = prev[q]) side |= Bits{1} << q;
  return side;
}

}  // namespace

ColorCode build_hex_color_code(int d) {
  if (d < 3 || d % 2 == 0) throw std::invalid_argument("color code distance must be odd and >= 3");
  int m = (d - 1) / 2;

  // Patch = triangular arrangement of 3-hexagon supercells.
  std::vector<std::pair<int, int>> hexes;
  for (int A = 0; A <= m - 1; A++) {
    for (int B = 0; A + B <= m - 1; B++) {
      int oq = 2 * A + B, orr = -A + B;
      hexes.push_back({oq + 0, orr + 0});
      hexes.push_back({oq + 1, orr + 0});
      hexes.push_back({oq + 0, orr + 1});
    }
  }

  std::map<Pt, int> degree;
  for (auto [q, r] : hexes) {
    Pt c{4 * q + 2 * r, 3 * r};
    for (const Pt& o : kCorner) degree[Pt{c.x + o.x, c.y + o.y}]++;
  }

  // Qubits: vertices shared by at least two plaquettes, plus the three
  // extreme corners of the triangle.
  Pt bl{-2, -1}, br{6 * m, 2 - 3 * m}, top{6 * m - 4, 3 * m + 2};
  std::vector<Pt> sites;
  for (auto& [pt, deg] : degree)
    if (deg >= 2) sites.push_back(pt);
  sites.push_back(bl);
  sites.push_back(br);
  sites.push_back(top);

  // Row-major labels: top row first, left to right. Rows are bands of
  // vertically adjacent lattice heights (the triangle sides zigzag). For d=3
  // this reproduces the standard Steane-code labeling with Z_L on {0,1,4}.
  std::map<int, int> band;  // y -> band index, descending y
  {
    std::vector<int> ys;
    for (const Pt& s : sites) ys.push_back(s.y);
    std::sort(ys.rbegin(), ys.rend());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    int b = 0;
    for (size_t i = 0; i < ys.size(); i++) {
      if (i > 0 && ys[i - 1] - ys[i] >= 2) b++;
      band[ys[i]] = b;
    }
  }
  std::sort(sites.begin(), sites.end(), [&](const Pt& a, const Pt& b) {
    return band[a.y] != band[b.y] ? band[a.y] < band[b.y] : a.x < b.x;
  });
  std::map<Pt, int> label;
  for (size_t i = 0; i < sites.size(); i++) label[sites[i]] = (int)i;

  ColorCode code;
  code.d = d;
  code.n = (int)sites.size();
  if (code.n > 64) throw std::invalid_argument("color code too large for 64-bit support masks");

  for (auto [q, r] : hexes) {
    Pt c{4 * q + 2 * r, 3 * r};
    Bits sup = 0;
    for (const Pt& o : kCorner) {
      auto it = label.find(Pt{c.x + o.x, c.y + o.y});
      if (it != label.end()) sup |= Bits{1} << it->second;
    }
    static const PlaqColor kColorOf[3] = {PlaqColor::G, PlaqColor::B, PlaqColor::R};
    code.plaquettes.push_back({kColorOf[((q - r) % 3 + 3) % 3], sup});
  }
  std::sort(code.plaquettes.begin(), code.plaquettes.end(),
            [](const Plaquette& a, const Plaquette& b) {
              return (a.support & ~(a.support - 1)) < (b.support & ~(b.support - 1));
            });

  code.logical_z = left_side(code, label[bl], label[top]);
  return code;
}

MergedCode merge_codes(const ColorCode& a, const ColorCode& b) {
  if (a.d != 3 || b.d != 3) throw std::invalid_argument("merge_codes requires two d=3 blocks");
  auto shift = [](Bits v) { return v << 7; };
  MergedCode mc;
  Bits p3 = (Bits{1} << 2) | (Bits{1} << 3) | (Bits{1} << 5) | (Bits{1} << 6);
  for (const auto& p : a.plaquettes) mc.x_checks.push_back(p.support);
  for (const auto& p : b.plaquettes) mc.x_checks.push_back(shift(p.support));
  bool found = false;
  for (const auto& p : a.plaquettes) {
    if (p.support == p3) {  // bottom Z plaquettes merge across the boundary
      found = true;
      continue;
    }
    mc.z_checks.push_back(p.support);
    mc.z_checks.push_back(shift(p.support));
  }
  if (!found) throw std::invalid_argument("input lacks the expected boundary plaquette");
  mc.z_w8 = p3 | shift(p3);
  mc.z_checks.push_back(mc.z_w8);
  mc.boundary_x4 = (Bits{1} << 4) | (Bits{1} << 5);
  mc.boundary_x4 |= shift(mc.boundary_x4);
  mc.boundary_x2 = (Bits{1} << 6) | (Bits{1} << 13);
  mc.x_checks.push_back(mc.boundary_x4);
  mc.x_checks.push_back(mc.boundary_x2);
  mc.logical_x = a.logical_z;                       // X_L of block 1
  mc.logical_z = a.logical_z | shift(b.logical_z);  // Z_L1 Z_L2
  return mc;
}

namespace {

void check_commute(const std::vector<Bits>& xs, const std::vector<Bits>& zs, CssReport& rep) {
  for (size_t i = 0; i < xs.size(); i++)
    for (size_t j = 0; j < zs.size(); j++)
      if (parity(xs[i], zs[j])) {
        rep.ok = false;
        std::ostringstream os;
        os << "X check " << i << " anticommutes with Z check " << j;
        rep.violations.push_back(os.str());
      }
}

}  // namespace

CssReport verify_css(const ColorCode& code) {
  CssReport rep;
  auto rows = code.check_rows();
  check_commute(rows, rows, rep);
  for (size_t i = 0; i < code.plaquettes.size(); i++) {
    int w = weight(code.plaquettes[i].support);
    if (w != 4 && w != 6) {
      rep.ok = false;
      rep.violations.push_back("plaquette " + std::to_string(i) + " has weight " +
                               std::to_string(w));
    }
  }
  int rank = gf2_rank(rows);
  rep.k = code.n - 2 * rank;
  if (rep.k != 1) {
    rep.ok = false;
    rep.violations.push_back("k = " + std::to_string(rep.k) + ", expected 1");
  }
  if (gf2_in_span(rows, code.logical_z)) {
    rep.ok = false;
    rep.violations.push_back("logical operator lies in the stabilizer span");
  }
  for (size_t i = 0; i < rows.size(); i++)
    if (parity(rows[i], code.logical_z)) {
      rep.ok = false;
      rep.violations.push_back("logical anticommutes with check " + std::to_string(i));
    }
  if (weight(code.logical_z) != code.d) {
    rep.ok = false;
    rep.violations.push_back("logical weight != d");
  }
  return rep;
}

CssReport verify_css_merged(const MergedCode& code) {
  CssReport rep;
  check_commute(code.x_checks, code.z_checks, rep);
  int rx = gf2_rank(code.x_checks), rz = gf2_rank(code.z_checks);
  rep.k = code.n - rx - rz;
  if (rep.k != 1) {
    rep.ok = false;
    rep.violations.push_back("k = " + std::to_string(rep.k) + ", expected 1");
  }
  if ((int)code.x_checks.size() != 8 || (int)code.z_checks.size() != 5) {
    rep.ok = false;
    rep.violations.push_back("unexpected check counts");
  }
  return rep;
}

namespace {

// Minimum weight over strings commuting with every `against` row but outside
// span(coset_of), by ascending-weight enumeration (Gosper's hack).
int min_weight_side(const std::vector<Bits>& against, const std::vector<Bits>& coset_of, int n) {
  for (int w = 1; w <= n; w++) {
    Bits v = (Bits{1} << w) - 1;
    Bits limit = Bits{1} << n;
    while (v < limit) {
      bool commutes = true;
      for (Bits row : against)
        if (parity(row, v)) {
          commutes = false;
          break;
        }
      if (commutes && !gf2_in_span(coset_of, v)) return w;
      Bits c = v & -v, r = v + c;
      v = (((r ^ v) >> 2) / c) | r;
    }
  }
  return -1;
}

}  // namespace

int min_logical_weight(const std::vector<Bits>& x_checks, const std::vector<Bits>& z_checks,
                       int n) {
  if (n > 25) throw std::invalid_argument("min_logical_weight: exhaustive search capped at n=25");
  int dz = min_weight_side(x_checks, z_checks, n);
  int dx = min_weight_side(z_checks, x_checks, n);
  return std::min(dz, dx);
}

int min_logical_weight(const ColorCode& code) {
  auto rows = code.check_rows();
  return min_logical_weight(rows, rows, code.n);
}

int min_logical_weight(const MergedCode& code) {
  return min_logical_weight(code.x_checks, code.z_checks, code.n);
}

std::string export_alist(const ColorCode& code) {
  // One block per matrix; self-dual, so H_X == H_Z, but both blocks are
  // emitted for tools that expect separate matrices.
  std::ostringstream os;
  auto rows = code.check_rows();
  auto dump = [&](const char* tag) {
    os << tag << " " << rows.size() << " " << code.n << "\n";
    for (Bits r : rows) {
      bool first = true;
      for (int q = 0; q < code.n; q++)
        if (r >> q & 1) {
          os << (first ? "" : " ") << q;
          first = false;
        }
      os << "\n";
    }
  };
  dump("HX");
  dump("HZ");
  for (const char* tag : {"LX", "LZ"}) {
    os << tag;
    for (int q = 0; q < code.n; q++)
      if (code.logical_z >> q & 1) os << " " << q;
    os << "\n";
  }
  return os.str();
}

}  // namespace ccsim
