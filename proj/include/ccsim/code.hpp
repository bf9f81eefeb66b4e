#pragma once

#include <string>
#include <vector>

#include "ccsim/gf2.hpp"

namespace ccsim {

enum class PlaqColor : uint8_t { R, G, B };

struct Plaquette {
  PlaqColor color;
  Bits support;
};

/// Triangular hexagonal color code. Self-dual CSS: the same check matrix
/// serves as H_X and H_Z, and the X/Z logicals share their support.
struct ColorCode {
  int n = 0;
  int d = 0;
  std::vector<Plaquette> plaquettes;
  Bits logical_z = 0;  // support of Z_L (== support of X_L, self-dual)

  std::vector<Bits> check_rows() const {
    std::vector<Bits> rows;
    rows.reserve(plaquettes.size());
    for (const auto& p : plaquettes) rows.push_back(p.support);
    return rows;
  }
};

/// Two d=3 blocks joined along their bottom boundary (qubits 4,5,6 of each
/// block; block 2 qubits are offset by 7). X checks gain the weight-4 and
/// weight-2 boundary stabilizers whose product is X_L1*X_L2; the two bottom
/// Z plaquettes are replaced by the merged weight-8 Z check.
struct MergedCode {
  int n = 14;
  std::vector<Bits> x_checks;  // 8 rows
  std::vector<Bits> z_checks;  // 5 rows
  Bits boundary_x4 = 0;        // X on 4,5 of both blocks
  Bits boundary_x2 = 0;        // X on 6 of both blocks
  Bits z_w8 = 0;               // merged weight-8 Z check
  Bits logical_x = 0;          // X_L of block 1 (a representative)
  Bits logical_z = 0;          // Z_L1*Z_L2
};

/// Builds the [[ (3d^2+1)/4, 1, d ]] triangular hexagonal color code.
/// d=3 uses the frozen qubit labeling (Z_L on {0,1,4}); larger distances are
/// labeled row-major over the triangular patch.
ColorCode build_hex_color_code(int d);

MergedCode merge_codes(const ColorCode& a, const ColorCode& b);

struct CssReport {
  bool ok = true;
  std::vector<std::string> violations;
  int k = -1;
};

CssReport verify_css(const ColorCode& code);
CssReport verify_css_merged(const MergedCode& code);

/// Exhaustive minimum weight of a logical operator, searching both the
/// Z-against-X-checks and X-against-Z-checks sides and returning the smaller.
/// Refuses above 25 qubits.
int min_logical_weight(const std::vector<Bits>& x_checks, const std::vector<Bits>& z_checks,
                       int n);
int min_logical_weight(const ColorCode& code);
int min_logical_weight(const MergedCode& code);

/// Check matrices and logicals in a plain-text alist-style format.
std::string export_alist(const ColorCode& code);

}  // namespace ccsim
