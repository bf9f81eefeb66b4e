#include "doctest.h"

#include "ccsim/code.hpp"

using namespace ccsim;

namespace {
Bits mask(std::initializer_list<int> qs) {
  Bits m = 0;
  for (int q : qs) m |= Bits{1} << q;
  return m;
}
}  // namespace

TEST_CASE("gf2 basics") {
  std::vector<Bits> rows{0b1111000, 0b0110110, 0b0011011};
  CHECK(gf2_rank(rows) == 3);
  CHECK(gf2_in_span(rows, 0b1111000));
  CHECK(gf2_in_span(rows, Bits{0b1111000 ^ 0b0110110}));
  CHECK(!gf2_in_span(rows, 0b1100100));
  CHECK(gf2_rank({0, 0}) == 0);
}

TEST_CASE("d=3 code matches the reference labeling") {
  auto code = build_hex_color_code(3);
  CHECK(code.n == 7);
  REQUIRE(code.plaquettes.size() == 3);
  CHECK(code.plaquettes[0].support == mask({0, 1, 2, 3}));
  CHECK(code.plaquettes[1].support == mask({1, 2, 4, 5}));
  CHECK(code.plaquettes[2].support == mask({2, 3, 5, 6}));
  CHECK(code.plaquettes[0].color == PlaqColor::R);
  CHECK(code.plaquettes[1].color == PlaqColor::G);
  CHECK(code.plaquettes[2].color == PlaqColor::B);
  CHECK(code.logical_z == mask({0, 1, 4}));
  auto rep = verify_css(code);
  CHECK(rep.ok);
  CHECK(rep.k == 1);
  CHECK(min_logical_weight(code) == 3);
}

TEST_CASE("d=5 code") {
  auto code = build_hex_color_code(5);
  CHECK(code.n == 19);
  CHECK(code.plaquettes.size() == 9);
  int w6 = 0;
  for (auto& p : code.plaquettes) w6 += weight(p.support) == 6;
  CHECK(w6 == 3);  // hexagonal bulk plaquettes appear from d=5 on
  auto rep = verify_css(code);
  CHECK(rep.ok);
  CHECK(min_logical_weight(code) == 5);
}

TEST_CASE("d=7 code via rank oracle") {
  auto code = build_hex_color_code(7);
  CHECK(code.n == 37);
  auto rep = verify_css(code);
  CHECK(rep.ok);
  CHECK(rep.k == 1);
}

TEST_CASE("invalid distances rejected") {
  CHECK_THROWS(build_hex_color_code(2));
  CHECK_THROWS(build_hex_color_code(4));
  CHECK_THROWS(build_hex_color_code(1));
}

TEST_CASE("corrupted check is reported") {
  auto code = build_hex_color_code(3);
  code.plaquettes[1].support ^= 1;  // flip one bit of a check row
  auto rep = verify_css(code);
  CHECK(!rep.ok);
  CHECK(!rep.violations.empty());
}

TEST_CASE("merged [[14,1,3]] code") {
  auto a = build_hex_color_code(3);
  auto mc = merge_codes(a, a);
  auto rep = verify_css_merged(mc);
  CHECK(rep.ok);
  CHECK(rep.k == 1);
  CHECK(mc.x_checks.size() == 8);  // 6 + 2 boundary
  CHECK(mc.z_checks.size() == 5);  // 6 - 2 + merged weight-8
  CHECK(weight(mc.z_w8) == 8);
  CHECK(weight(mc.boundary_x4) == 4);
  CHECK(weight(mc.boundary_x2) == 2);

  // X_L1 X_L2 equals the product of the two new checks up to stabilizer.
  Bits joint = a.logical_z | (a.logical_z << 7);
  CHECK(gf2_in_span(mc.x_checks, joint ^ mc.boundary_x4 ^ mc.boundary_x2));

  // Z_W8 commutes with the new X checks (brute-force symplectic products).
  CHECK(parity(mc.z_w8, mc.boundary_x4) == 0);
  CHECK(parity(mc.z_w8, mc.boundary_x2) == 0);

  CHECK(min_logical_weight(mc) == 3);

  CHECK_THROWS(merge_codes(build_hex_color_code(5), a));
}

TEST_CASE("min_logical_weight refuses oversized codes") {
  auto code = build_hex_color_code(7);
  CHECK_THROWS(min_logical_weight(code));
}

TEST_CASE("alist export lists both matrices and logicals") {
  auto code = build_hex_color_code(3);
  auto txt = export_alist(code);
  CHECK(txt.find("HX 3 7") != std::string::npos);
  CHECK(txt.find("HZ 3 7") != std::string::npos);
  CHECK(txt.find("LX 0 1 4") != std::string::npos);
}
