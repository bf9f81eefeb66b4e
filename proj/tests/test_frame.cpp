#include "doctest.h"

#include <map>

#include "ccsim/frame.hpp"
#include "stats_util.hpp"

using namespace ccsim;

TEST_CASE("conjugation: defining relations") {
  PauliFrame f;
  f.mul_x(0);  // X on q0
  auto g = conjugate_frame(f, {GateKind::H, 0});
  CHECK(g.x == 0);
  CHECK(g.z == 1);  // X -> Z under H

  PauliFrame x0;
  x0.mul_x(0);
  auto c = conjugate_frame(x0, {GateKind::CX, 0, 1});
  CHECK(c.x == 0b11);  // CNOT copies bit flips control -> target
  CHECK(c.z == 0);

  PauliFrame y0;
  y0.mul_x(0);
  y0.mul_z(0);
  auto s = conjugate_frame(y0, {GateKind::S, 0});
  CHECK(s.x == 1);  // Y -> X up to phase
  CHECK(s.z == 0);
}

TEST_CASE("conjugation group property: U then U-dagger is identity") {
  std::vector<std::pair<CliffordAction, CliffordAction>> pairs = {
      {{GateKind::H, 2}, {GateKind::H, 2}},
      {{GateKind::S, 3}, {GateKind::S_DAG, 3}},
      {{GateKind::SQRT_X, 1}, {GateKind::SQRT_X_DAG, 1}},
      {{GateKind::SQRT_Y, 0}, {GateKind::SQRT_Y_DAG, 0}},
      {{GateKind::CX, 0, 5}, {GateKind::CX, 0, 5}},
      {{GateKind::CZ, 2, 6}, {GateKind::CZ, 2, 6}},
      {{GateKind::SWAP, 1, 4}, {GateKind::SWAP, 1, 4}},
      {{GateKind::XX_PI2, 3, 7}, {GateKind::XX_PI2, 3, 7}},
      {{GateKind::ZZ_PI2, 3, 7}, {GateKind::ZZ_PI2, 3, 7}},
  };
  StreamRng rng(99);
  for (int trial = 0; trial < 200; trial++) {
    PauliFrame f;
    f.x = rng.bits() & 0xff;
    f.z = rng.bits() & 0xff;
    for (auto& [u, udg] : pairs) {
      auto g = conjugate_frame(conjugate_frame(f, u), udg);
      CHECK(g == f);
    }
  }
}

TEST_CASE("XX pi/2 rotation flips X components of anticommuting letters") {
  PauliFrame z0;
  z0.mul_z(0);
  auto g = conjugate_frame(z0, {GateKind::XX_PI2, 0, 1});
  CHECK(g.x == 0b11);
  CHECK(g.z == 0b01);
  PauliFrame x0;
  x0.mul_x(0);
  CHECK(conjugate_frame(x0, {GateKind::XX_PI2, 0, 1}) == x0);
}

TEST_CASE("reset clears both components") {
  PauliFrame f;
  f.mul_x(2);
  CHECK(apply_reset(f, 2).trivial());

  CHECK(apply_reset(PauliFrame{}, 0).trivial());

  PauliFrame g;
  g.mul_x(2);
  g.mul_z(2);
  g.mul_z(5);
  auto r = apply_reset(g, 2);
  CHECK(r.x == 0);
  CHECK(r.z == (Bits{1} << 5));
}

TEST_CASE("measurement reads the flip bit and clears the conjugate part") {
  PauliFrame f;
  f.mul_x(1);
  auto [f2, bit] = apply_measurement(f, 1, MeasureBasis::Z);
  CHECK(bit == 1);
  CHECK(f2.x == 0b10);  // bit flip persists on the collapsed state

  auto [g2, b0] = apply_measurement(PauliFrame{}, 0, MeasureBasis::Z);
  CHECK(b0 == 0);
  CHECK(g2.trivial());

  PauliFrame h;
  h.mul_z(1);
  auto [h2, b1] = apply_measurement(h, 1, MeasureBasis::Z);
  CHECK(b1 == 0);
  CHECK(h2.trivial());  // Z frame unobservable on a Z eigenstate

  PauliFrame k;
  k.mul_z(3);
  auto [k2, b3] = apply_measurement(k, 3, MeasureBasis::X);
  CHECK(b3 == 1);
}

TEST_CASE("unknown gate arity is a hard error") {
  PauliFrame f;
  CHECK_THROWS(conjugate_frame(f, {GateKind::CX, 0, 0}));
  CHECK_THROWS(conjugate_frame(f, {GateKind::H, -1}));
}

TEST_CASE("sample_noise_sites edge rates") {
  StreamRng rng(5);
  CHECK(sample_noise_sites(0.0, 1000, rng).empty());
  auto all = sample_noise_sites(1.0, 5, rng);
  CHECK(all == std::vector<uint64_t>{0, 1, 2, 3, 4});
  CHECK_THROWS(sample_noise_sites(-0.1, 10, rng));
  CHECK_THROWS(sample_noise_sites(1.1, 10, rng));
}

TEST_CASE("geometric skip sampling matches a Bernoulli reference in distribution") {
  const double p = 0.01;
  const uint64_t n = 100000;
  const int runs = 120;
  std::vector<long> geo_counts, bern_counts;
  double geo_mean = 0;
  for (int r = 0; r < runs; r++) {
    StreamRng rng(mix_key(11, r, 0));
    geo_counts.push_back((long)sample_noise_sites(p, n, rng).size());
    geo_mean += (double)geo_counts.back() / runs;

    StreamRng oracle(mix_key(22, r, 1));
    std::bernoulli_distribution coin(p);
    long c = 0;
    for (uint64_t s = 0; s < n; s++) c += coin(oracle.engine());
    bern_counts.push_back(c);
  }
  CHECK(geo_mean == doctest::Approx(n * p).epsilon(0.02));

  long lo = 1 << 30, hi = 0;
  for (long v : geo_counts) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (long v : bern_counts) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  int nbins = 12;
  std::vector<long> ha(nbins, 0), hb(nbins, 0);
  for (long v : geo_counts) ha[std::min<long>(nbins - 1, (v - lo) * nbins / (hi - lo + 1))]++;
  for (long v : bern_counts) hb[std::min<long>(nbins - 1, (v - lo) * nbins / (hi - lo + 1))]++;
  double pval = teststats::two_sample_chi2_pvalue(ha, hb);
  CHECK(pval > 0.01);
}

TEST_CASE("apply_channel multiplication rules") {
  ShotStore store;
  store.n_shots = 10;
  StreamRng rng(3);

  auto z = NoiseChannel::z_flip(1.0);
  store = apply_channel(store, {4}, z, 3, -1, rng);
  CHECK(store.faulty_shots.at(4).z == (Bits{1} << 3));

  ShotStore s2;
  s2.n_shots = 10;
  s2.faulty_shots[4].mul_x(3);
  auto x = NoiseChannel::x_flip(1.0);
  s2 = apply_channel(s2, {4}, x, 3, -1, rng);
  CHECK(s2.faulty_shots.empty());  // X*X = I

  ShotStore s3;
  s3.n_shots = 2;
  CHECK_THROWS(apply_channel(s3, {5}, x, 0, -1, rng));
}

TEST_CASE("depol2 draws all 15 letters uniformly") {
  auto ch = NoiseChannel::depol2(1.0);
  REQUIRE(ch.letters.size() == 15);
  StreamRng rng(77);
  const long draws = 1500000;
  std::map<std::pair<int, int>, long> hist;
  for (long i = 0; i < draws; i++) {
    const auto& l = ch.draw(rng);
    hist[{l.x, l.z}]++;
  }
  REQUIRE(hist.size() == 15);
  double expect = draws / 15.0;
  double sigma = std::sqrt(draws * (1.0 / 15) * (14.0 / 15));
  for (auto& [k, c] : hist) CHECK(std::fabs(c - expect) < 5 * sigma);
}

TEST_CASE("sparsity: no identity entries survive channel application") {
  StreamRng rng(123);
  ShotStore store;
  store.n_shots = 2000;
  auto d1 = NoiseChannel::depol1(0.3);
  for (int rep = 0; rep < 20; rep++) {
    auto sites = sample_noise_sites(0.3, store.n_shots, rng);
    store = apply_channel(store, sites, d1, rep % 5, -1, rng);
  }
  for (auto& [shot, f] : store.faulty_shots) CHECK(!f.trivial());
}
