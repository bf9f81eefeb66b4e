#include "ccsim/frame.hpp"

namespace ccsim {

void conjugate1(PauliFrame& f, GateKind g, int q) {
  Bits bx = f.x >> q & 1, bz = f.z >> q & 1;
  Bits m = Bits{1} << q;
  switch (g) {
    case GateKind::I:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
      // Paulis conjugate Paulis to themselves up to phase.
      return;
    case GateKind::H:
    case GateKind::SQRT_Y:
    case GateKind::SQRT_Y_DAG:
      // X <-> Z (sqrt-Y variants match H once phases are dropped).
      f.x = (f.x & ~m) | (bz << q);
      f.z = (f.z & ~m) | (bx << q);
      return;
    case GateKind::S:
    case GateKind::S_DAG:
      // X <-> Y: the Z component picks up the X bit.
      f.z ^= bx << q;
      return;
    case GateKind::SQRT_X:
    case GateKind::SQRT_X_DAG:
      // Z <-> Y.
      f.x ^= bz << q;
      return;
    default:
      throw std::invalid_argument("conjugate1: not a single-qubit gate kind");
  }
}

void conjugate2(PauliFrame& f, GateKind g, int a, int b) {
  Bits xa = f.x >> a & 1, za = f.z >> a & 1;
  Bits xb = f.x >> b & 1, zb = f.z >> b & 1;
  switch (g) {
    case GateKind::CX:
      // X copies control->target, Z copies target->control.
      f.x ^= xa << b;
      f.z ^= zb << a;
      return;
    case GateKind::CZ:
      f.z ^= xa << b;
      f.z ^= xb << a;
      return;
    case GateKind::SWAP: {
      Bits ma = Bits{1} << a, mb = Bits{1} << b;
      f.x = (f.x & ~(ma | mb)) | (xb << a) | (xa << b);
      f.z = (f.z & ~(ma | mb)) | (zb << a) | (za << b);
      return;
    }
    case GateKind::XX_PI2: {
      Bits dz = za ^ zb;
      f.x ^= (dz << a) | (dz << b);
      return;
    }
    case GateKind::ZZ_PI2: {
      Bits dx = xa ^ xb;
      f.z ^= (dx << a) | (dx << b);
      return;
    }
    default:
      throw std::invalid_argument("conjugate2: not a two-qubit gate kind");
  }
}

PauliFrame conjugate_frame(PauliFrame f, const CliffordAction& gate) {
  if (gate_is_two_qubit(gate.kind)) {
    if (gate.q0 < 0 || gate.q1 < 0 || gate.q0 == gate.q1)
      throw std::invalid_argument("two-qubit gate needs two distinct operands");
    conjugate2(f, gate.kind, gate.q0, gate.q1);
  } else {
    if (gate.q0 < 0) throw std::invalid_argument("gate needs an operand");
    conjugate1(f, gate.kind, gate.q0);
  }
  return f;
}

PauliFrame apply_reset(PauliFrame f, int q) {
  Bits m = ~(Bits{1} << q);
  f.x &= m;
  f.z &= m;
  return f;
}

std::pair<PauliFrame, int> apply_measurement(PauliFrame f, int q, MeasureBasis basis) {
  int bit;
  if (basis == MeasureBasis::Z) {
    bit = (int)(f.x >> q & 1);
    f.z &= ~(Bits{1} << q);  // Z flips are unobservable on a Z eigenstate
  } else {
    bit = (int)(f.z >> q & 1);
    f.x &= ~(Bits{1} << q);
  }
  return {f, bit};
}

NoiseChannel NoiseChannel::depol1(double p) {
  NoiseChannel c;
  c.total = p;
  c.letters = {{1, 0, 1.0 / 3}, {1, 1, 1.0 / 3}, {0, 1, 1.0 / 3}};
  return c;
}

NoiseChannel NoiseChannel::depol2(double p) {
  NoiseChannel c;
  c.total = p;
  for (int i = 1; i < 16; i++) {
    uint8_t xa = i & 1, za = (i >> 1) & 1, xb = (i >> 2) & 1, zb = (i >> 3) & 1;
    c.letters.push_back({(uint8_t)(xa | (xb << 1)), (uint8_t)(za | (zb << 1)), 1.0 / 15});
  }
  return c;
}

NoiseChannel NoiseChannel::x_flip(double p) {
  NoiseChannel c;
  c.total = p;
  c.letters = {{1, 0, 1.0}};
  return c;
}

NoiseChannel NoiseChannel::z_flip(double p) {
  NoiseChannel c;
  c.total = p;
  c.letters = {{0, 1, 1.0}};
  return c;
}

const NoiseChannel::Letter& NoiseChannel::draw(StreamRng& rng) const {
  if (letters.size() == 1) return letters[0];
  // All in-scope channels are uniform over their support.
  return letters[rng.below(letters.size())];
}

std::vector<uint64_t> sample_noise_sites(double p, uint64_t n_shots, StreamRng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability outside [0,1]");
  std::vector<uint64_t> sites;
  if (p == 0.0 || n_shots == 0) return sites;
  uint64_t i = rng.geometric_skip(p);
  while (i < n_shots) {
    sites.push_back(i);
    uint64_t skip = rng.geometric_skip(p);
    if (skip >= n_shots - i - 1) break;
    i += 1 + skip;
  }
  return sites;
}

ShotStore apply_channel(ShotStore store, const std::vector<uint64_t>& sites,
                        const NoiseChannel& channel, int q0, int q1, StreamRng& rng) {
  for (uint64_t s : sites) {
    if (s >= store.n_shots) throw std::invalid_argument("site outside shot range");
    auto letter = channel.draw(rng);
    PauliFrame& f = store.faulty_shots[s];  // creates the trivial frame if absent
    if (letter.x & 1) f.mul_x(q0);
    if (letter.z & 1) f.mul_z(q0);
    if (letter.x & 2) f.mul_x(q1);
    if (letter.z & 2) f.mul_z(q1);
    if (f.trivial()) store.faulty_shots.erase(s);
  }
  return store;
}

}  // namespace ccsim
