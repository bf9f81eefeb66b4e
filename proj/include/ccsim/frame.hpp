#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ccsim/gf2.hpp"
#include "ccsim/rng.hpp"

namespace ccsim {

/// Accumulated Pauli flips of one shot, phase-free. Stored as X/Z bitmasks
/// over at most 64 qubits; a clear bit pair is the identity, so the sparsity
/// invariant (no explicit (0,0) entries) holds by construction.
struct PauliFrame {
  Bits x = 0;
  Bits z = 0;

  bool trivial() const { return x == 0 && z == 0; }
  bool operator==(const PauliFrame&) const = default;

  void mul_x(int q) { x ^= Bits{1} << q; }
  void mul_z(int q) { z ^= Bits{1} << q; }
  void mul(const PauliFrame& other) {
    x ^= other.x;
    z ^= other.z;
  }

  /// Non-identity entries as (qubit, x bit, z bit), for inspection.
  std::vector<std::tuple<int, int, int>> entries() const {
    std::vector<std::tuple<int, int, int>> out;
    Bits any = x | z;
    for (int q = 0; q < 64; q++)
      if (any >> q & 1) out.push_back({q, (int)(x >> q & 1), (int)(z >> q & 1)});
    return out;
  }

  /// 1 iff this frame anticommutes with the Pauli (x_support, z_support).
  int anticommutes(Bits x_support, Bits z_support) const {
    return parity(x, z_support) ^ parity(z, x_support);
  }
};

enum class GateKind : uint8_t {
  I,
  X,
  Y,
  Z,
  H,
  S,
  S_DAG,
  SQRT_X,
  SQRT_X_DAG,
  SQRT_Y,
  SQRT_Y_DAG,
  CX,
  CZ,
  SWAP,
  XX_PI2,
  ZZ_PI2,
};

inline bool gate_is_two_qubit(GateKind g) {
  switch (g) {
    case GateKind::CX:
    case GateKind::CZ:
    case GateKind::SWAP:
    case GateKind::XX_PI2:
    case GateKind::ZZ_PI2:
      return true;
    default:
      return false;
  }
}

/// Conjugates the frame by a single-qubit Clifford, discarding phases.
void conjugate1(PauliFrame& f, GateKind g, int q);
/// Conjugates the frame by a two-qubit Clifford, discarding phases.
void conjugate2(PauliFrame& f, GateKind g, int a, int b);

struct CliffordAction {
  GateKind kind;
  int q0 = -1;
  int q1 = -1;
};

PauliFrame conjugate_frame(PauliFrame f, const CliffordAction& gate);

/// Reset to a basis state drops both flip components of the qubit: a fresh
/// state carries no frame.
PauliFrame apply_reset(PauliFrame f, int q);

enum class MeasureBasis : uint8_t { Z, X };

/// Appends the flip bit of q in the given basis to `record` and clears the
/// now-unobservable conjugate component.
std::pair<PauliFrame, int> apply_measurement(PauliFrame f, int q, MeasureBasis basis);

/// Pauli channel support over one or two qubits with per-letter conditional
/// probabilities (letters exclude the identity).
struct NoiseChannel {
  // letter i applies x/z masks to the operand qubits; masks are local
  // (bit 0 = first operand, bit 1 = second).
  struct Letter {
    uint8_t x;
    uint8_t z;
    double weight;  // conditional probability given the channel fires
  };
  double total = 0;  // total firing probability
  std::vector<Letter> letters;

  static NoiseChannel depol1(double p);
  static NoiseChannel depol2(double p);
  static NoiseChannel x_flip(double p);
  static NoiseChannel z_flip(double p);

  /// Draws a non-identity letter with the conditional probabilities.
  const Letter& draw(StreamRng& rng) const;
};

/// Sparse per-shot store: only shots whose frame is non-trivial (or whose
/// record differs from all-zero) are materialized.
struct ShotStore {
  uint64_t n_shots = 0;
  std::map<uint64_t, PauliFrame> faulty_shots;
};

/// Shot indices hit by an event of probability p among n_shots trials,
/// ascending, sampled with cumulative geometric skips.
std::vector<uint64_t> sample_noise_sites(double p, uint64_t n_shots, StreamRng& rng);

/// Applies the channel to the given shots, drawing letters per site.
ShotStore apply_channel(ShotStore store, const std::vector<uint64_t>& sites,
                        const NoiseChannel& channel, int q0, int q1, StreamRng& rng);

}  // namespace ccsim
