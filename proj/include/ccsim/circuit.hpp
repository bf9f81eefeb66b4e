#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/frame.hpp"

namespace ccsim {

/// Boolean expression over named measurement-record bits. PARITY is the
/// workhorse (XOR of bits compared against a constant); XOR/ANY/ALL/NOT
/// compose sub-expressions. Branch conditions in the protocol trees reduce
/// to these forms.
struct Predicate {
  enum class Kind : uint8_t { TRUE_, PARITY, XOR, ANY, ALL, NOT_ };
  Kind kind = Kind::TRUE_;
  std::vector<std::string> bits;  // PARITY
  int eq = 1;                     // PARITY: parity(bits) == eq
  std::vector<Predicate> args;    // XOR / ANY / ALL / NOT

  static Predicate always() { return {}; }
  static Predicate parity(std::vector<std::string> bits, int eq) {
    Predicate p;
    p.kind = Kind::PARITY;
    p.bits = std::move(bits);
    p.eq = eq;
    return p;
  }
  static Predicate any_of(std::vector<Predicate> ps) {
    Predicate p;
    p.kind = Kind::ANY;
    p.args = std::move(ps);
    return p;
  }
  static Predicate all_of(std::vector<Predicate> ps) {
    Predicate p;
    p.kind = Kind::ALL;
    p.args = std::move(ps);
    return p;
  }
  static Predicate xor_of(std::vector<Predicate> ps) {
    Predicate p;
    p.kind = Kind::XOR;
    p.args = std::move(ps);
    return p;
  }
  static Predicate negate(Predicate q) {
    Predicate p;
    p.kind = Kind::NOT_;
    p.args = {std::move(q)};
    return p;
  }
};

enum class InstrKind : uint8_t {
  GATE,
  RESET,
  MEASURE,
  CHANNEL,
  IDLE,
  DETECTOR,
  COND_PAULI,
  LOOKUP_CORR,
};

enum class ChannelKind : uint8_t { DEPOL1, DEPOL2, X_FLIP, Z_FLIP };

struct LookupTable;  // decoder.hpp

/// Applies a lookup-table correction to the frame: the 3-bit syndrome is
/// read from named record bits, the flag context from named flag bits
/// (context = index of first raised flag + 1, or 0), and the table entry is
/// applied as X or Z flips on the mapped data qubits.
struct LookupCorrInfo {
  std::shared_ptr<const LookupTable> table;
  std::vector<std::string> syndrome_bits;  // 3 names, plaquette order
  std::vector<std::string> flag_bits;      // up to 3 names, plaquette order
  std::vector<int> targets;                // 7 absolute qubit ids
  char letter = 'X';
  // Optional parity-expressions substituted for individual syndrome bits
  // (used where a random bit must be judged through a deterministic parity).
  std::vector<Predicate> syndrome_exprs;  // if nonempty, used instead of syndrome_bits
  // Optional gate: the correction applies only when this holds.
  std::shared_ptr<Predicate> enable;
};

struct Instruction {
  InstrKind kind;
  GateKind gate = GateKind::I;
  MeasureBasis basis = MeasureBasis::Z;
  int q0 = -1, q1 = -1;
  ChannelKind channel = ChannelKind::DEPOL1;
  double p = 0;            // channel rate; MEASURE: classical flip rate
  double duration_s = -1;  // IDLE: resolved duration, -1 = placeholder
  std::string label;       // MEASURE: node-local bit name; DETECTOR: name
  bool random_outcome = false;           // MEASURE: declared random vs deterministic-0
  std::vector<std::string> parity_bits;  // DETECTOR: referenced bit names
  std::shared_ptr<Predicate> cond;       // COND_PAULI
  Bits pauli_x = 0, pauli_z = 0;         // COND_PAULI
  std::shared_ptr<LookupCorrInfo> lookup;
  uint16_t layer = 0;
};

struct Circuit {
  int n_qubits = 0;
  std::vector<Instruction> instrs;

  int count_measurements() const {
    int c = 0;
    for (const auto& i : instrs) c += i.kind == InstrKind::MEASURE;
    return c;
  }
  /// Physical depth: classical bookkeeping instructions occupy no layer.
  int depth() const {
    int d = 0;
    for (const auto& i : instrs) {
      bool physical = i.kind == InstrKind::GATE || i.kind == InstrKind::RESET ||
                      i.kind == InstrKind::MEASURE || i.kind == InstrKind::IDLE;
      if (physical) d = std::max(d, i.layer + 1);
    }
    return d;
  }
};

/// Convenience builder that lays instructions out in explicit layers and
/// emits one idle marker per inactive qubit per layer (over a declared
/// alive set).
class CircuitBuilder {
 public:
  explicit CircuitBuilder(int n_qubits, std::string name_prefix = "")
      : prefix_(std::move(name_prefix)) {
    circ_.n_qubits = n_qubits;
  }

  void set_alive(Bits alive) { alive_ = alive; }
  Bits alive() const { return alive_; }

  void begin_layer() {
    touched_ = 0;
    in_layer_ = true;
  }
  void end_layer(bool emit_idles = true) {
    if (emit_idles) {
      Bits idle = alive_ & ~touched_;
      for (int q = 0; q < circ_.n_qubits; q++)
        if (idle >> q & 1) {
          Instruction ins;
          ins.kind = InstrKind::IDLE;
          ins.q0 = q;
          ins.layer = layer_;
          circ_.instrs.push_back(ins);
        }
    }
    layer_++;
    in_layer_ = false;
  }

  void gate(GateKind g, int a, int b = -1);
  void reset(int q, MeasureBasis basis = MeasureBasis::Z);
  /// Returns the full (prefixed) bit name.
  std::string measure(int q, MeasureBasis basis, const std::string& label, bool random = false);
  void detector(const std::string& name, std::vector<std::string> bits);
  void cond_pauli(Predicate when, Bits px, Bits pz);
  void lookup_corr(std::shared_ptr<LookupCorrInfo> info);

  std::string qual(const std::string& label) const {
    return prefix_.empty() ? label : prefix_ + "." + label;
  }

  Circuit take() { return std::move(circ_); }
  const Circuit& peek() const { return circ_; }

 private:
  void touch(int q) { touched_ |= Bits{1} << q; }
  Circuit circ_;
  std::string prefix_;
  Bits alive_ = 0;
  Bits touched_ = 0;
  uint16_t layer_ = 0;
  bool in_layer_ = false;
};

}  // namespace ccsim
