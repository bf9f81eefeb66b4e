#include "ccsim/circuit.hpp"

#include <stdexcept>

namespace ccsim {

void CircuitBuilder::gate(GateKind g, int a, int b) {
  if (!in_layer_) begin_layer();
  Instruction ins;
  ins.kind = InstrKind::GATE;
  ins.gate = g;
  ins.q0 = a;
  ins.q1 = b;
  ins.layer = layer_;
  touch(a);
  if (b >= 0) touch(b);
  circ_.instrs.push_back(ins);
}

void CircuitBuilder::reset(int q, MeasureBasis basis) {
  if (!in_layer_) begin_layer();
  Instruction ins;
  ins.kind = InstrKind::RESET;
  ins.basis = basis;
  ins.q0 = q;
  ins.layer = layer_;
  touch(q);
  circ_.instrs.push_back(ins);
}

std::string CircuitBuilder::measure(int q, MeasureBasis basis, const std::string& label,
                                    bool random) {
  if (!in_layer_) begin_layer();
  Instruction ins;
  ins.kind = InstrKind::MEASURE;
  ins.basis = basis;
  ins.q0 = q;
  ins.label = qual(label);
  ins.random_outcome = random;
  ins.layer = layer_;
  touch(q);
  circ_.instrs.push_back(ins);
  return ins.label;
}

void CircuitBuilder::detector(const std::string& name, std::vector<std::string> bits) {
  Instruction ins;
  ins.kind = InstrKind::DETECTOR;
  ins.label = qual(name);
  ins.parity_bits = std::move(bits);
  ins.layer = layer_;
  circ_.instrs.push_back(ins);
}

void CircuitBuilder::cond_pauli(Predicate when, Bits px, Bits pz) {
  Instruction ins;
  ins.kind = InstrKind::COND_PAULI;
  ins.cond = std::make_shared<Predicate>(std::move(when));
  ins.pauli_x = px;
  ins.pauli_z = pz;
  ins.layer = layer_;
  circ_.instrs.push_back(ins);
}

void CircuitBuilder::lookup_corr(std::shared_ptr<LookupCorrInfo> info) {
  Instruction ins;
  ins.kind = InstrKind::LOOKUP_CORR;
  ins.lookup = std::move(info);
  ins.layer = layer_;
  circ_.instrs.push_back(ins);
}

}  // namespace ccsim
