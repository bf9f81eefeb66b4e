#pragma once

#include "ccsim/code.hpp"
#include "ccsim/decoder.hpp"
#include "ccsim/tree.hpp"

namespace ccsim {

enum class SeKind : uint8_t { Bare, Flagged, Superdense };
enum class ProtocolKind : uint8_t { Sequential, Simultaneous, Superdense };

const char* to_string(ProtocolKind k);
ProtocolKind protocol_from_string(const std::string& s);

/// One full syndrome-extraction round over all plaquettes of `code` as a
/// fixed circuit (no branching): bare or flagged per-plaquette readout of
/// the requested basis, or the Bell-pair superdense readout of both bases.
/// Qubit layout: data = 0..n-1, ancillas above.
Circuit gen_se_circuit(SeKind kind, const ColorCode& code, MeasureBasis basis);

/// Verified preparation: non-FT encoding of |0> plus a single-ancilla
/// logical-Z parity check; raised check discards the shot. Other cardinal
/// states are reached by appended transversal layers (the +-i variants are
/// tagged non-FT).
ProtocolTree gen_prep_verified(CardinalState state);

/// Stabilizer-measurement preparation: two flagged X-stabilizer rounds with
/// disagreement-triggered unflagged re-measurement; FT for all six states.
ProtocolTree gen_prep_stabilizer(CardinalState state);

/// One adaptive QEC round as a branching tree (no preparation, no readout):
/// sequential per-stabilizer flagged measurements, the simultaneous
/// two-block scheme, or the superdense scheme with a conditional follow-up
/// round.
ProtocolTree gen_protocol(ProtocolKind kind, const ColorCode& code);

/// Memory benchmark: preparation, `rounds` adaptive QEC rounds, final
/// transversal readout in the state's basis.
ProtocolTree gen_memory(ProtocolKind kind, CardinalState state, int rounds);

/// Lattice-surgery teleportation: verified (or, for +-i, stabilizer-based)
/// source preparation, |0> destination, merge via the boundary weight-4 and
/// weight-2 X measurements with repetition rules, flagged S^X with
/// re-measurement disambiguation, split via flagged S^Z with the merged
/// weight-8 bookkeeping, transversal source readout.
ProtocolTree gen_teleport_ls(CardinalState input, ProtocolKind se = ProtocolKind::Simultaneous);

/// Direct joint-measurement teleportation: the weight-6 X_L1 X_L2 operator
/// measured by one flagged ancilla circuit; `repeated` adds the second (and
/// conditional third) measurement that restores fault tolerance.
ProtocolTree gen_teleport_direct(bool repeated, CardinalState input);

/// Halted lattice surgery: stops after the merge accepts the joint value,
/// leaving the two blocks in the post-merge state (used to probe the
/// logical Bell pair).
ProtocolTree gen_merge_only(CardinalState input);

/// Observable (x,z support masks) stabilizing the given cardinal state,
/// over the block whose data qubits are listed in ascending label order.
std::pair<Bits, Bits> state_observable(CardinalState s, const std::vector<int>& data);

}  // namespace ccsim
