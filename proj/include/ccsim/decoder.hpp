#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/code.hpp"
#include "ccsim/tree.hpp"

namespace ccsim {

/// Flag-aware lookup table for d=3 blocks: 8 syndromes x 4 flag contexts
/// (none / 1st / 2nd / 3rd plaquette flag) -> correction support over the
/// block's 7 qubits. One table serves bit- and phase-flip decoding.
struct LookupTable {
  // entry[s][ctx]: s = s1*4 + s2*2 + s3 in plaquette order.
  std::array<std::array<uint8_t, 4>, 8> entry{};

  bool operator==(const LookupTable&) const = default;
};

/// The correction support for a syndrome/flag-context pair. Total: syndrome
/// 0 maps to the empty set in every context.
uint8_t decode_lookup(const LookupTable& table, int syndrome, int flag_context);

/// Equality up to stabilizer: corrections for every entry differ by an
/// element of the check span and leave the same syndrome.
bool tables_equal_mod_stabilizer(const LookupTable& a, const LookupTable& b,
                                 const ColorCode& code);

/// Builds the lookup table for a flagged (or superdense) syndrome-extraction
/// tree by enumerating every single fault, propagating it through the
/// Cliffords, and grouping final data errors by (syndrome, flag context).
/// `syndrome_bits`/`flag_bits` name the record bits that form the signature;
/// `data_qubits` maps local 0..6 to absolute ids. Throws std::runtime_error
/// naming the signature if two inequivalent minimum-weight errors collide.
struct LookupBuildSpec {
  std::vector<std::string> syndrome_bits;           // authoritative syndrome (3)
  std::vector<std::string> fallback_syndrome_bits;  // used when re-measure not taken (3, optional)
  std::vector<std::string> flag_bits;               // context bits (3)
  std::vector<int> data_qubits;                     // 7 absolute ids
  char letter = 'X';                                // sector being corrected
};

LookupTable build_lookup(const ProtocolTree& se_tree, const LookupBuildSpec& spec,
                         const ColorCode& code);

/// The flagged-extraction lookup table as printed in the reference; frozen
/// for tests and as the seed table for generators.
LookupTable reference_flag_table();

/// Exhaustive maximum-likelihood decoding of one CSS sector under
/// independent flips at rate p. `detecting` are the dual-sector check rows
/// (whose syndrome the error trips), `degeneracy` the same-sector rows.
class MlDecoder {
 public:
  MlDecoder(std::vector<Bits> detecting, std::vector<Bits> degeneracy, Bits logical, int n,
            double p = 1e-3);

  /// Correction support for a syndrome (bit i = detecting row i tripped).
  Bits decode(uint32_t syndrome) const;

 private:
  std::vector<Bits> detecting_, degeneracy_;
  Bits logical_;
  int n_;
  double p_;
  mutable std::map<uint32_t, Bits> cache_;
};

struct PauliCorrection {
  Bits x = 0;
  Bits z = 0;
};

/// CSS max-likelihood correction for an (X-error syndrome, Z-error syndrome)
/// pair; ties resolved toward the identity-logical coset. Refuses n > 20.
PauliCorrection brute_force_ml_decode(const ColorCode& code, uint32_t syndrome_of_x_errors,
                                      uint32_t syndrome_of_z_errors, double p);

/// Runtime application of a lookup correction inside circuit execution.
void apply_lookup_correction(const LookupCorrInfo& info, const CompiledTree& ct, int node,
                             const std::vector<uint32_t>& set_bits, PauliFrame& frame);

}  // namespace ccsim
