#pragma once

#include <string>

#include "ccsim/tree.hpp"

namespace ccsim {

/// Versioned JSON-compatible text format for protocol trees; field-by-field
/// description in docs/formats.md.
std::string tree_to_json(const ProtocolTree& tree);
ProtocolTree tree_from_json(const std::string& text);

}  // namespace ccsim
