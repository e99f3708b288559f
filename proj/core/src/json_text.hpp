#pragma once

// Internal: JSON emission with 17 significant digits for every float.

#include <string>

#include "json.hpp"

namespace dpdgt::detail {

/// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double x);

/// Like json::dump, but floats use format_double and non-finite values become
/// null. indent < 0 gives a single line.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace dpdgt::detail
