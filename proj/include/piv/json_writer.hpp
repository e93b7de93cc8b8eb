#pragma once

#include "json.hpp"

#include <string>

namespace piv {

// Serializes JSON with every floating-point number printed to 17 significant
// digits ("%.17g", always with a '.'), independent of the C locale. indent < 0
// gives a single line.
std::string dump_json(const nlohmann::json& value, int indent = 2);

// Fixed-point text with the given number of decimals, locale independent.
std::string format_fixed(double value, int decimals = 6);

} // namespace piv
