#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <json.hpp>

namespace vclab::csv {

inline constexpr const char* kToolVersion = "0.1.0";

// 17 significant digits, '.' decimal point, "inf"/"-inf"/"nan" for
// non-finite values. Locale independent.
std::string number(double value);

// '#'-prefixed comment block: tool version, resolved config and master seed.
void write_header(std::ostream& out, const nlohmann::json& config, std::uint64_t seed);

}  // namespace vclab::csv
