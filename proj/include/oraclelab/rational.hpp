#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

#include <nlohmann/json_fwd.hpp>

namespace olab {

// Exact rational arithmetic for densities and thresholds. Window sizes are
// desk scale, so 64-bit components never come close to overflow.
using Ratio = boost::rational<std::int64_t>;

inline std::string to_string(const Ratio& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parses "p/q" or a bare integer "p".
Ratio parse_ratio(const std::string& text);

void to_json(nlohmann::json& j, const Ratio& r);
void from_json(const nlohmann::json& j, Ratio& r);

}  // namespace olab
