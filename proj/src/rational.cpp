#include "oraclelab/rational.hpp"

#include <nlohmann/json.hpp>

namespace olab {

Ratio parse_ratio(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      return Ratio(std::stoll(text), 1);
    }
    std::int64_t num = std::stoll(text.substr(0, slash));
    std::int64_t den = std::stoll(text.substr(slash + 1));
    return Ratio(num, den);  // boost rejects den == 0
  } catch (const boost::bad_rational&) {
    throw std::invalid_argument("zero denominator in rational: " + text);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("malformed rational: " + text);
  }
}

void to_json(nlohmann::json& j, const Ratio& r) { j = to_string(r); }

void from_json(const nlohmann::json& j, Ratio& r) {
  if (j.is_number_integer()) {
    r = Ratio(j.get<std::int64_t>(), 1);
  } else {
    r = parse_ratio(j.get<std::string>());
  }
}

}  // namespace olab
