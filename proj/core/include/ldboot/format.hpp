#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace ldboot {

/// Shortest round-trip decimal form; "inf" for +infinity. Used for every
/// CSV and JSON number the tools emit so outputs are byte-stable.
inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

}  // namespace ldboot
