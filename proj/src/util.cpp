#include "lesionkit/util.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace lesionkit {

std::string format_number(double value) {
  char buf[128];
  const double mag = std::fabs(value);
  const bool plain = mag == 0.0 || (mag >= 1e-6 && mag < 1e15);
  const auto res = plain ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace lesionkit
