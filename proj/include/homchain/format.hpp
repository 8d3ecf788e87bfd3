#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "homchain/errors.hpp"

namespace homchain {

// Shortest decimal string that parses back to the same double; "inf" for +inf.
inline std::string format_double(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  if (std::isinf(v)) return "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "inf" || s == "+inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: not a number: '" + std::string(s) + "'");
  return v;
}

} // namespace homchain
