#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace metaudit::detail {

// Shortest decimal form that round-trips the exact double (locale-free).
inline std::string fmt_full(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// Fixed-point with `digits` decimals (locale-free); used for display.
inline std::string fmt_fixed(double value, int digits) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

} // namespace metaudit::detail
