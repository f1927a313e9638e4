#pragma once

#include <charconv>
#include <string>

namespace twophoton {

/// Shortest text that parses back to the same double.
inline std::string format_real(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace twophoton
