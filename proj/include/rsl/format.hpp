#pragma once

#include <charconv>
#include <string>

namespace rsl {

// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace rsl
