#pragma once

#include <cstdio>
#include <string>

namespace kovi {

// Shortest round-trippable decimal rendering of a double.
inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace kovi
