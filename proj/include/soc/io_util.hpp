#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "soc/common.hpp"

namespace soc {

// Hexfloat round-trips doubles exactly; used by every persisted format.
inline std::string format_double_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return std::string(buf);
}

inline double parse_double_exact(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error("malformed numeric field: '" + s + "'");
  return v;
}

// Fixed decimal rendering for human-readable report columns.
inline std::string format_metric(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return std::string(buf);
}

}  // namespace soc
