#pragma once

#include <cstdio>
#include <string>

namespace detkey {

// Shared numeric formatting so every surface (tables, CSV, logs) prints the
// same digits for the same value.
inline std::string num_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detkey
