#pragma once

#include <cmath>
#include <string>

#include "json.hpp"

namespace klb::detail {

// JSON has no literal for infinities; emit them as strings so reports
// round-trip instead of turning into null.
inline nlohmann::json json_num(double v) {
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

}  // namespace klb::detail
