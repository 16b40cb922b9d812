#pragma once

#include <cmath>
#include <string>

#include "eolgp/errors.hpp"

namespace eolgp {

inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kMinKelvin = 240.0;
inline constexpr double kMaxKelvin = 340.0;

[[nodiscard]] constexpr double celsius_to_kelvin(double c) noexcept { return c + kKelvinOffset; }
[[nodiscard]] constexpr double kelvin_to_celsius(double k) noexcept { return k - kKelvinOffset; }

/// One cell's operating point. Temperatures are kelvin everywhere inside the library.
struct OperatingCondition {
  double c_rate = 1.0;   // charge rate in C
  double t_amb = 298.15; // ambient temperature, K
  double dod = 60.0;     // depth of discharge, %

  friend bool operator==(const OperatingCondition&, const OperatingCondition&) = default;
};

inline void validate(const OperatingCondition& oc) {
  if (!(oc.c_rate > 0.0) || !std::isfinite(oc.c_rate)) {
    throw InputError("c_rate must be positive, got " + std::to_string(oc.c_rate));
  }
  if (!(oc.t_amb >= kMinKelvin && oc.t_amb <= kMaxKelvin)) {
    throw InputError("t_amb must lie in [240, 340] K, got " + std::to_string(oc.t_amb));
  }
  if (!(oc.dod > 0.0 && oc.dod <= 100.0)) {
    throw InputError("dod must lie in (0, 100] %, got " + std::to_string(oc.dod));
  }
}

}  // namespace eolgp
