#pragma once

#include <vector>

namespace eolgp {

/// Polynomial optimal temperature over (C-rate, DOD).
///
/// Coefficients are in degrees Celsius and ordered
/// (constant, c, dod, c^2, c*dod, dod^2); degree 0 uses the first one,
/// degree 1 the first three, degree 2 all six.
struct ToptModel {
  int degree = 0;
  std::vector<double> coeffs{25.0};

  friend bool operator==(const ToptModel&, const ToptModel&) = default;
};

[[nodiscard]] constexpr int topt_coefficient_count(int degree) noexcept {
  return degree == 0 ? 1 : degree == 1 ? 3 : degree == 2 ? 6 : -1;
}

/// Throws UsageError if the coefficient count does not match the degree.
void validate(const ToptModel& model);

/// Polynomial value in Celsius, no range check.
[[nodiscard]] double topt_celsius(const ToptModel& model, double c_rate, double dod) noexcept;

/// Optimal temperature in kelvin. Throws RangeError outside [240, 340] K.
[[nodiscard]] double eval_topt(const ToptModel& model, double c_rate, double dod);

/// Checks the range invariant on the corners and interior of the condition box
/// C in [1, 2], DOD in [40, 80].
void validate_over_box(const ToptModel& model);

/// Embeds a model into the next degree with zero new coefficients.
[[nodiscard]] ToptModel lift_degree(const ToptModel& model, int degree);

/// Degree-0 model at a fixed Celsius temperature.
[[nodiscard]] ToptModel constant_topt(double celsius);

}  // namespace eolgp
