#include "eolgp/topt_model.hpp"

#include <cmath>
#include <string>

#include "eolgp/conditions.hpp"
#include "eolgp/errors.hpp"

namespace eolgp {

void validate(const ToptModel& model) {
  const int expected = topt_coefficient_count(model.degree);
  if (expected < 0) throw UsageError("T_opt degree must be 0, 1 or 2");
  if (static_cast<int>(model.coeffs.size()) != expected) {
    throw UsageError("T_opt degree " + std::to_string(model.degree) + " needs " +
                     std::to_string(expected) + " coefficients, got " +
                     std::to_string(model.coeffs.size()));
  }
}

double topt_celsius(const ToptModel& model, double c_rate, double dod) noexcept {
  const auto& k = model.coeffs;
  double t = k[0];
  if (model.degree >= 1) t += k[1] * c_rate + k[2] * dod;
  if (model.degree >= 2) t += k[3] * c_rate * c_rate + k[4] * c_rate * dod + k[5] * dod * dod;
  return t;
}

double eval_topt(const ToptModel& model, double c_rate, double dod) {
  const double kelvin = celsius_to_kelvin(topt_celsius(model, c_rate, dod));
  if (!(kelvin >= kMinKelvin && kelvin <= kMaxKelvin)) {
    throw RangeError("T_opt " + std::to_string(kelvin) + " K at (c=" + std::to_string(c_rate) +
                     ", dod=" + std::to_string(dod) + ") is outside [240, 340] K");
  }
  return kelvin;
}

void validate_over_box(const ToptModel& model) {
  validate(model);
  // A quadratic attains its box extremes on edges; a 9x9 lattice covers corners,
  // edge midpoints and the interior stationary region closely enough.
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      (void)eval_topt(model, 1.0 + i / 8.0, 40.0 + 5.0 * j);
    }
  }
}

ToptModel lift_degree(const ToptModel& model, int degree) {
  validate(model);
  if (degree < model.degree || topt_coefficient_count(degree) < 0) {
    throw UsageError("cannot lift T_opt model to a lower or invalid degree");
  }
  ToptModel out{degree, model.coeffs};
  out.coeffs.resize(static_cast<std::size_t>(topt_coefficient_count(degree)), 0.0);
  return out;
}

ToptModel constant_topt(double celsius) { return ToptModel{0, {celsius}}; }

}  // namespace eolgp
