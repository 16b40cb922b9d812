#pragma once

#include <cstdint>
#include <vector>

#include "eolgp/conditions.hpp"
#include "eolgp/kernels.hpp"
#include "eolgp/rng.hpp"

namespace eolgp::test {

// Random operating conditions inside the experimental box.
inline std::vector<OperatingCondition> random_conditions(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<OperatingCondition> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({1.0 + rng.uniform(), 278.15 + 40.0 * rng.uniform(), 40.0 + 40.0 * rng.uniform()});
  }
  return out;
}

// Hyperparameters drawn log-uniformly around the defaults.
inline KernelSpec random_spec(KernelKind kind, CounterRng& rng) {
  auto around = [&](double v) { return v * std::exp((rng.uniform() - 0.5) * 4.0); };
  KernelSpec s;
  s.kind = kind;
  s.physics.amplitude = around(1000.0);
  s.physics.sigma_c = around(0.223);
  s.physics.sigma_t = around(0.255);
  s.physics.sigma_dod = around(15.7);
  s.physics.c_t = -200.0 + 300.0 * rng.uniform();
  s.physics.topt_model = ToptModel{1, {5.0 + 10.0 * rng.uniform(), 10.0 * rng.uniform(), 0.1 * rng.uniform()}};
  s.rbf.amplitude = around(1000.0);
  s.rbf.length_scales = Eigen::Vector3d(around(0.313), around(19.82), around(18.40));
  return s;
}

}  // namespace eolgp::test
