#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eolgp/conditions.hpp"
#include "eolgp/errors.hpp"
#include "eolgp/topt_model.hpp"

namespace eolgp {

// ---------------------------------------------------------------------------
// Scalar kernel factors. Each is exp(-d^2 / (2 l^2)) over a deterministic
// feature (1/c, normalized temperature deviation, DOD), so every Gram matrix
// they produce is positive semidefinite.
// ---------------------------------------------------------------------------

namespace detail {
template <typename Scalar>
[[nodiscard]] inline Scalar squared_exponential(Scalar diff, Scalar scale) {
  using std::exp;
  return exp(-(diff * diff) / (Scalar(2) * scale * scale));
}
}  // namespace detail

/// Reciprocal C-rate kernel: for a fixed C-rate gap, faster rates correlate more.
template <typename Scalar>
[[nodiscard]] Scalar c_kernel(Scalar ci, Scalar cj, Scalar sigma_c) {
  if (!(ci > Scalar(0)) || !(cj > Scalar(0))) throw InputError("c_kernel: C-rate must be positive");
  if (!(sigma_c > Scalar(0))) throw InputError("c_kernel: sigma_c must be positive");
  return detail::squared_exponential(Scalar(1) / ci - Scalar(1) / cj, sigma_c);
}

/// |t - t_opt| / (t + c_t); all arguments in kelvin.
template <typename Scalar>
[[nodiscard]] Scalar t_feature(Scalar t, Scalar t_opt, Scalar c_t) {
  using std::abs;
  const Scalar denom = t + c_t;
  if (!(denom > Scalar(0))) throw InputError("t_feature: t + c_t must be positive");
  return abs(t - t_opt) / denom;
}

template <typename Scalar>
[[nodiscard]] Scalar t_kernel(Scalar ti, Scalar tj, Scalar topt_i, Scalar topt_j, Scalar c_t,
                              Scalar sigma_t) {
  if (!(sigma_t > Scalar(0))) throw InputError("t_kernel: sigma_t must be positive");
  return detail::squared_exponential(t_feature(ti, topt_i, c_t) - t_feature(tj, topt_j, c_t),
                                     sigma_t);
}

template <typename Scalar>
[[nodiscard]] Scalar dod_kernel(Scalar di, Scalar dj, Scalar sigma_dod) {
  if (!(sigma_dod > Scalar(0))) throw InputError("dod_kernel: sigma_dod must be positive");
  return detail::squared_exponential(di - dj, sigma_dod);
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

/// Hyperparameters of the condition-aware kernels.
struct KernelConfig {
  double amplitude = 31.6 * 31.6;
  double sigma_c = 0.223;
  double sigma_t = 0.255;
  double c_t = 0.0;  // K
  double sigma_dod = 15.70;
  double noise = 1.0;  // standard-deviation-style level; enters the Gram diagonal squared
  ToptModel topt_model{};

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// Anisotropic squared-exponential baseline.
struct RbfConfig {
  double amplitude = 31.6 * 31.6;
  Eigen::VectorXd length_scales = Eigen::Vector3d(0.313, 19.82, 18.40);
  double noise = 1.0;

  friend bool operator==(const RbfConfig& a, const RbfConfig& b) {
    return a.amplitude == b.amplitude && a.noise == b.noise &&
           a.length_scales.size() == b.length_scales.size() &&
           a.length_scales == b.length_scales;
  }
};

void validate(const KernelConfig& cfg);
void validate(const RbfConfig& cfg);

/// Which kernel acts on each operating-condition axis.
///
///  rbf      : RBF(c) * RBF(T) * RBF(DOD), amplitude/noise from RbfConfig
///  c_only   : C kernel * RBF(T) * DOD kernel
///  t_only   : RBF(c) * T kernel * DOD kernel
///  combined : C kernel * T kernel * DOD kernel
/// The single-kernel variants take amplitude, noise and sigma_dod from
/// KernelConfig and the RBF length scale of the replaced axis from RbfConfig.
enum class KernelKind { rbf, c_only, t_only, combined };

inline constexpr KernelKind kAllKernelKinds[] = {KernelKind::rbf, KernelKind::c_only,
                                                 KernelKind::t_only, KernelKind::combined};

[[nodiscard]] std::string_view to_string(KernelKind kind) noexcept;
[[nodiscard]] KernelKind kernel_kind_from_string(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::combined;
  KernelConfig physics{};
  RbfConfig rbf{};

  [[nodiscard]] double amplitude() const noexcept {
    return kind == KernelKind::rbf ? rbf.amplitude : physics.amplitude;
  }
  [[nodiscard]] double noise() const noexcept {
    return kind == KernelKind::rbf ? rbf.noise : physics.noise;
  }
  [[nodiscard]] bool uses_topt() const noexcept {
    return kind == KernelKind::t_only || kind == KernelKind::combined;
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

void validate(const KernelSpec& spec);

/// Named hyperparameter access used by the optimizers and config loaders.
/// Names: amplitude, noise, sigma_c, sigma_t, c_t, sigma_dod, l_c, l_t, l_dod.
[[nodiscard]] double get_hyperparameter(const KernelSpec& spec, std::string_view name);
void set_hyperparameter(KernelSpec& spec, std::string_view name, double value);

// ---------------------------------------------------------------------------
// Point evaluations
// ---------------------------------------------------------------------------

/// sigma^2 exp(-sum_d (xi_d - xj_d)^2 / (2 l_d^2)).
template <typename DerivedA, typename DerivedB>
[[nodiscard]] typename DerivedA::Scalar rbf(const Eigen::MatrixBase<DerivedA>& xi,
                                            const Eigen::MatrixBase<DerivedB>& xj,
                                            const RbfConfig& cfg) {
  using Scalar = typename DerivedA::Scalar;
  if (xi.size() != cfg.length_scales.size() || xj.size() != cfg.length_scales.size()) {
    throw InputError("rbf: input dimension does not match the number of length scales");
  }
  Scalar r2 = Scalar(0);
  for (Eigen::Index d = 0; d < xi.size(); ++d) {
    const Scalar z = (xi(d) - xj(d)) / Scalar(cfg.length_scales(d));
    r2 += z * z;
  }
  using std::exp;
  return Scalar(cfg.amplitude) * exp(Scalar(-0.5) * r2);
}

/// amplitude * k_C * k_T * k_DOD with each point's own optimal temperature.
[[nodiscard]] double combined_kernel(const OperatingCondition& xi, const OperatingCondition& xj,
                                     const KernelConfig& cfg);

/// Noiseless covariance between two points under any kernel kind.
[[nodiscard]] double kernel_value(const OperatingCondition& xi, const OperatingCondition& xj,
                                  const KernelSpec& spec);

/// Unit-amplitude factor of a single axis (0 = C-rate, 1 = temperature, 2 = DOD),
/// used for one-dimensional alignment studies.
[[nodiscard]] double axis_factor(const OperatingCondition& xi, const OperatingCondition& xj,
                                 const KernelSpec& spec, int axis);

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

/// Rows are the per-axis features divided by their length scales; the kernel is
/// amplitude * exp(-0.5 * |phi(x) - phi(x')|^2) on these rows.
[[nodiscard]] Eigen::MatrixX3d feature_map(std::span<const OperatingCondition> points,
                                           const KernelSpec& spec);

/// Cross-covariance K(X, Y), never noisy.
[[nodiscard]] Eigen::MatrixXd gram(std::span<const OperatingCondition> x,
                                   std::span<const OperatingCondition> y, const KernelSpec& spec);

/// K(X, Y), plus noise^2 I when include_noise. include_noise requires X and Y to be
/// the same list; otherwise UsageError.
[[nodiscard]] Eigen::MatrixXd gram(std::span<const OperatingCondition> x,
                                   std::span<const OperatingCondition> y, const KernelSpec& spec,
                                   bool include_noise);

/// Training covariance K(X, X) + noise^2 I.
[[nodiscard]] Eigen::MatrixXd training_gram(std::span<const OperatingCondition> x,
                                            const KernelSpec& spec);

}  // namespace eolgp
