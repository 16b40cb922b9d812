#include "eolgp/kernels.hpp"

#include <algorithm>
#include <string>

namespace eolgp {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be nonnegative and finite");
  }
}

double topt_of(const OperatingCondition& x, const KernelConfig& cfg) {
  return eval_topt(cfg.topt_model, x.c_rate, x.dod);
}

}  // namespace

void validate(const KernelConfig& cfg) {
  require_nonnegative(cfg.amplitude, "amplitude");
  require_positive(cfg.sigma_c, "sigma_c");
  require_positive(cfg.sigma_t, "sigma_t");
  require_positive(cfg.sigma_dod, "sigma_dod");
  require_nonnegative(cfg.noise, "noise");
  if (!(kMinKelvin + cfg.c_t > 0.0)) throw InputError("c_t must exceed -240 K");
  validate(cfg.topt_model);
}

void validate(const RbfConfig& cfg) {
  require_nonnegative(cfg.amplitude, "amplitude");
  require_nonnegative(cfg.noise, "noise");
  if (cfg.length_scales.size() == 0) throw InputError("rbf needs at least one length scale");
  for (Eigen::Index d = 0; d < cfg.length_scales.size(); ++d) {
    require_positive(cfg.length_scales(d), "rbf length scale");
  }
}

void validate(const KernelSpec& spec) {
  validate(spec.rbf);
  if (spec.rbf.length_scales.size() != 3) {
    throw InputError("operating-condition RBF needs exactly three length scales");
  }
  validate(spec.physics);
}

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::c_only: return "c_only";
    case KernelKind::t_only: return "t_only";
    case KernelKind::combined: return "combined";
  }
  return "?";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  for (KernelKind k : kAllKernelKinds) {
    if (to_string(k) == name) return k;
  }
  throw UsageError("unknown kernel kind '" + std::string(name) +
                   "' (expected rbf, c_only, t_only or combined)");
}

namespace {

double* hyperparameter_slot(KernelSpec& spec, std::string_view name) {
  const bool rbf = spec.kind == KernelKind::rbf;
  if (name == "amplitude") return rbf ? &spec.rbf.amplitude : &spec.physics.amplitude;
  if (name == "noise") return rbf ? &spec.rbf.noise : &spec.physics.noise;
  if (name == "sigma_c") return &spec.physics.sigma_c;
  if (name == "sigma_t") return &spec.physics.sigma_t;
  if (name == "c_t") return &spec.physics.c_t;
  if (name == "sigma_dod") return &spec.physics.sigma_dod;
  if (name == "l_c") return &spec.rbf.length_scales(0);
  if (name == "l_t") return &spec.rbf.length_scales(1);
  if (name == "l_dod") return &spec.rbf.length_scales(2);
  throw UsageError("unknown hyperparameter '" + std::string(name) + "'");
}

}  // namespace

double get_hyperparameter(const KernelSpec& spec, std::string_view name) {
  return *hyperparameter_slot(const_cast<KernelSpec&>(spec), name);
}

void set_hyperparameter(KernelSpec& spec, std::string_view name, double value) {
  *hyperparameter_slot(spec, name) = value;
}

double combined_kernel(const OperatingCondition& xi, const OperatingCondition& xj,
                       const KernelConfig& cfg) {
  const double kc = c_kernel(xi.c_rate, xj.c_rate, cfg.sigma_c);
  const double kt =
      t_kernel(xi.t_amb, xj.t_amb, topt_of(xi, cfg), topt_of(xj, cfg), cfg.c_t, cfg.sigma_t);
  const double kd = dod_kernel(xi.dod, xj.dod, cfg.sigma_dod);
  return cfg.amplitude * kc * kt * kd;
}

double axis_factor(const OperatingCondition& xi, const OperatingCondition& xj,
                   const KernelSpec& spec, int axis) {
  const auto& p = spec.physics;
  const auto& l = spec.rbf.length_scales;
  switch (axis) {
    case 0:
      if (spec.kind == KernelKind::c_only || spec.kind == KernelKind::combined) {
        return c_kernel(xi.c_rate, xj.c_rate, p.sigma_c);
      }
      return detail::squared_exponential(xi.c_rate - xj.c_rate, l(0));
    case 1:
      if (spec.uses_topt()) {
        return t_kernel(xi.t_amb, xj.t_amb, topt_of(xi, p), topt_of(xj, p), p.c_t, p.sigma_t);
      }
      return detail::squared_exponential(xi.t_amb - xj.t_amb, l(1));
    case 2:
      if (spec.kind == KernelKind::rbf) return detail::squared_exponential(xi.dod - xj.dod, l(2));
      return dod_kernel(xi.dod, xj.dod, p.sigma_dod);
    default:
      throw UsageError("axis must be 0, 1 or 2");
  }
}

double kernel_value(const OperatingCondition& xi, const OperatingCondition& xj,
                    const KernelSpec& spec) {
  if (spec.kind == KernelKind::combined) return combined_kernel(xi, xj, spec.physics);
  if (spec.kind == KernelKind::rbf) {
    const Eigen::Vector3d a(xi.c_rate, xi.t_amb, xi.dod);
    const Eigen::Vector3d b(xj.c_rate, xj.t_amb, xj.dod);
    return rbf(a, b, spec.rbf);
  }
  return spec.physics.amplitude * axis_factor(xi, xj, spec, 0) * axis_factor(xi, xj, spec, 1) *
         axis_factor(xi, xj, spec, 2);
}

Eigen::MatrixX3d feature_map(std::span<const OperatingCondition> points, const KernelSpec& spec) {
  const auto& p = spec.physics;
  const auto& l = spec.rbf.length_scales;
  const bool c_phys = spec.kind == KernelKind::c_only || spec.kind == KernelKind::combined;
  const bool t_phys = spec.uses_topt();
  const bool d_phys = spec.kind != KernelKind::rbf;
  if (c_phys) require_positive(p.sigma_c, "sigma_c");
  if (t_phys) require_positive(p.sigma_t, "sigma_t");
  if (d_phys) require_positive(p.sigma_dod, "sigma_dod");

  Eigen::MatrixX3d phi(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& x = points[r];
    const auto i = static_cast<Eigen::Index>(r);
    if (!(x.c_rate > 0.0)) throw InputError("C-rate must be positive");
    phi(i, 0) = c_phys ? (1.0 / x.c_rate) / p.sigma_c : x.c_rate / l(0);
    phi(i, 1) = t_phys ? t_feature(x.t_amb, topt_of(x, p), p.c_t) / p.sigma_t : x.t_amb / l(1);
    phi(i, 2) = d_phys ? x.dod / p.sigma_dod : x.dod / l(2);
  }
  return phi;
}

Eigen::MatrixXd gram(std::span<const OperatingCondition> x, std::span<const OperatingCondition> y,
                     const KernelSpec& spec) {
  const Eigen::MatrixX3d px = feature_map(x, spec);
  const Eigen::MatrixX3d py = feature_map(y, spec);
  const double amp = spec.amplitude();
  Eigen::MatrixXd k(px.rows(), py.rows());
  // Each entry is computed on its own so the result does not depend on evaluation order.
  for (Eigen::Index j = 0; j < py.rows(); ++j) {
    for (Eigen::Index i = 0; i < px.rows(); ++i) {
      k(i, j) = amp * std::exp(-0.5 * (px.row(i) - py.row(j)).squaredNorm());
    }
  }
  return k;
}

Eigen::MatrixXd gram(std::span<const OperatingCondition> x, std::span<const OperatingCondition> y,
                     const KernelSpec& spec, bool include_noise) {
  if (!include_noise) return gram(x, y, spec);
  if (x.size() != y.size() || !std::equal(x.begin(), x.end(), y.begin())) {
    throw UsageError("gram: noise may only be added when both point lists are identical");
  }
  return training_gram(x, spec);
}

Eigen::MatrixXd training_gram(std::span<const OperatingCondition> x, const KernelSpec& spec) {
  const Eigen::MatrixX3d px = feature_map(x, spec);
  const double amp = spec.amplitude();
  const double noise2 = spec.noise() * spec.noise();
  const Eigen::Index n = px.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = amp + noise2;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = amp * std::exp(-0.5 * (px.row(i) - px.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace eolgp
