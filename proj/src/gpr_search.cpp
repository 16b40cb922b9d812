#include <algorithm>
#include <cmath>
#include <limits>

#include "eolgp/errors.hpp"
#include "eolgp/gpr.hpp"

namespace eolgp {

namespace {

constexpr double kWorst = -std::numeric_limits<double>::infinity();

double to_unit(const ParamAxis& a, double v) { return a.log_scale ? std::log(v) : v; }
double from_unit(const ParamAxis& a, double u) {
  return std::clamp(a.log_scale ? std::exp(u) : u, a.lo, a.hi);
}

class Objective {
 public:
  Objective(std::span<const OperatingCondition> x, const Eigen::VectorXd& y, KernelSpec base,
            const std::vector<const ParamAxis*>& free)
      : x_(x), y_(y), spec_(std::move(base)), free_(free) {}

  double operator()(const std::vector<double>& values) {
    ++evaluations;
    for (std::size_t k = 0; k < free_.size(); ++k) set_hyperparameter(spec_, free_[k]->name, values[k]);
    try {
      const double v = log_marginal_likelihood(fit(x_, y_, spec_));
      return std::isfinite(v) ? v : kWorst;
    } catch (const NumericalError&) {
      return kWorst;
    } catch (const InputError&) {
      return kWorst;
    }
  }

  KernelSpec with(const std::vector<double>& values) const {
    KernelSpec s = spec_;
    for (std::size_t k = 0; k < free_.size(); ++k) set_hyperparameter(s, free_[k]->name, values[k]);
    return s;
  }

  std::size_t evaluations = 0;

 private:
  std::span<const OperatingCondition> x_;
  const Eigen::VectorXd& y_;
  KernelSpec spec_;
  const std::vector<const ParamAxis*>& free_;
};

}  // namespace

SearchResult optimize_hyperparams(std::span<const OperatingCondition> x, const Eigen::VectorXd& y,
                                  const KernelSpec& base, const SearchSpace& space) {
  if (space.axes.empty()) throw UsageError("optimize_hyperparams: empty search space");
  if (x.empty()) throw UsageError("optimize_hyperparams: no data");

  KernelSpec start = base;
  std::vector<const ParamAxis*> free;
  for (const auto& a : space.axes) {
    (void)get_hyperparameter(start, a.name);  // rejects unknown names early
    if (a.lo > a.hi) throw UsageError("search axis '" + a.name + "' has lo > hi");
    if (a.log_scale && !(a.lo > 0.0)) {
      throw UsageError("log-scaled axis '" + a.name + "' needs a positive lower bound");
    }
    if (a.fixed()) {
      set_hyperparameter(start, a.name, a.lo);
    } else {
      free.push_back(&a);
    }
  }

  Objective objective(x, y, start, free);
  SearchResult result;

  const std::size_t dims = free.size();
  std::vector<double> best_values(dims);
  double best = kWorst;

  // Grid in lexicographic index order; the first axis varies slowest.
  std::vector<int> index(dims, 0);
  std::vector<double> values(dims);
  auto grid_value = [&](std::size_t k, int i) {
    const ParamAxis& a = *free[k];
    const double lo = to_unit(a, a.lo);
    const double hi = to_unit(a, a.hi);
    return from_unit(a, lo + (hi - lo) * i / (a.steps - 1));
  };
  bool first = true;
  while (true) {
    for (std::size_t k = 0; k < dims; ++k) values[k] = grid_value(k, index[k]);
    const double v = objective(values);
    if (first || v > best) {
      best = v;
      best_values = values;
      result.trace.push_back({"grid", values, v});
      first = false;
    }
    bool done = true;
    for (std::size_t k = dims; k-- > 0;) {
      if (++index[k] < free[k]->steps) {
        done = false;
        break;
      }
      index[k] = 0;
    }
    if (done) break;
  }

  if (space.strategy == SearchStrategy::grid_then_refine && dims > 0) {
    std::vector<double> half(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      const ParamAxis& a = *free[k];
      half[k] = (to_unit(a, a.hi) - to_unit(a, a.lo)) / (a.steps - 1);
    }
    const int probes = std::max(space.refine_points, 2);
    for (int sweep = 0; sweep < space.refine_sweeps; ++sweep) {
      for (std::size_t k = 0; k < dims; ++k) {
        const ParamAxis& a = *free[k];
        const double lo = to_unit(a, a.lo);
        const double hi = to_unit(a, a.hi);
        const double center = to_unit(a, best_values[k]);
        for (int p = 0; p < probes; ++p) {
          const double t = -1.0 + 2.0 * p / (probes - 1);
          if (t == 0.0) continue;
          const double u = std::clamp(center + t * half[k], lo, hi);
          std::vector<double> trial = best_values;
          trial[k] = from_unit(a, u);
          if (trial[k] == best_values[k]) continue;
          const double v = objective(trial);
          if (v > best) {
            best = v;
            best_values = trial;
            result.trace.push_back({"refine", trial, v});
          }
        }
      }
      for (double& h : half) h *= space.refine_shrink;
    }
  }

  if (!std::isfinite(best)) {
    throw NumericalError("optimize_hyperparams: no candidate produced a finite likelihood");
  }
  result.best = objective.with(best_values);
  result.best_lml = best;
  result.evaluations = objective.evaluations;
  return result;
}

SearchSpace default_search_space(const KernelSpec& base) {
  SearchSpace s;
  auto around = [&](const char* name, double factor, int steps) {
    const double v = get_hyperparameter(base, name);
    return ParamAxis{name, v / factor, v * factor, steps, true};
  };
  s.axes.push_back(ParamAxis{"amplitude", 1e3, 1e9, 7, true});
  switch (base.kind) {
    case KernelKind::rbf:
      s.axes.push_back(around("l_c", 10.0, 5));
      s.axes.push_back(around("l_t", 10.0, 5));
      s.axes.push_back(around("l_dod", 10.0, 5));
      break;
    case KernelKind::c_only:
      s.axes.push_back(around("sigma_c", 10.0, 5));
      s.axes.push_back(around("l_t", 10.0, 5));
      s.axes.push_back(around("sigma_dod", 10.0, 5));
      break;
    case KernelKind::t_only:
      s.axes.push_back(around("l_c", 10.0, 5));
      s.axes.push_back(around("sigma_t", 30.0, 5));
      s.axes.push_back(around("sigma_dod", 10.0, 5));
      break;
    case KernelKind::combined:
      s.axes.push_back(around("sigma_c", 10.0, 5));
      s.axes.push_back(around("sigma_t", 30.0, 5));
      s.axes.push_back(around("sigma_dod", 10.0, 5));
      break;
  }
  return s;
}

}  // namespace eolgp
