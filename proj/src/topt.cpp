#include "eolgp/topt.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "eolgp/errors.hpp"
#include "eolgp/gpr.hpp"
#include "eolgp/rng.hpp"

namespace eolgp {

std::vector<ToptObservation> empirical_topt(const Dataset& train) {
  // (c, dod) -> [(t, eol)] in ascending temperature order
  std::map<std::pair<double, double>, std::map<double, double>> slices;
  for (const auto& r : train.rows) {
    auto& slice = slices[{r.condition.c_rate, r.condition.dod}];
    auto [it, inserted] = slice.emplace(r.condition.t_amb, r.eol);
    if (!inserted) it->second = std::max(it->second, r.eol);
  }
  std::vector<ToptObservation> out;
  for (const auto& [key, slice] : slices) {
    if (slice.size() < 2) continue;
    double best_t = slice.begin()->first;
    double best_eol = slice.begin()->second;
    for (const auto& [t, eol] : slice) {
      if (eol > best_eol) {
        best_eol = eol;
        best_t = t;
      }
    }
    out.push_back({key.first, key.second, best_t});
  }
  if (out.empty()) {
    throw UsageError("empirical_topt: no (C-rate, DOD) slice has two or more temperatures");
  }
  return out;
}

namespace {

Eigen::RowVectorXd basis_row(int degree, double c, double dod) {
  Eigen::RowVectorXd row(topt_coefficient_count(degree));
  row(0) = 1.0;
  if (degree >= 1) {
    row(1) = c;
    row(2) = dod;
  }
  if (degree >= 2) {
    row(3) = c * c;
    row(4) = c * dod;
    row(5) = dod * dod;
  }
  return row;
}

}  // namespace

ToptModel fit_topt_polynomial(const std::vector<ToptObservation>& obs, int degree) {
  if (topt_coefficient_count(degree) < 0) throw UsageError("T_opt degree must be 0, 1 or 2");
  if (obs.empty()) throw UsageError("fit_topt_polynomial: no observations");
  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd a(n, topt_coefficient_count(degree));
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    a.row(i) = basis_row(degree, o.c_rate, o.dod);
    b(i) = kelvin_to_celsius(o.t_opt);
  }
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
  return ToptModel{degree, std::vector<double>(x.data(), x.data() + x.size())};
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw UsageError("cross-validation needs at least two folds");
  if (n < static_cast<std::size_t>(folds)) {
    throw UsageError("cross-validation: " + std::to_string(n) + " rows cannot fill " +
                     std::to_string(folds) + " folds");
  }
  const auto order = shuffled_indices(n, seed);
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) label[order[i]] = static_cast<int>(i % folds);
  return label;
}

namespace {

struct FoldData {
  std::vector<std::vector<OperatingCondition>> train_x, test_x;
  std::vector<Eigen::VectorXd> train_y, test_y;
};

FoldData make_folds(const Dataset& data, int folds, std::uint64_t seed) {
  const auto label = fold_assignment(data.size(), folds, seed);
  FoldData f;
  f.train_x.resize(folds);
  f.test_x.resize(folds);
  std::vector<std::vector<double>> ytr(folds), yte(folds);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int k = 0; k < folds; ++k) {
      auto& xs = (label[i] == k) ? f.test_x[k] : f.train_x[k];
      auto& ys = (label[i] == k) ? yte[k] : ytr[k];
      xs.push_back(data.rows[i].condition);
      ys.push_back(data.rows[i].eol);
    }
  }
  for (int k = 0; k < folds; ++k) {
    f.train_y.emplace_back(Eigen::Map<Eigen::VectorXd>(ytr[k].data(), ytr[k].size()));
    f.test_y.emplace_back(Eigen::Map<Eigen::VectorXd>(yte[k].data(), yte[k].size()));
  }
  return f;
}

double cv_rmse(const FoldData& f, KernelSpec spec, const ToptModel& topt) {
  spec.physics.topt_model = topt;
  double sse = 0.0;
  std::size_t count = 0;
  try {
    for (std::size_t k = 0; k < f.train_x.size(); ++k) {
      const auto model = fit(f.train_x[k], f.train_y[k], spec);
      const Eigen::VectorXd mu = predict_mean(model, f.test_x[k]);
      sse += (mu - f.test_y[k]).squaredNorm();
      count += static_cast<std::size_t>(mu.size());
    }
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const InputError&) {
    return std::numeric_limits<double>::infinity();
  }
  return std::sqrt(sse / static_cast<double>(count));
}

void check_base(const KernelSpec& base) {
  if (!base.uses_topt()) {
    throw UsageError("T_opt search needs a kernel with a temperature factor (t_only or combined)");
  }
}

}  // namespace

double topt_cv_rmse(const Dataset& train, const KernelSpec& base, const ToptModel& topt, int folds,
                    std::uint64_t fold_seed) {
  check_base(base);
  validate(topt);
  return cv_rmse(make_folds(train, folds, fold_seed), base, topt);
}

ToptSearchResult shrinking_grid_search(const Dataset& train, int degree, const KernelSpec& base,
                                       const ToptGridOptions& options) {
  check_base(base);
  const int dims = topt_coefficient_count(degree);
  if (dims < 0) throw UsageError("T_opt degree must be 0, 1 or 2");
  if (train.size() == 0) throw UsageError("T_opt search: empty training set");
  if (static_cast<int>(options.centers.size()) != dims ||
      static_cast<int>(options.half_widths.size()) != dims) {
    throw UsageError("T_opt search: centers and half-widths need " + std::to_string(dims) +
                     " entries for degree " + std::to_string(degree));
  }
  if (options.rounds < 1) throw UsageError("T_opt search: rounds must be at least 1");
  if (options.points < 1) throw UsageError("T_opt search: points per axis must be at least 1");
  if (!(options.shrink_factor > 0.0)) throw UsageError("T_opt search: shrink factor must be positive");

  const FoldData folds = make_folds(train, options.folds, options.fold_seed);

  ToptSearchResult result;
  result.model = ToptModel{degree, options.centers};
  result.cv_rmse = cv_rmse(folds, base, result.model);

  std::vector<double> center = options.centers;
  std::vector<double> half = options.half_widths;
  const int pts = options.points;
  std::size_t cells = 1;
  for (int k = 0; k < dims; ++k) cells *= static_cast<std::size_t>(pts);

  std::vector<double> offsets(static_cast<std::size_t>(pts), 0.0);
  for (int i = 0; i < pts && pts > 1; ++i) offsets[i] = -1.0 + 2.0 * i / (pts - 1);

  for (int round = 0; round < options.rounds; ++round) {
    ToptRoundTrace trace;
    trace.round = round;
    trace.grid_rmse.reserve(cells);
    double round_best = std::numeric_limits<double>::infinity();
    std::vector<double> round_coeffs = center;
    ToptModel candidate{degree, center};
    for (std::size_t cell = 0; cell < cells; ++cell) {
      // Lexicographic decode: the first coefficient varies slowest.
      std::size_t rest = cell;
      for (int k = dims; k-- > 0;) {
        const auto i = rest % static_cast<std::size_t>(pts);
        rest /= static_cast<std::size_t>(pts);
        candidate.coeffs[k] = center[k] + offsets[i] * half[k];
      }
      const double v = cv_rmse(folds, base, candidate);
      trace.grid_rmse.push_back(v);
      if (v < round_best) {
        round_best = v;
        round_coeffs = candidate.coeffs;
      }
    }
    if (round_best < result.cv_rmse) {
      result.cv_rmse = round_best;
      result.model.coeffs = round_coeffs;
    }
    if (std::isfinite(round_best)) center = round_coeffs;
    for (double& h : half) h *= options.shrink_factor;
    trace.best_coeffs = result.model.coeffs;
    trace.best_rmse = result.cv_rmse;
    result.rounds.push_back(std::move(trace));
  }
  return result;
}

std::vector<double> default_half_widths(int degree, double celsius_span) {
  // Largest magnitude of each basis term over C in [1, 2], DOD in [40, 80].
  static constexpr double kBasisMax[] = {1.0, 2.0, 80.0, 4.0, 160.0, 6400.0};
  const int dims = topt_coefficient_count(degree);
  if (dims < 0) throw UsageError("T_opt degree must be 0, 1 or 2");
  std::vector<double> hw(static_cast<std::size_t>(dims));
  for (int k = 0; k < dims; ++k) hw[k] = celsius_span / kBasisMax[k];
  return hw;
}

DegreeSweepResult topt_degree_sweep(const Dataset& train, const KernelSpec& base, int max_degree,
                                    ToptGridOptions options, double celsius_span) {
  check_base(base);
  if (max_degree < 0 || max_degree > 2) throw UsageError("T_opt degree must be 0, 1 or 2");
  const auto obs = empirical_topt(train);
  DegreeSweepResult out;
  for (int degree = 0; degree <= max_degree; ++degree) {
    ToptModel center = fit_topt_polynomial(obs, degree);
    if (degree > 0) {
      const ToptModel lifted = lift_degree(out.by_degree.back().model, degree);
      const double lifted_rmse = topt_cv_rmse(train, base, lifted, options.folds, options.fold_seed);
      const double lsq_rmse = topt_cv_rmse(train, base, center, options.folds, options.fold_seed);
      if (!(lsq_rmse < lifted_rmse)) center = lifted;
    }
    options.centers = center.coeffs;
    options.half_widths = default_half_widths(degree, celsius_span);
    out.by_degree.push_back(shrinking_grid_search(train, degree, base, options));
  }
  return out;
}

}  // namespace eolgp
