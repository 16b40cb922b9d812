#include "eolgp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "eolgp/errors.hpp"
#include "eolgp/rng.hpp"

namespace eolgp {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

void check_pair(std::span<const double> a, std::span<const double> p, const char* what) {
  if (a.size() != p.size()) throw UsageError(std::string(what) + ": length mismatch");
  if (a.empty()) throw UsageError(std::string(what) + ": empty input");
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "rmse");
  double sse = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "mape");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!(actual[i] > 0.0)) throw UsageError("mape: actual values must be positive");
    acc += std::abs(actual[i] - predicted[i]) / actual[i];
  }
  return 100.0 * acc / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

void validate(const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw UsageError("test_fraction must lie in (0, 1)");
  }
  if (spec.seeds.empty()) throw UsageError("at least one split seed is required");
  if (std::set(spec.seeds.begin(), spec.seeds.end()).size() != spec.seeds.size()) {
    throw UsageError("split seeds must be distinct");
  }
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_test =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction - 1e-9));
  if (n_test < 1 || n_test >= n) {
    throw UsageError("split leaves an empty train or test set for " + std::to_string(n) + " rows");
  }
  const auto order = shuffled_indices(n, seed);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.subset(train), data.subset(test)};
}

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

double eol_similarity(double eol_i, double eol_j) {
  if (!(eol_i > 0.0) || !(eol_j > 0.0)) throw UsageError("eol_similarity: EOL must be positive");
  return std::min(eol_i, eol_j) / std::max(eol_i, eol_j);
}

double eol_correlation(double eol_i, double eol_j, double scale) {
  if (!(scale >= 0.0)) throw UsageError("eol_correlation: scale must be nonnegative");
  const double d = eol_i - eol_j;
  if (scale == 0.0) return d == 0.0 ? 1.0 : 0.0;
  return std::exp(-d * d / (2.0 * scale * scale));
}

std::string_view to_string(Axis axis) noexcept {
  switch (axis) {
    case Axis::c_rate: return "c_rate";
    case Axis::temperature: return "temperature";
    case Axis::dod: return "dod";
  }
  return "?";
}

double AlignmentResult::mean_error() const {
  if (errors.empty()) return 0.0;
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

namespace {

double coord(const OperatingCondition& x, int axis) {
  return axis == 0 ? x.c_rate : axis == 1 ? x.t_amb : x.dod;
}

std::vector<DatasetRow> sweep_rows(const Dataset& data, Axis axis) {
  const int a = static_cast<int>(axis);
  if (data.size() < 2) throw UsageError("alignment needs at least two sweep points");
  const auto& first = data.rows.front().condition;
  std::set<double> values;
  for (const auto& r : data.rows) {
    for (int other = 0; other < 3; ++other) {
      if (other != a && coord(r.condition, other) != coord(first, other)) {
        throw UsageError("alignment: dataset is not a one-dimensional sweep along " +
                         std::string(to_string(axis)));
      }
    }
    if (!values.insert(coord(r.condition, a)).second) {
      throw UsageError("alignment: repeated sweep value");
    }
  }
  std::vector<DatasetRow> rows = data.rows;
  std::sort(rows.begin(), rows.end(), [a](const DatasetRow& l, const DatasetRow& r) {
    return coord(l.condition, a) < coord(r.condition, a);
  });
  return rows;
}

Eigen::MatrixXd correlation_matrix(const std::vector<DatasetRow>& rows, Correlation mode) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  double lo = rows.front().eol;
  double hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.eol);
    hi = std::max(hi, r.eol);
  }
  const double scale = 0.5 * (hi - lo);
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = rows[static_cast<std::size_t>(i)].eol;
      const double b = rows[static_cast<std::size_t>(j)].eol;
      s(i, j) = mode == Correlation::ratio ? eol_similarity(a, b) : eol_correlation(a, b, scale);
    }
  }
  return s;
}

std::vector<double> anchor_errors(const std::vector<DatasetRow>& rows, const Eigen::MatrixXd& corr,
                                  const KernelSpec& spec, int axis) {
  std::vector<double> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double err = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      err += std::abs(corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                      axis_factor(rows[i].condition, rows[j].condition, spec, axis));
    }
    out.push_back(err / static_cast<double>(rows.size() - 1));
  }
  return out;
}

const char* scale_name(const KernelSpec& spec, Axis axis) {
  switch (axis) {
    case Axis::c_rate:
      return (spec.kind == KernelKind::c_only || spec.kind == KernelKind::combined) ? "sigma_c"
                                                                                      : "l_c";
    case Axis::temperature: return spec.uses_topt() ? "sigma_t" : "l_t";
    case Axis::dod: return spec.kind == KernelKind::rbf ? "l_dod" : "sigma_dod";
  }
  return "";
}

}  // namespace

AlignmentResult kernel_alignment_error(const Dataset& data, const KernelSpec& spec, Axis axis,
                                       Correlation mode) {
  const auto rows = sweep_rows(data, axis);
  const int a = static_cast<int>(axis);
  AlignmentResult out;
  out.axis = axis;
  for (const auto& r : rows) out.anchors.push_back(coord(r.condition, a));
  out.errors = anchor_errors(rows, correlation_matrix(rows, mode), spec, a);
  return out;
}

double improvement_rate(double err_rbf, double err_new) {
  if (!(err_rbf > 0.0)) throw UsageError("improvement_rate: baseline error must be positive");
  return (err_rbf - err_new) / err_rbf * 100.0;
}

namespace {

struct ScaleFit {
  KernelSpec spec;
  double objective = 0.0;
};

// Log-grid over +/- 3 decades around the current value, then golden-section polish.
ScaleFit fit_scale(const std::vector<DatasetRow>& rows, const Eigen::MatrixXd& corr,
                   const KernelSpec& spec, int a, const char* name) {
  KernelSpec s = spec;
  auto objective = [&](double log_scale) {
    set_hyperparameter(s, name, std::exp(log_scale));
    const auto errs = anchor_errors(rows, corr, s, a);
    return std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
  };
  const double center = std::log(get_hyperparameter(spec, name));
  constexpr int kSteps = 121;
  const double lo = center - 3.0 * std::log(10.0);
  const double hi = center + 3.0 * std::log(10.0);
  const double step = (hi - lo) / (kSteps - 1);
  double best_u = lo;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSteps; ++i) {
    const double u = lo + step * i;
    const double v = objective(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  double l = best_u - step;
  double r = best_u + step;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = r - kInvPhi * (r - l);
  double x2 = l + kInvPhi * (r - l);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 <= f2) {
      r = x2;
      x2 = x1;
      f2 = f1;
      x1 = r - kInvPhi * (r - l);
      f1 = objective(x1);
    } else {
      l = x1;
      x1 = x2;
      f1 = f2;
      x2 = l + kInvPhi * (r - l);
      f2 = objective(x2);
    }
  }
  if (std::min(f1, f2) < best) {
    best_u = f1 <= f2 ? x1 : x2;
    best = std::min(f1, f2);
  }
  set_hyperparameter(s, name, std::exp(best_u));
  return {s, best};
}

// C_T candidates as fractions of the coldest sweep temperature: negative values
// stretch the cold side, positive ones flatten the asymmetry.
constexpr double kCtFractions[] = {-2.0, -1.0, -0.5, 0.0, 0.25, 0.5, 0.7, 0.8, 0.85, 0.9, 0.95};

}  // namespace

KernelSpec fit_alignment_scale(const Dataset& data, const KernelSpec& spec, Axis axis,
                               Correlation mode) {
  const auto rows = sweep_rows(data, axis);
  const int a = static_cast<int>(axis);
  const Eigen::MatrixXd corr = correlation_matrix(rows, mode);
  const char* name = scale_name(spec, axis);
  if (axis != Axis::temperature || !spec.uses_topt()) return fit_scale(rows, corr, spec, a, name).spec;

  // The T factor also carries the C_T correction; pick it from a fixed ladder.
  const double t_min = rows.front().condition.t_amb;
  std::optional<ScaleFit> best;
  for (double f : kCtFractions) {
    KernelSpec s = spec;
    s.physics.c_t = -f * t_min;
    auto fitted = fit_scale(rows, corr, s, a, name);
    if (!best || fitted.objective < best->objective) best = std::move(fitted);
  }
  return best->spec;
}

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

const VariantReport& AblationReport::variant(KernelKind kind) const {
  for (const auto& v : variants) {
    if (v.kind == kind) return v;
  }
  throw UsageError("ablation report has no variant " + std::string(to_string(kind)));
}

double AblationReport::combined_improvement() const {
  return improvement_rate(variant(KernelKind::rbf).average.rmse,
                          variant(KernelKind::combined).average.rmse);
}

bool AblationReport::orderings_hold() const {
  const auto& rbf = variant(KernelKind::rbf).average;
  const auto& c = variant(KernelKind::c_only).average;
  const auto& t = variant(KernelKind::t_only).average;
  const auto& comb = variant(KernelKind::combined).average;
  return comb.rmse <= std::min(c.rmse, t.rmse) && std::max(c.rmse, t.rmse) <= rbf.rmse &&
         comb.mape <= rbf.mape && comb.mean_std <= rbf.mean_std && comb.rmse < rbf.rmse;
}

AblationSetup default_ablation_setup() {
  AblationSetup setup;
  for (std::size_t i = 0; i < 4; ++i) setup.specs[i].kind = kAllKernelKinds[i];
  return setup;
}

ToptStudy run_topt_study(const Dataset& train, const KernelSpec& start, int max_degree,
                         const ToptGridOptions& grid, double celsius_span) {
  KernelSpec base = start;
  base.kind = KernelKind::combined;
  ToptStudy out;
  out.kernel = optimize_hyperparams(train.conditions(), train.targets(), base,
                                    default_search_space(base)).best;
  out.sweep = topt_degree_sweep(train, out.kernel, max_degree, grid, celsius_span);
  return out;
}

std::array<KernelSpec, 4> tune_variants(const Dataset& train, const AblationSetup& setup,
                                        std::uint64_t fold_seed) {
  std::array<KernelSpec, 4> specs = setup.specs;
  const auto& tuning = setup.tuning;
  if (!tuning.enabled) return specs;

  const auto x = train.conditions();
  const Eigen::VectorXd y = train.targets();

  if (tuning.tune_topt) {
    ToptGridOptions grid = tuning.topt_grid;
    grid.fold_seed = fold_seed;
    const auto study =
        run_topt_study(train, specs[3], tuning.topt_degree, grid, tuning.topt_celsius_span);
    const ToptModel topt = study.sweep.by_degree.back().model;
    specs[2].physics.topt_model = topt;
    specs[3].physics.topt_model = topt;
  }
  for (auto& s : specs) s = optimize_hyperparams(x, y, s, default_search_space(s)).best;
  return specs;
}

namespace {

struct Pooled {
  std::vector<double> actual, predicted, stds;
  void add(double a, double p, double s) {
    actual.push_back(a);
    predicted.push_back(p);
    stds.push_back(s);
  }
  VariantMetrics metrics() const {
    return {rmse(actual, predicted), mape(actual, predicted),
            std::accumulate(stds.begin(), stds.end(), 0.0) / static_cast<double>(stds.size())};
  }
};

}  // namespace

AblationReport run_ablation(const Dataset& data, const SplitSpec& spec, const AblationSetup& setup) {
  validate(spec);
  validate(data);
  AblationReport report;
  report.split = spec;
  std::array<std::map<double, Pooled>, 4> by_c, by_t, by_d;
  for (KernelKind k : kAllKernelKinds) {
    VariantReport v;
    v.kind = k;
    report.variants.push_back(std::move(v));
  }

  for (std::uint64_t seed : spec.seeds) {
    auto [train, test] = split(data, spec.test_fraction, seed);
    std::array<KernelSpec, 4> specs;
    try {
      specs = tune_variants(train, setup, seed);
    } catch (const Error& e) {
      throw NumericalError("ablation: tuning failed for seed " + std::to_string(seed) + ": " +
                           e.what());
    }
    const auto tx = train.conditions();
    const Eigen::VectorXd ty = train.targets();
    const auto qx = test.conditions();
    for (std::size_t v = 0; v < 4; ++v) {
      std::vector<Prediction> pred;
      try {
        pred = predict(fit(tx, ty, specs[v]), qx);
      } catch (const Error& e) {
        throw NumericalError("ablation: variant " + std::string(to_string(kAllKernelKinds[v])) +
                             " failed for seed " + std::to_string(seed) + ": " + e.what());
      }
      Pooled seed_pool;
      for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& row = test.rows[i];
        seed_pool.add(row.eol, pred[i].mean, pred[i].std);
        by_c[v][row.condition.c_rate].add(row.eol, pred[i].mean, pred[i].std);
        by_t[v][kelvin_to_celsius(row.condition.t_amb)].add(row.eol, pred[i].mean, pred[i].std);
        by_d[v][row.condition.dod].add(row.eol, pred[i].mean, pred[i].std);
      }
      report.variants[v].per_seed.push_back(seed_pool.metrics());
      report.variants[v].tuned_specs.push_back(specs[v]);
    }
  }

  const double n = static_cast<double>(spec.seeds.size());
  for (std::size_t v = 0; v < 4; ++v) {
    auto& rep = report.variants[v];
    for (const auto& m : rep.per_seed) {
      rep.average.rmse += m.rmse / n;
      rep.average.mape += m.mape / n;
      rep.average.mean_std += m.mean_std / n;
    }
    for (const auto& [key, pool] : by_c[v]) rep.breakdown.by_c_rate[key] = pool.metrics();
    for (const auto& [key, pool] : by_t[v]) rep.breakdown.by_temperature[key] = pool.metrics();
    for (const auto& [key, pool] : by_d[v]) rep.breakdown.by_dod[key] = pool.metrics();
  }
  return report;
}

}  // namespace eolgp

namespace eolgp {

// ---------------------------------------------------------------------------
// Pre-tests
// ---------------------------------------------------------------------------

std::string_view to_string(PretestKind kind) noexcept {
  return kind == PretestKind::c_rate ? "c" : "t";
}

std::vector<double> PretestReport::improvement() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < rbf_alignment.errors.size(); ++i) {
    out.push_back(improvement_rate(rbf_alignment.errors[i], proposed_alignment.errors[i]));
  }
  return out;
}

double PretestReport::proposed_error() const {
  double acc = 0.0;
  for (const auto& h : holdouts) acc += h.proposed_error();
  return holdouts.empty() ? 0.0 : acc / static_cast<double>(holdouts.size());
}

double PretestReport::rbf_error() const {
  double acc = 0.0;
  for (const auto& h : holdouts) acc += h.rbf_error();
  return holdouts.empty() ? 0.0 : acc / static_cast<double>(holdouts.size());
}

namespace {

// Scale from the alignment fit, then amplitude by marginal likelihood.
KernelSpec tune_for_sweep(const Dataset& train, const KernelSpec& spec, Axis axis) {
  KernelSpec s = fit_alignment_scale(train, spec, axis);
  SearchSpace space;
  space.axes.push_back(ParamAxis{"amplitude", 1e2, 1e10, 17, true});
  return optimize_hyperparams(train.conditions(), train.targets(), s, space).best;
}

}  // namespace

PretestReport run_pretest(PretestKind kind, const WangParams& wang, const SimulatorParams& sim) {
  if (kind == PretestKind::c_rate) return run_pretest(kind, wang_sweep(kPretestCRates, wang));
  auto curve = pretest_t_curve(sim);
  auto report = run_pretest(kind, std::move(curve.data));
  report.plate_scale = curve.plate_scale;
  return report;
}

PretestReport run_pretest(PretestKind kind, Dataset sweep) {
  PretestReport report;
  report.kind = kind;
  report.data = std::move(sweep);
  Axis axis = Axis::c_rate;
  if (kind == PretestKind::c_rate) {
    report.proposed.kind = KernelKind::c_only;
  } else {
    report.proposed.kind = KernelKind::t_only;
    report.proposed.physics.topt_model = constant_topt(kPretestOptimumC);
    axis = Axis::temperature;
  }
  report.rbf.kind = KernelKind::rbf;
  const KernelSpec proposed_base = report.proposed;
  const KernelSpec rbf_base = report.rbf;

  report.proposed = fit_alignment_scale(report.data, proposed_base, axis);
  report.rbf = fit_alignment_scale(report.data, rbf_base, axis);
  report.proposed_alignment = kernel_alignment_error(report.data, report.proposed, axis);
  report.rbf_alignment = kernel_alignment_error(report.data, report.rbf, axis);

  const int a = static_cast<int>(axis);
  auto held_out = [&](const DatasetRow& row) {
    if (kind == PretestKind::c_rate) {
      return std::find(std::begin(kPretestHeldOutCRates), std::end(kPretestHeldOutCRates),
                       row.condition.c_rate) != std::end(kPretestHeldOutCRates);
    }
    const double t = kelvin_to_celsius(row.condition.t_amb);
    return std::find(std::begin(kPretestHeldOutTempsC), std::end(kPretestHeldOutTempsC), t) !=
           std::end(kPretestHeldOutTempsC);
  };
  // C-rate: one fit on the kept rates. Temperature: each held-out point is
  // predicted from all other rows, so its mirror image across T_opt is visible.
  auto predict_from = [&](const std::vector<std::size_t>& keep, const DatasetRow& row) {
    if (keep.size() < 2) throw UsageError("pre-test needs at least two training rows");
    const Dataset train = report.data.subset(keep);
    const std::vector<OperatingCondition> q{row.condition};
    PretestHoldout h;
    h.value = coord(row.condition, a);
    h.actual = row.eol;
    h.proposed = predict_mean(fit(train.conditions(), train.targets(),
                                  tune_for_sweep(train, proposed_base, axis)), q)(0);
    h.rbf = predict_mean(fit(train.conditions(), train.targets(),
                             tune_for_sweep(train, rbf_base, axis)), q)(0);
    return h;
  };
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < report.data.size(); ++j) {
    if (!held_out(report.data.rows[j])) kept.push_back(j);
  }
  if (kept.size() == report.data.size()) throw UsageError("pre-test sweep lacks the held-out points");
  for (std::size_t i = 0; i < report.data.size(); ++i) {
    const auto& row = report.data.rows[i];
    if (!held_out(row)) continue;
    if (kind == PretestKind::c_rate) {
      report.holdouts.push_back(predict_from(kept, row));
    } else {
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < report.data.size(); ++j) {
        if (j != i) others.push_back(j);
      }
      report.holdouts.push_back(predict_from(others, row));
    }
  }
  return report;
}

}  // namespace eolgp
