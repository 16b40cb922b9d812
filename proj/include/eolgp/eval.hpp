#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eolgp/datagen.hpp"
#include "eolgp/gpr.hpp"
#include "eolgp/kernels.hpp"
#include "eolgp/topt.hpp"

namespace eolgp {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

[[nodiscard]] double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Mean absolute percentage error, reported in percent.
[[nodiscard]] double mape(std::span<const double> actual, std::span<const double> predicted);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.2;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
};

void validate(const SplitSpec& spec);

/// ceil(n * f) rows go to test, taken from the front of the seeded shuffle.
/// Returns (train, test); both keep the original row order.
[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Kernel-vs-EOL alignment
// ---------------------------------------------------------------------------

/// min(a, b) / max(a, b).
[[nodiscard]] double eol_similarity(double eol_i, double eol_j);

/// exp(-(a - b)^2 / (2 scale^2)); 1 when scale is zero and a == b.
[[nodiscard]] double eol_correlation(double eol_i, double eol_j, double scale);

/// How the "actual" pairwise EOL correlation of a sweep is measured.
/// gaussian: eol_correlation with scale = half the sweep's EOL range.
/// ratio: eol_similarity.
enum class Correlation { gaussian, ratio };

enum class Axis { c_rate = 0, temperature = 1, dod = 2 };

[[nodiscard]] std::string_view to_string(Axis axis) noexcept;

struct AlignmentResult {
  Axis axis = Axis::c_rate;
  std::vector<double> anchors;  // sweep values in ascending order (kelvin for temperature)
  std::vector<double> errors;   // mean |similarity - kernel| per anchor
  [[nodiscard]] double mean_error() const;
};

/// Requires a one-dimensional sweep along `axis` with at least two rows;
/// UsageError otherwise.
[[nodiscard]] AlignmentResult kernel_alignment_error(const Dataset& data, const KernelSpec& spec,
                                                     Axis axis,
                                                     Correlation mode = Correlation::gaussian);

/// (err_rbf - err_new) / err_rbf * 100.
[[nodiscard]] double improvement_rate(double err_rbf, double err_new);

/// Length scale (log-grid then golden refinement) minimizing the mean alignment
/// error of the factor on `axis`. Returns the tuned spec.
[[nodiscard]] KernelSpec fit_alignment_scale(const Dataset& data, const KernelSpec& spec, Axis axis,
                                             Correlation mode = Correlation::gaussian);

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

struct VariantMetrics {
  double rmse = 0.0;
  double mape = 0.0;
  double mean_std = 0.0;
};

struct ConditionBreakdown {
  // axis value (Celsius for temperature) -> metrics pooled over all seeds' test rows
  std::map<double, VariantMetrics> by_c_rate;
  std::map<double, VariantMetrics> by_temperature;
  std::map<double, VariantMetrics> by_dod;
};

struct VariantReport {
  KernelKind kind = KernelKind::rbf;
  std::vector<VariantMetrics> per_seed;
  std::vector<KernelSpec> tuned_specs;  // hyperparameters used for each seed
  VariantMetrics average;
  ConditionBreakdown breakdown;
};

struct AblationReport {
  SplitSpec split;
  std::vector<VariantReport> variants;  // rbf, c_only, t_only, combined

  [[nodiscard]] const VariantReport& variant(KernelKind kind) const;
  /// RMSE reduction of combined over rbf, percent.
  [[nodiscard]] double combined_improvement() const;
  /// Directional orderings expected from condition-aware kernels.
  [[nodiscard]] bool orderings_hold() const;
};

/// Per-split tuning applied before each variant is fitted.
struct AblationTuning {
  bool enabled = true;
  bool tune_topt = true;
  int topt_degree = 2;
  ToptGridOptions topt_grid{};   // centers/half-widths filled per split when empty
  double topt_celsius_span = 8.0;
};

struct AblationSetup {
  std::array<KernelSpec, 4> specs;  // starting points, indexed like kAllKernelKinds
  AblationTuning tuning{};
};

[[nodiscard]] AblationSetup default_ablation_setup();

/// Tunes (optionally) and evaluates every variant on every seed's split.
[[nodiscard]] AblationReport run_ablation(const Dataset& data, const SplitSpec& spec,
                                          const AblationSetup& setup);

struct ToptStudy {
  KernelSpec kernel;  // combined kernel after the marginal-likelihood search
  DegreeSweepResult sweep;
};

/// Marginal-likelihood search for the combined kernel on `train`, then the T_opt
/// degree sweep 0..max_degree with that kernel. Empty grid centers/half-widths
/// are filled by the sweep.
[[nodiscard]] ToptStudy run_topt_study(const Dataset& train, const KernelSpec& start, int max_degree,
                                       const ToptGridOptions& grid, double celsius_span);

/// Tunes all four variants on one training set: T_opt search with the combined
/// kernel, then a marginal-likelihood search per variant.
[[nodiscard]] std::array<KernelSpec, 4> tune_variants(const Dataset& train,
                                                      const AblationSetup& setup,
                                                      std::uint64_t fold_seed);

// ---------------------------------------------------------------------------
// Pre-tests
// ---------------------------------------------------------------------------

enum class PretestKind { c_rate, temperature };

[[nodiscard]] std::string_view to_string(PretestKind kind) noexcept;

struct PretestHoldout {
  double value = 0.0;  // held-out C-rate or temperature (kelvin)
  double actual = 0.0;
  double proposed = 0.0;
  double rbf = 0.0;
  [[nodiscard]] double proposed_error() const { return std::abs(proposed - actual); }
  [[nodiscard]] double rbf_error() const { return std::abs(rbf - actual); }
};

struct PretestReport {
  PretestKind kind = PretestKind::c_rate;
  Dataset data;
  double plate_scale = 1.0;  // temperature pre-test calibration, 1 for the C-rate one
  KernelSpec proposed;       // scales fitted to the full sweep (alignment table)
  KernelSpec rbf;
  std::vector<PretestHoldout> holdouts;
  AlignmentResult proposed_alignment;
  AlignmentResult rbf_alignment;

  /// Per-anchor alignment improvement of the proposed kernel, percent.
  [[nodiscard]] std::vector<double> improvement() const;
  [[nodiscard]] double proposed_error() const;  // mean absolute holdout error
  [[nodiscard]] double rbf_error() const;
  [[nodiscard]] bool proposed_better() const { return proposed_error() < rbf_error(); }
};

inline constexpr double kPretestCRates[] = {1.0, 1.5, 2.0, 2.5, 3.0};
inline constexpr double kPretestHeldOutCRates[] = {1.5, 2.5};
inline constexpr double kPretestHeldOutTempsC[] = {25.0, 45.0};

/// C-rate pre-test: Wang sweep, C kernel against RBF, 1.5 C and 2.5 C predicted
/// from the other three rates. Temperature pre-test: surrogate curve peaking at
/// 35 C, T kernel (T_opt pinned at 35 C) against RBF, 25 C and 45 C each
/// predicted from the other four rows. Kernel scales come from the alignment fit
/// on the training rows; amplitudes from the marginal likelihood.
[[nodiscard]] PretestReport run_pretest(PretestKind kind, const WangParams& wang,
                                        const SimulatorParams& sim);

/// Same analysis on a caller-supplied sweep (C-rates for c_rate, temperatures
/// around 35 C for temperature).
[[nodiscard]] PretestReport run_pretest(PretestKind kind, Dataset sweep);

}  // namespace eolgp
