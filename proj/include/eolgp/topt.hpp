#pragma once

#include <cstdint>
#include <vector>

#include "eolgp/datagen.hpp"
#include "eolgp/kernels.hpp"
#include "eolgp/topt_model.hpp"

namespace eolgp {

/// Temperature of the largest observed EOL in one (C-rate, DOD) slice.
struct ToptObservation {
  double c_rate = 0.0;
  double dod = 0.0;
  double t_opt = 0.0;  // K
};

/// One entry per slice with at least two temperatures, ordered by (c_rate, dod).
/// Ties resolve to the lower temperature. UsageError when no slice qualifies.
[[nodiscard]] std::vector<ToptObservation> empirical_topt(const Dataset& train);

/// Least-squares polynomial through the empirical optima (Celsius coefficients).
[[nodiscard]] ToptModel fit_topt_polynomial(const std::vector<ToptObservation>& obs, int degree);

struct ToptGridOptions {
  std::vector<double> centers;      // one per coefficient, Celsius units
  std::vector<double> half_widths;  // same length
  int points = 5;                   // per axis; 1 pins the axis
  int rounds = 4;
  double shrink_factor = 0.5;
  int folds = 5;
  std::uint64_t fold_seed = 0;
};

struct ToptRoundTrace {
  int round = 0;
  std::vector<double> best_coeffs;
  double best_rmse = 0.0;
  std::vector<double> grid_rmse;  // every cell of the round, grid-index order
};

struct ToptSearchResult {
  ToptModel model;
  double cv_rmse = 0.0;
  std::vector<ToptRoundTrace> rounds;
};

/// Cross-validated EOL RMSE of a GPR whose kernel uses `topt`; infinity when the
/// polynomial leaves the admissible band on any training point.
[[nodiscard]] double topt_cv_rmse(const Dataset& train, const KernelSpec& base,
                                  const ToptModel& topt, int folds, std::uint64_t fold_seed);

/// Fold label per row: deterministic shuffle keyed by seed, then round-robin.
[[nodiscard]] std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Shrinking coefficient grid search. Each round evaluates the full grid around the
/// current center, recenters on the best cell and scales the half-widths; the best
/// model seen in any round is returned.
[[nodiscard]] ToptSearchResult shrinking_grid_search(const Dataset& train, int degree,
                                                     const KernelSpec& base,
                                                     const ToptGridOptions& options);

/// Grid width giving every basis term a swing of +/- `celsius_span` over the
/// condition box.
[[nodiscard]] std::vector<double> default_half_widths(int degree, double celsius_span);

struct DegreeSweepResult {
  std::vector<ToptSearchResult> by_degree;  // index = degree
};

/// Runs degrees 0..max_degree. Each degree starts from the better of the lifted
/// previous optimum and the least-squares fit to the empirical optima.
[[nodiscard]] DegreeSweepResult topt_degree_sweep(const Dataset& train, const KernelSpec& base,
                                                  int max_degree, ToptGridOptions options,
                                                  double celsius_span = 8.0);

}  // namespace eolgp
