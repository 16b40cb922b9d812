#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eolgp/conditions.hpp"
#include "eolgp/kernels.hpp"

namespace eolgp {

/// Exact GP posterior over centered targets.
struct TrainedGpr {
  std::vector<OperatingCondition> train_x;
  Eigen::VectorXd train_y;  // raw targets, cycles
  double y_mean = 0.0;
  Eigen::MatrixXd chol_l;  // lower factor of K + noise^2 I (+ jitter I)
  Eigen::VectorXd alpha;   // (K + noise^2 I)^-1 (y - y_mean)
  double jitter = 0.0;     // diagonal added on top of noise^2, zero unless needed
  KernelSpec spec;
};

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
};

/// Factorizes the training covariance. If Cholesky fails, a jitter of
/// 1e-10 * trace / n is added and escalated by x10 up to 1e-4 * trace / n.
[[nodiscard]] TrainedGpr fit(std::span<const OperatingCondition> x, const Eigen::VectorXd& y,
                             const KernelSpec& spec);

/// Rebuilds the factor for stored inputs and keeps the given weight vector.
[[nodiscard]] TrainedGpr restore(std::vector<OperatingCondition> x, Eigen::VectorXd y, double y_mean,
                                 Eigen::VectorXd alpha, double jitter, const KernelSpec& spec);

[[nodiscard]] std::vector<Prediction> predict(const TrainedGpr& model,
                                              std::span<const OperatingCondition> x_star);

/// Posterior mean only; skips the variance solve.
[[nodiscard]] Eigen::VectorXd predict_mean(const TrainedGpr& model,
                                           std::span<const OperatingCondition> x_star);

[[nodiscard]] double log_marginal_likelihood(const TrainedGpr& model);

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

/// One searchable hyperparameter. steps == 1 or lo == hi pins the value to lo.
struct ParamAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;
  bool log_scale = true;

  [[nodiscard]] bool fixed() const noexcept { return steps <= 1 || lo == hi; }
};

enum class SearchStrategy { grid, grid_then_refine };

struct SearchSpace {
  std::vector<ParamAxis> axes;
  SearchStrategy strategy = SearchStrategy::grid_then_refine;
  int refine_sweeps = 6;     // coordinate sweeps after the grid
  int refine_points = 5;     // probes per axis per sweep (odd keeps the incumbent on the stencil)
  double refine_shrink = 0.5;
};

struct SearchTraceEntry {
  std::string phase;  // "grid" or "refine"
  std::vector<double> values;
  double lml = 0.0;
};

struct SearchResult {
  KernelSpec best;
  double best_lml = 0.0;
  std::vector<SearchTraceEntry> trace;  // improvements only
  std::size_t evaluations = 0;
};

/// Maximizes the log marginal likelihood over a log/linear grid, then refines each
/// free axis by shrinking coordinate-wise interval search inside its box.
/// Ties keep the earliest grid index. Throws UsageError on an empty space.
[[nodiscard]] SearchResult optimize_hyperparams(std::span<const OperatingCondition> x,
                                                const Eigen::VectorXd& y, const KernelSpec& base,
                                                const SearchSpace& space);

/// Default search box for a kernel kind, centered on the values in `base`.
[[nodiscard]] SearchSpace default_search_space(const KernelSpec& base);

}  // namespace eolgp
