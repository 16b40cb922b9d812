#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eolgp/conditions.hpp"

namespace eolgp {

/// Empirical capacity-fade law Q_loss = b * exp(a * c) * n^d (percent).
struct WangParams {
  double a = 0.7;
  double b = 0.3;
  double d = 0.6;
  double loss_threshold = 20.0;  // percent loss that defines end of life
};

void validate(const WangParams& p);

[[nodiscard]] double wang_qloss(double c_rate, double cycle_number, const WangParams& p);

/// Smallest whole cycle n with wang_qloss(n) >= loss_threshold.
[[nodiscard]] long wang_eol(double c_rate, const WangParams& p);

/// Cycle-resolved surrogate: SEI power-law fade plus a quadratic lithium-plating
/// knee. SEI is accelerated by heat, plating by cold; both by C-rate.
/// Member defaults are the shipped calibration: every grid slice peaks at
/// an interior temperature, the optimum warms with C-rate, and the cold branch
/// is steeper than the hot one (plating activation / 2 exceeds SEI activation / z).
struct SimulatorParams {
  double sei_prefactor = 0.09536;   // % / cycle^z
  double sei_c_coeff = 0.502;       // 1/C
  double sei_activation = 4937.0;   // K
  double sei_exponent = 0.583;
  double dod_slope = 0.0105;        // fractional SEI increase per % DOD above 60 %
  double plate_prefactor = 4.27e-10;  // % / cycle^2
  double plate_c_coeff = 5.38;      // 1/C
  double plate_activation = 21450.0;  // K
  double knee_onset_fraction = 0.00427;
  double t_ref = 298.15;          // K
  double cell_sigma = 0.0;
  long max_cycles = 20000;

  friend bool operator==(const SimulatorParams&, const SimulatorParams&) = default;
};

/// SimulatorParams{}; see README for the calibration's properties.
[[nodiscard]] SimulatorParams default_simulator_params();

void validate(const SimulatorParams& p);

struct DegradationTrace {
  std::vector<double> soh;  // soh[n] after n cycles, soh[0] = 100
  std::optional<long> eol;  // first n with soh[n] <= 80
};

inline constexpr double kEolSoh = 80.0;

[[nodiscard]] double sei_rate(const OperatingCondition& oc, const SimulatorParams& p);
[[nodiscard]] double plate_rate(const OperatingCondition& oc, const SimulatorParams& p);

/// Deterministic for a fixed seed; with cell_sigma == 0 the seed is irrelevant.
[[nodiscard]] DegradationTrace simulate_cell(const OperatingCondition& oc,
                                             const SimulatorParams& p, std::uint64_t seed);

enum class Provenance { wang, surrogate, external_file };

[[nodiscard]] std::string_view to_string(Provenance p) noexcept;
[[nodiscard]] Provenance provenance_from_string(std::string_view s);

struct DatasetRow {
  OperatingCondition condition;
  double eol = 0.0;  // cycles

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct Dataset {
  std::vector<DatasetRow> rows;
  Provenance provenance = Provenance::external_file;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
  [[nodiscard]] std::vector<OperatingCondition> conditions() const;
  [[nodiscard]] Eigen::VectorXd targets() const;
  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
};

/// Throws DataError on a nonpositive EOL or a repeated condition.
void validate(const Dataset& d);

/// Operating-condition grid: 4 C-rates x 5 temperatures x 5 DODs.
inline constexpr double kGridCRates[] = {1.0, 1.3, 1.7, 2.0};
inline constexpr double kGridTempsC[] = {5.0, 15.0, 25.0, 35.0, 45.0};
inline constexpr double kGridDods[] = {40.0, 50.0, 60.0, 70.0, 80.0};

/// Row index ordering: C-rate major, then temperature, then DOD.
[[nodiscard]] std::vector<OperatingCondition> grid_conditions();

/// Simulates every grid cell; per-cell seed = seed XOR row index. Throws DataError
/// naming the first condition that fails to reach end of life.
[[nodiscard]] Dataset generate_grid_dataset(const SimulatorParams& p, std::uint64_t seed,
                                            std::vector<DegradationTrace>* traces = nullptr);

/// Wang-law EOL sweep along the C-rate axis (temperature and DOD held at
/// 25 C / 60 %, which the law ignores).
[[nodiscard]] Dataset wang_sweep(std::span<const double> c_rates, const WangParams& p);

inline constexpr double kPretestTempsC[] = {15.0, 25.0, 35.0, 45.0, 55.0};
inline constexpr double kPretestCRate = 0.4;
inline constexpr double kPretestDod = 100.0;
inline constexpr double kPretestOptimumC = 35.0;

struct PretestCurve {
  Dataset data;
  double plate_scale = 1.0;  // multiplier applied to plate_prefactor
};

/// Temperature sweep at 0.4 C and full DOD. The plating prefactor is rescaled over
/// a fixed log grid; of the scales giving 35 C the strict maximum, the one with
/// the most balanced 25 C / 45 C pair wins. DataError if no scale qualifies.
[[nodiscard]] PretestCurve pretest_t_curve(const SimulatorParams& p);

}  // namespace eolgp
