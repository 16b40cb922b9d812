#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eolgp/datagen.hpp"
#include "eolgp/eval.hpp"
#include "eolgp/gpr.hpp"
#include "eolgp/kernels.hpp"
#include "eolgp/topt.hpp"

namespace eolgp::io {

using nlohmann::json;

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);
/// Celsius text for a kelvin value, chosen so that parsing and adding 273.15
/// reproduces the kelvin value exactly.
[[nodiscard]] std::string format_celsius(double kelvin);
/// Strict parse of a whole field; throws DataError naming `what`.
[[nodiscard]] double parse_double(std::string_view text, std::string_view what);

inline constexpr std::string_view kDatasetHeader = "c_rate,t_amb_c,dod_pct,eol_cycles";
inline constexpr std::string_view kTraceHeader = "cycle,soh_pct";
inline constexpr std::string_view kQueryHeader = "c_rate,t_amb_c,dod_pct";

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
/// Provenance is external_file; errors carry the offending line number.
[[nodiscard]] Dataset read_dataset_csv(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] Dataset read_dataset_csv(const std::filesystem::path& path);

/// Query conditions: same columns as the dataset, eol_cycles optional.
[[nodiscard]] std::vector<OperatingCondition> read_query_csv(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const DegradationTrace& trace);
[[nodiscard]] DegradationTrace read_trace_csv(std::istream& in);

[[nodiscard]] json to_json(const ToptModel& m);
[[nodiscard]] ToptModel topt_from_json(const json& j);

[[nodiscard]] json to_json(const KernelSpec& spec);
/// Missing fields keep the values already in `base`.
[[nodiscard]] KernelSpec kernel_spec_from_json(const json& j, KernelSpec base = {});

[[nodiscard]] json to_json(const SimulatorParams& p);
[[nodiscard]] SimulatorParams simulator_params_from_json(const json& j,
                                                         SimulatorParams base = default_simulator_params());

[[nodiscard]] json to_json(const TrainedGpr& model);
[[nodiscard]] TrainedGpr model_from_json(const json& j);

[[nodiscard]] json to_json(const AblationReport& report);
/// One row per variant x seed x metric: variant,seed,metric,value.
void write_ablation_csv(std::ostream& out, const AblationReport& report);
/// Per-condition breakdown: variant,axis,value,rmse,mape,mean_std.
void write_breakdown_csv(std::ostream& out, const AblationReport& report);

[[nodiscard]] json to_json(const PretestReport& report);
/// value,actual,proposed,rbf,proposed_abs_error,rbf_abs_error (temperatures in Celsius).
void write_pretest_holdouts_csv(std::ostream& out, const PretestReport& report);
/// anchor,proposed_error,rbf_error,improvement_pct (temperatures in Celsius).
void write_pretest_alignment_csv(std::ostream& out, const PretestReport& report);

[[nodiscard]] json to_json(const ToptSearchResult& result);
[[nodiscard]] json to_json(const ToptStudy& study);
/// degree,cv_rmse,coeffs (coefficients joined by spaces).
void write_topt_table_csv(std::ostream& out, const ToptStudy& study);

[[nodiscard]] json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace eolgp::io
