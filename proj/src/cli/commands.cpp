#include "eolgp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eolgp/datagen.hpp"
#include "eolgp/errors.hpp"
#include "eolgp/eval.hpp"
#include "eolgp/gpr.hpp"
#include "eolgp/io.hpp"
#include "eolgp/topt.hpp"

namespace eolgp {

namespace fs = std::filesystem;
using io::json;

namespace {

// Flags common to every subcommand. Unset optionals fall back to the config file,
// then to built-in defaults.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

// Merged view of the JSON config file (may be empty).
class Config {
 public:
  explicit Config(const std::string& path) {
    if (path.empty()) return;
    doc_ = io::read_json_file(path);
    if (!doc_.is_object()) throw DataError(path + ": config must be a JSON object");
    static const char* kKnown[] = {"seed", "out",      "data",     "simulator", "kernel",
                                   "split", "topt",    "ablation", "max_cycles"};
    for (const auto& [key, _] : doc_.items()) {
      if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
        throw DataError(path + ": unknown config key '" + key + "'");
      }
    }
  }

  template <typename T>
  std::optional<T> get(const char* key) const {
    if (!doc_.contains(key)) return std::nullopt;
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw DataError(std::string("config key '") + key + "': " + e.what());
    }
  }

  const json* section(const char* key) const {
    return doc_.contains(key) ? &doc_.at(key) : nullptr;
  }

 private:
  json doc_ = json::object();
};

template <typename T>
T pick(const std::optional<T>& flag, const std::optional<T>& file, T fallback) {
  if (flag) return *flag;
  if (file) return *file;
  return fallback;
}

std::uint64_t resolve_seed(const CommonFlags& f, const Config& cfg) {
  return pick(f.seed, cfg.get<std::uint64_t>("seed"), std::uint64_t{0});
}

fs::path resolve_out(const CommonFlags& f, const Config& cfg) {
  if (!f.out.empty()) return f.out;
  if (auto v = cfg.get<std::string>("out")) return *v;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

fs::path resolve_data(const std::string& flag, const Config& cfg) {
  std::string path = flag;
  if (path.empty()) path = cfg.get<std::string>("data").value_or("");
  if (path.empty()) throw UsageError("no dataset given (use --data or the config key \"data\")");
  if (!fs::exists(path)) throw DataError("dataset '" + path + "' does not exist");
  return path;
}

SimulatorParams resolve_simulator(const Config& cfg) {
  SimulatorParams p = default_simulator_params();
  if (const json* s = cfg.section("simulator")) p = io::simulator_params_from_json(*s, p);
  return p;
}

KernelSpec resolve_kernel(const Config& cfg, KernelSpec base) {
  if (const json* k = cfg.section("kernel")) base = io::kernel_spec_from_json(*k, base);
  return base;
}

SplitSpec resolve_split(const Config& cfg) {
  SplitSpec s;
  if (const json* j = cfg.section("split")) {
    s.test_fraction = j->value("test_fraction", s.test_fraction);
    if (j->contains("seeds")) s.seeds = j->at("seeds").get<std::vector<std::uint64_t>>();
  }
  validate(s);
  return s;
}

struct ToptFlags {
  std::optional<int> max_degree;
  std::optional<int> points;
  std::optional<int> rounds;
  std::optional<int> folds;
  std::optional<double> span;
};

struct ToptSettings {
  int max_degree = 2;
  ToptGridOptions grid;
  double span = 8.0;
};

ToptSettings resolve_topt(const ToptFlags& f, const Config& cfg, ToptSettings s) {
  if (const json* j = cfg.section("topt")) {
    s.max_degree = j->value("max_degree", s.max_degree);
    s.grid.points = j->value("points", s.grid.points);
    s.grid.rounds = j->value("rounds", s.grid.rounds);
    s.grid.folds = j->value("folds", s.grid.folds);
    s.grid.shrink_factor = j->value("shrink", s.grid.shrink_factor);
    s.span = j->value("celsius_span", s.span);
  }
  if (f.max_degree) s.max_degree = *f.max_degree;
  if (f.points) s.grid.points = *f.points;
  if (f.rounds) s.grid.rounds = *f.rounds;
  if (f.folds) s.grid.folds = *f.folds;
  if (f.span) s.span = *f.span;
  if (s.max_degree < 0 || s.max_degree > 2) throw UsageError("topt max degree must be 0, 1 or 2");
  if (s.grid.points < 1 || s.grid.rounds < 1 || s.grid.folds < 2) {
    throw UsageError("topt grid needs points >= 1, rounds >= 1 and folds >= 2");
  }
  return s;
}

void write_json(const fs::path& path, const json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  io::write_text_file(path, s.str());
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct GenerateFlags {
  std::optional<long> max_cycles;
  std::optional<double> cell_sigma;
  bool traces = false;
  std::string name = "dataset.csv";
};

int cmd_generate(const CommonFlags& common, const GenerateFlags& f, std::ostream& out) {
  const Config cfg(common.config);
  SimulatorParams p = resolve_simulator(cfg);
  if (auto v = cfg.get<long>("max_cycles")) p.max_cycles = *v;
  if (f.max_cycles) p.max_cycles = *f.max_cycles;
  if (f.cell_sigma) p.cell_sigma = *f.cell_sigma;
  validate(p);
  const auto seed = resolve_seed(common, cfg);
  const fs::path dir = resolve_out(common, cfg);

  std::vector<DegradationTrace> traces;
  const Dataset data = generate_grid_dataset(p, seed, f.traces ? &traces : nullptr);
  io::write_dataset_csv(dir / f.name, data);
  if (f.traces) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& c = data.rows[i].condition;
      const std::string file = "trace_c" + io::format_double(c.c_rate) + "_t" +
                               io::format_celsius(c.t_amb) + "_dod" + io::format_double(c.dod) + ".csv";
      write_stream(dir / "traces" / file, [&](std::ostream& s) { io::write_trace_csv(s, traces[i]); });
    }
  }
  const auto y = data.targets();
  out << "wrote " << data.size() << " rows to " << (dir / f.name).string() << "\n"
      << "EOL range " << y.minCoeff() << " - " << y.maxCoeff() << " cycles\n";
  return 0;
}

int cmd_pretest(const CommonFlags& common, const std::string& which, std::ostream& out) {
  const Config cfg(common.config);
  const PretestKind kind = which == "c" ? PretestKind::c_rate : PretestKind::temperature;
  const fs::path dir = resolve_out(common, cfg);
  const PretestReport r = run_pretest(kind, WangParams{}, resolve_simulator(cfg));
  const std::string stem = "pretest_" + which;
  write_json(dir / (stem + ".json"), io::to_json(r));
  write_stream(dir / (stem + "_holdouts.csv"), [&](std::ostream& s) { io::write_pretest_holdouts_csv(s, r); });
  write_stream(dir / (stem + "_alignment.csv"), [&](std::ostream& s) { io::write_pretest_alignment_csv(s, r); });

  const bool temp = kind == PretestKind::temperature;
  const char* unit = temp ? " degC" : " C";
  const char* name = temp ? "T kernel" : "C kernel";
  out << std::fixed << std::setprecision(2);
  out << "held-out predictions (" << name << " vs RBF)\n";
  for (const auto& h : r.holdouts) {
    out << "  " << (temp ? kelvin_to_celsius(h.value) : h.value) << unit << ": actual " << h.actual
        << ", " << name << " " << h.proposed << " (|err| " << h.proposed_error() << "), RBF " << h.rbf
        << " (|err| " << h.rbf_error() << ")\n";
  }
  out << "alignment error per anchor\n";
  const auto gain = r.improvement();
  for (std::size_t i = 0; i < gain.size(); ++i) {
    const double a = r.proposed_alignment.anchors[i];
    out << "  " << (temp ? kelvin_to_celsius(a) : a) << unit << ": RBF " << std::setprecision(4)
        << r.rbf_alignment.errors[i] << ", " << name << " " << r.proposed_alignment.errors[i]
        << std::setprecision(2) << ", improvement " << gain[i] << " %\n";
  }
  out << "mean held-out error: " << name << " " << r.proposed_error() << ", RBF " << r.rbf_error()
      << "\n";
  return r.proposed_better() ? 0 : static_cast<int>(ExitCode::acceptance);
}

int cmd_topt_search(const CommonFlags& common, const std::string& data_flag, const ToptFlags& tf,
                    std::ostream& out) {
  const Config cfg(common.config);
  const Dataset data = io::read_dataset_csv(resolve_data(data_flag, cfg));
  const auto seed = resolve_seed(common, cfg);
  const SplitSpec split_spec = resolve_split(cfg);
  const fs::path dir = resolve_out(common, cfg);
  ToptSettings s = resolve_topt(tf, cfg, {});
  s.grid.fold_seed = seed;

  const auto [train, test] = split(data, split_spec.test_fraction, seed);
  const KernelSpec start = resolve_kernel(cfg, KernelSpec{KernelKind::combined});
  const ToptStudy study = run_topt_study(train, start, s.max_degree, s.grid, s.span);

  write_json(dir / "topt_search.json", io::to_json(study));
  write_stream(dir / "topt_search.csv", [&](std::ostream& os) { io::write_topt_table_csv(os, study); });
  for (const auto& r : study.sweep.by_degree) {
    validate_over_box(r.model);
    KernelSpec k = study.kernel;
    k.physics.topt_model = r.model;
    write_json(dir / ("topt_degree" + std::to_string(r.model.degree) + ".json"), io::to_json(k));
  }
  out << "degree  cv_rmse (cycles)\n" << std::fixed << std::setprecision(3);
  for (const auto& r : study.sweep.by_degree) {
    out << "  " << r.model.degree << "     " << r.cv_rmse << "\n";
  }
  return 0;
}

struct FitFlags {
  std::string data;
  std::optional<std::string> kernel;
  std::string kernel_file;
  bool optimize = false;
  std::string name = "model.json";
};

int cmd_fit(const CommonFlags& common, const FitFlags& f, std::ostream& out) {
  const Config cfg(common.config);
  const Dataset data = io::read_dataset_csv(resolve_data(f.data, cfg));
  const fs::path dir = resolve_out(common, cfg);
  KernelSpec spec = resolve_kernel(cfg, KernelSpec{KernelKind::combined});
  if (!f.kernel_file.empty()) spec = io::kernel_spec_from_json(io::read_json_file(f.kernel_file), spec);
  if (f.kernel) spec.kind = kernel_kind_from_string(*f.kernel);
  const auto x = data.conditions();
  const Eigen::VectorXd y = data.targets();
  if (f.optimize) spec = optimize_hyperparams(x, y, spec, default_search_space(spec)).best;
  const TrainedGpr model = fit(x, y, spec);
  write_json(dir / f.name, io::to_json(model));
  out << "fitted " << to_string(spec.kind) << " kernel on " << data.size() << " rows, log marginal "
      << "likelihood " << log_marginal_likelihood(model) << "\nwrote " << (dir / f.name).string()
      << "\n";
  return 0;
}

struct PredictFlags {
  std::string model;
  std::string query;
  std::optional<double> c_rate;
  std::optional<double> t_amb_c;
  std::optional<double> dod;
  std::string name = "predictions.csv";
};

bool outside_training_box(const TrainedGpr& m, const OperatingCondition& q) {
  auto outside = [&](auto get) {
    double lo = get(m.train_x.front());
    double hi = lo;
    for (const auto& x : m.train_x) {
      lo = std::min(lo, get(x));
      hi = std::max(hi, get(x));
    }
    return get(q) < lo || get(q) > hi;
  };
  return outside([](const OperatingCondition& x) { return x.c_rate; }) ||
         outside([](const OperatingCondition& x) { return x.t_amb; }) ||
         outside([](const OperatingCondition& x) { return x.dod; });
}

int cmd_predict(const CommonFlags& common, const PredictFlags& f, std::ostream& out,
                std::ostream& err) {
  const Config cfg(common.config);
  if (f.model.empty()) throw UsageError("predict needs --model");
  const TrainedGpr model = io::model_from_json(io::read_json_file(f.model));
  const fs::path dir = resolve_out(common, cfg);
  std::vector<OperatingCondition> queries;
  if (!f.query.empty()) {
    queries = io::read_query_csv(f.query);
  } else {
    if (!f.c_rate || !f.t_amb_c || !f.dod) {
      throw UsageError("predict needs --query or all of --c-rate, --t-amb, --dod");
    }
    OperatingCondition q{*f.c_rate, celsius_to_kelvin(*f.t_amb_c), *f.dod};
    validate(q);
    queries.push_back(q);
  }
  const auto preds = predict(model, queries);
  std::ostringstream csv;
  csv << "c_rate,t_amb_c,dod_pct,mean,std,ci95_low,ci95_high,extrapolation\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& q = queries[i];
    const auto& p = preds[i];
    const bool extrap = outside_training_box(model, q);
    csv << io::format_double(q.c_rate) << ',' << io::format_celsius(q.t_amb) << ','
        << io::format_double(q.dod) << ',' << io::format_double(p.mean) << ','
        << io::format_double(p.std) << ',' << io::format_double(p.ci95_low) << ','
        << io::format_double(p.ci95_high) << ',' << (extrap ? 1 : 0) << '\n';
    if (extrap) {
      err << "warning: (" << q.c_rate << " C, " << io::format_celsius(q.t_amb) << " degC, " << q.dod
          << " %) lies outside the training range; the prediction is an extrapolation\n";
    }
  }
  io::write_text_file(dir / f.name, csv.str());
  if (preds.size() == 1) {
    out << std::fixed << std::setprecision(2) << "EOL " << preds[0].mean << " cycles, std "
        << preds[0].std << ", 95% interval [" << preds[0].ci95_low << ", " << preds[0].ci95_high
        << "]\n";
  }
  out << "wrote " << preds.size() << " predictions to " << (dir / f.name).string() << "\n";
  return 0;
}

struct AblationFlags {
  std::string data;
  bool no_tune = false;
  ToptFlags topt;
};

int cmd_ablation(const CommonFlags& common, const AblationFlags& f, std::ostream& out) {
  const Config cfg(common.config);
  const Dataset data = io::read_dataset_csv(resolve_data(f.data, cfg));
  const fs::path dir = resolve_out(common, cfg);
  const SplitSpec split_spec = resolve_split(cfg);

  AblationSetup setup = default_ablation_setup();
  for (auto& s : setup.specs) s = resolve_kernel(cfg, s);
  for (std::size_t i = 0; i < 4; ++i) setup.specs[i].kind = kAllKernelKinds[i];
  if (const json* j = cfg.section("ablation")) {
    setup.tuning.enabled = j->value("tune", setup.tuning.enabled);
    setup.tuning.tune_topt = j->value("tune_topt", setup.tuning.tune_topt);
  }
  if (f.no_tune) setup.tuning.enabled = false;
  ToptSettings defaults;
  defaults.max_degree = setup.tuning.topt_degree;
  defaults.grid = setup.tuning.topt_grid;
  defaults.span = setup.tuning.topt_celsius_span;
  const ToptSettings ts = resolve_topt(f.topt, cfg, defaults);
  setup.tuning.topt_degree = ts.max_degree;
  setup.tuning.topt_grid = ts.grid;
  setup.tuning.topt_celsius_span = ts.span;

  const AblationReport report = run_ablation(data, split_spec, setup);
  write_json(dir / "ablation.json", io::to_json(report));
  write_stream(dir / "ablation.csv", [&](std::ostream& s) { io::write_ablation_csv(s, report); });
  write_stream(dir / "ablation_breakdown.csv", [&](std::ostream& s) { io::write_breakdown_csv(s, report); });

  out << "variant     rmse      mape(%)   mean std\n" << std::fixed << std::setprecision(3);
  for (const auto& v : report.variants) {
    out << "  " << std::left << std::setw(10) << to_string(v.kind) << std::right << std::setw(9)
        << v.average.rmse << std::setw(10) << v.average.mape << std::setw(10) << v.average.mean_std
        << "\n";
  }
  out << std::setprecision(2) << "combined vs rbf RMSE improvement: " << report.combined_improvement()
      << " %\n";
  if (!report.orderings_hold()) {
    out << "directional orderings do not hold\n";
    return static_cast<int>(ExitCode::acceptance);
  }
  out << "directional orderings hold\n";
  return 0;
}

void add_topt_flags(CLI::App* cmd, ToptFlags& f) {
  cmd->add_option("--max-degree", f.max_degree, "Highest T_opt polynomial degree (0-2)");
  cmd->add_option("--points", f.points, "Grid points per coefficient axis");
  cmd->add_option("--rounds", f.rounds, "Shrinking rounds");
  cmd->add_option("--folds", f.folds, "Cross-validation folds");
  cmd->add_option("--span", f.span, "Initial grid swing per basis term, degC");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Condition-aware Gaussian process regression for battery end-of-life prediction",
               "eolgp"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--seed", common.seed, "Seed for generation, splits and folds (default 0)");
  app.add_option("--config", common.config, "JSON config file; flags override it")
      ->check(CLI::ExistingFile);
  app.add_option("--out", common.out,
                 std::string("Output directory (default $") + kOutDirEnv + " or .)");

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Simulate the 100-cell operating-condition grid");
  generate->add_option("--max-cycles", gen.max_cycles, "Cycle budget per cell");
  generate->add_option("--cell-sigma", gen.cell_sigma, "Cell-to-cell spread of the fade rate");
  generate->add_flag("--traces", gen.traces, "Also write per-cell SOH traces under traces/");
  generate->add_option("--name", gen.name, "Dataset file name")->capture_default_str();

  std::string which;
  auto* pretest = app.add_subcommand("pretest", "Compare a proposed kernel with RBF on a 1-D sweep");
  pretest->add_option("which", which, "c (C-rate kernel) or t (temperature kernel)")
      ->required()
      ->check(CLI::IsMember({"c", "t"}));

  std::string topt_data;
  ToptFlags topt_flags;
  auto* topt = app.add_subcommand("topt-search", "Grid-search T_opt polynomials of degree 0..2");
  topt->add_option("--data", topt_data, "Dataset CSV");
  add_topt_flags(topt, topt_flags);

  FitFlags fit_flags;
  auto* fitc = app.add_subcommand("fit", "Fit a GPR model and save it");
  fitc->add_option("--data", fit_flags.data, "Dataset CSV");
  fitc->add_option("--kernel", fit_flags.kernel, "rbf, c_only, t_only or combined")
      ->check(CLI::IsMember({"rbf", "c_only", "t_only", "combined"}));
  fitc->add_option("--kernel-file", fit_flags.kernel_file, "Kernel JSON (e.g. from topt-search)")
      ->check(CLI::ExistingFile);
  fitc->add_flag("--optimize", fit_flags.optimize, "Search hyperparameters by marginal likelihood");
  fitc->add_option("--name", fit_flags.name, "Model file name")->capture_default_str();

  PredictFlags pred_flags;
  auto* predictc = app.add_subcommand("predict", "Predict EOL with a saved model");
  predictc->add_option("--model", pred_flags.model, "Model JSON")->check(CLI::ExistingFile);
  predictc->add_option("--query", pred_flags.query, "Query CSV (c_rate,t_amb_c,dod_pct)")
      ->check(CLI::ExistingFile);
  predictc->add_option("--c-rate", pred_flags.c_rate, "Single query C-rate");
  predictc->add_option("--t-amb", pred_flags.t_amb_c, "Single query ambient temperature, degC");
  predictc->add_option("--dod", pred_flags.dod, "Single query depth of discharge, %");
  predictc->add_option("--name", pred_flags.name, "Prediction file name")->capture_default_str();

  AblationFlags abl_flags;
  auto* ablation = app.add_subcommand("ablation", "Compare the four kernel variants over 5 splits");
  ablation->add_option("--data", abl_flags.data, "Dataset CSV");
  ablation->add_flag("--no-tune", abl_flags.no_tune, "Use the starting hyperparameters as given");
  add_topt_flags(ablation, abl_flags.topt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (*generate) return cmd_generate(common, gen, out);
    if (*pretest) return cmd_pretest(common, which, out);
    if (*topt) return cmd_topt_search(common, topt_data, topt_flags, out);
    if (*fitc) return cmd_fit(common, fit_flags, out);
    if (*predictc) return cmd_predict(common, pred_flags, out, err);
    if (*ablation) return cmd_ablation(common, abl_flags, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::data);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerical);
  }
  return static_cast<int>(ExitCode::usage);
}

}  // namespace eolgp
