#include "eolgp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "eolgp/errors.hpp"

namespace eolgp::io {

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_celsius(double kelvin) {
  const double c = kelvin_to_celsius(kelvin);
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    const auto res = std::to_chars(buf, buf + sizeof buf, c, std::chars_format::general, precision);
    double back = 0.0;
    std::from_chars(buf, res.ptr, back);
    // Re-emit the parsed value so short precisions never come out as "2e+01".
    if (celsius_to_kelvin(back) == kelvin) return format_double(back);
  }
  return format_double(c);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
    throw DataError(std::string(what) + ": cannot parse '" + std::string(text) + "' as a number");
  }
  if (!std::isfinite(v)) throw DataError(std::string(what) + ": value must be finite");
  return v;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << kDatasetHeader << '\n';
  for (const auto& r : data.rows) {
    out << format_double(r.condition.c_rate) << ',' << format_celsius(r.condition.t_amb) << ','
        << format_double(r.condition.dod) << ',' << format_double(r.eol) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream s;
  write_dataset_csv(s, data);
  write_text_file(path, s.str());
}

namespace {

template <typename RowFn>
void read_csv(std::istream& in, std::string_view source, std::string_view header,
              std::size_t min_fields, std::size_t max_fields, RowFn&& on_row) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!have_header) {
      auto fields = split_fields(t);
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + std::string(fields[i]);
      if (joined.rfind(header, 0) != 0) {
        throw DataError(where + ": expected header '" + std::string(header) + "'");
      }
      have_header = true;
      continue;
    }
    const auto fields = split_fields(t);
    if (fields.size() < min_fields || fields.size() > max_fields) {
      throw DataError(where + ": expected " + std::to_string(max_fields) + " fields, got " +
                      std::to_string(fields.size()));
    }
    try {
      on_row(fields, where);
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw DataError(where + ": " + msg);
    }
  }
  if (!have_header) throw DataError(std::string(source) + ": empty file (missing header)");
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, std::string_view source) {
  Dataset d;
  d.provenance = Provenance::external_file;
  read_csv(in, source, kDatasetHeader, 4, 4, [&](const auto& f, const std::string& where) {
    DatasetRow row;
    row.condition.c_rate = parse_double(f[0], "c_rate");
    row.condition.t_amb = celsius_to_kelvin(parse_double(f[1], "t_amb_c"));
    row.condition.dod = parse_double(f[2], "dod_pct");
    row.eol = parse_double(f[3], "eol_cycles");
    validate(row.condition);
    if (!(row.eol >= 1.0)) throw DataError(where + ": eol_cycles must be at least 1");
    d.rows.push_back(row);
  });
  try {
    validate(d);
  } catch (const Error& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return read_dataset_csv(in, path.string());
}

std::vector<OperatingCondition> read_query_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file '" + path.string() + "'");
  std::vector<OperatingCondition> out;
  read_csv(in, path.string(), kQueryHeader, 3, 4, [&](const auto& f, const std::string&) {
    OperatingCondition oc{parse_double(f[0], "c_rate"),
                          celsius_to_kelvin(parse_double(f[1], "t_amb_c")),
                          parse_double(f[2], "dod_pct")};
    validate(oc);
    out.push_back(oc);
  });
  return out;
}

void write_trace_csv(std::ostream& out, const DegradationTrace& trace) {
  out << kTraceHeader << '\n';
  for (std::size_t n = 0; n < trace.soh.size(); ++n) {
    out << n << ',' << format_double(trace.soh[n]) << '\n';
  }
}

DegradationTrace read_trace_csv(std::istream& in) {
  DegradationTrace t;
  read_csv(in, "<trace>", kTraceHeader, 2, 2, [&](const auto& f, const std::string& where) {
    const double cycle = parse_double(f[0], "cycle");
    if (cycle != static_cast<double>(t.soh.size())) throw DataError(where + ": cycles must be consecutive from 0");
    t.soh.push_back(parse_double(f[1], "soh_pct"));
  });
  for (std::size_t n = 0; n < t.soh.size(); ++n) {
    if (t.soh[n] <= kEolSoh) {
      t.eol = static_cast<long>(n);
      break;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + key + "': " + e.what());
  }
}

json metrics_json(const VariantMetrics& m) {
  return {{"rmse", m.rmse}, {"mape", m.mape}, {"mean_std", m.mean_std}};
}

}  // namespace

json to_json(const ToptModel& m) { return {{"degree", m.degree}, {"coeffs", m.coeffs}}; }

ToptModel topt_from_json(const json& j) {
  ToptModel m;
  m.degree = get_or<int>(j, "degree", 0);
  m.coeffs = get_or<std::vector<double>>(j, "coeffs", {});
  validate(m);
  return m;
}

json to_json(const KernelSpec& spec) {
  const auto& p = spec.physics;
  const auto& l = spec.rbf.length_scales;
  return {
      {"kind", std::string(to_string(spec.kind))},
      {"physics",
       {{"amplitude", p.amplitude},
        {"sigma_c", p.sigma_c},
        {"sigma_t", p.sigma_t},
        {"c_t", p.c_t},
        {"sigma_dod", p.sigma_dod},
        {"noise", p.noise},
        {"topt", to_json(p.topt_model)}}},
      {"rbf",
       {{"amplitude", spec.rbf.amplitude},
        {"length_scales", std::vector<double>(l.data(), l.data() + l.size())},
        {"noise", spec.rbf.noise}}},
  };
}

KernelSpec kernel_spec_from_json(const json& j, KernelSpec base) {
  if (!j.is_object()) throw DataError("kernel: expected a JSON object");
  if (j.contains("kind")) base.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("physics")) {
    const auto& p = j.at("physics");
    auto& q = base.physics;
    q.amplitude = get_or(p, "amplitude", q.amplitude);
    q.sigma_c = get_or(p, "sigma_c", q.sigma_c);
    q.sigma_t = get_or(p, "sigma_t", q.sigma_t);
    q.c_t = get_or(p, "c_t", q.c_t);
    q.sigma_dod = get_or(p, "sigma_dod", q.sigma_dod);
    q.noise = get_or(p, "noise", q.noise);
    if (p.contains("topt")) q.topt_model = topt_from_json(p.at("topt"));
  }
  if (j.contains("rbf")) {
    const auto& r = j.at("rbf");
    base.rbf.amplitude = get_or(r, "amplitude", base.rbf.amplitude);
    base.rbf.noise = get_or(r, "noise", base.rbf.noise);
    if (r.contains("length_scales")) {
      const auto v = r.at("length_scales").get<std::vector<double>>();
      base.rbf.length_scales = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  }
  validate(base);
  return base;
}

json to_json(const SimulatorParams& p) {
  return {{"sei_prefactor", p.sei_prefactor},
          {"sei_c_coeff", p.sei_c_coeff},
          {"sei_activation", p.sei_activation},
          {"sei_exponent", p.sei_exponent},
          {"dod_slope", p.dod_slope},
          {"plate_prefactor", p.plate_prefactor},
          {"plate_c_coeff", p.plate_c_coeff},
          {"plate_activation", p.plate_activation},
          {"knee_onset_fraction", p.knee_onset_fraction},
          {"t_ref", p.t_ref},
          {"cell_sigma", p.cell_sigma},
          {"max_cycles", p.max_cycles}};
}

SimulatorParams simulator_params_from_json(const json& j, SimulatorParams p) {
  if (!j.is_object()) throw DataError("simulator parameters: expected a JSON object");
  static const char* kKnown[] = {"sei_prefactor",  "sei_c_coeff",     "sei_activation",
                                 "sei_exponent",   "dod_slope",       "plate_prefactor",
                                 "plate_c_coeff",  "plate_activation", "knee_onset_fraction",
                                 "t_ref",          "cell_sigma",      "max_cycles"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw DataError("simulator parameters: unknown field '" + key + "'");
    }
  }
  p.sei_prefactor = get_or(j, "sei_prefactor", p.sei_prefactor);
  p.sei_c_coeff = get_or(j, "sei_c_coeff", p.sei_c_coeff);
  p.sei_activation = get_or(j, "sei_activation", p.sei_activation);
  p.sei_exponent = get_or(j, "sei_exponent", p.sei_exponent);
  p.dod_slope = get_or(j, "dod_slope", p.dod_slope);
  p.plate_prefactor = get_or(j, "plate_prefactor", p.plate_prefactor);
  p.plate_c_coeff = get_or(j, "plate_c_coeff", p.plate_c_coeff);
  p.plate_activation = get_or(j, "plate_activation", p.plate_activation);
  p.knee_onset_fraction = get_or(j, "knee_onset_fraction", p.knee_onset_fraction);
  p.t_ref = get_or(j, "t_ref", p.t_ref);
  p.cell_sigma = get_or(j, "cell_sigma", p.cell_sigma);
  p.max_cycles = get_or(j, "max_cycles", p.max_cycles);
  validate(p);
  return p;
}

inline constexpr const char* kModelFormat = "eolgp-model/1";

json to_json(const TrainedGpr& model) {
  json train = json::array();
  for (std::size_t i = 0; i < model.train_x.size(); ++i) {
    const auto& x = model.train_x[i];
    train.push_back({{"c_rate", x.c_rate},
                     {"t_amb_c", kelvin_to_celsius(x.t_amb)},
                     {"dod_pct", x.dod},
                     {"eol_cycles", model.train_y(static_cast<Eigen::Index>(i))}});
  }
  return {{"format", kModelFormat},
          {"kernel", to_json(model.spec)},
          {"y_mean", model.y_mean},
          {"jitter", model.jitter},
          {"train", train},
          {"alpha", std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size())}};
}

TrainedGpr model_from_json(const json& j) {
  try {
    if (j.value("format", "") != kModelFormat) throw DataError("model: unsupported format tag");
    const KernelSpec spec = kernel_spec_from_json(j.at("kernel"));
    std::vector<OperatingCondition> x;
    std::vector<double> y;
    for (const auto& r : j.at("train")) {
      OperatingCondition oc{r.at("c_rate").get<double>(),
                            celsius_to_kelvin(r.at("t_amb_c").get<double>()),
                            r.at("dod_pct").get<double>()};
      validate(oc);
      x.push_back(oc);
      y.push_back(r.at("eol_cycles").get<double>());
    }
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    return restore(std::move(x), Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
                   j.at("y_mean").get<double>(),
                   Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size())),
                   j.at("jitter").get<double>(), spec);
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

json to_json(const AblationReport& report) {
  json variants = json::array();
  for (const auto& v : report.variants) {
    json per_seed = json::array();
    for (std::size_t s = 0; s < v.per_seed.size(); ++s) {
      json entry = metrics_json(v.per_seed[s]);
      entry["seed"] = report.split.seeds.at(s);
      entry["kernel"] = to_json(v.tuned_specs.at(s));
      per_seed.push_back(entry);
    }
    auto breakdown = [](const std::map<double, VariantMetrics>& m) {
      json arr = json::array();
      for (const auto& [value, metrics] : m) {
        json e = metrics_json(metrics);
        e["value"] = value;
        arr.push_back(e);
      }
      return arr;
    };
    variants.push_back({{"kind", std::string(to_string(v.kind))},
                        {"average", metrics_json(v.average)},
                        {"per_seed", per_seed},
                        {"breakdown",
                         {{"c_rate", breakdown(v.breakdown.by_c_rate)},
                          {"t_amb_c", breakdown(v.breakdown.by_temperature)},
                          {"dod_pct", breakdown(v.breakdown.by_dod)}}}});
  }
  return {{"split", {{"test_fraction", report.split.test_fraction}, {"seeds", report.split.seeds}}},
          {"variants", variants},
          {"combined_vs_rbf_rmse_improvement_pct", report.combined_improvement()},
          {"orderings_hold", report.orderings_hold()}};
}

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
  out << "variant,seed,metric,value\n";
  for (const auto& v : report.variants) {
    for (std::size_t s = 0; s < v.per_seed.size(); ++s) {
      const auto seed = report.split.seeds.at(s);
      const auto& m = v.per_seed[s];
      out << to_string(v.kind) << ',' << seed << ",rmse," << format_double(m.rmse) << '\n';
      out << to_string(v.kind) << ',' << seed << ",mape," << format_double(m.mape) << '\n';
      out << to_string(v.kind) << ',' << seed << ",mean_std," << format_double(m.mean_std) << '\n';
    }
  }
}

void write_breakdown_csv(std::ostream& out, const AblationReport& report) {
  out << "variant,axis,value,rmse,mape,mean_std\n";
  for (const auto& v : report.variants) {
    auto emit = [&](const char* axis, const std::map<double, VariantMetrics>& m) {
      for (const auto& [value, met] : m) {
        out << to_string(v.kind) << ',' << axis << ',' << format_double(value) << ','
            << format_double(met.rmse) << ',' << format_double(met.mape) << ','
            << format_double(met.mean_std) << '\n';
      }
    };
    emit("c_rate", v.breakdown.by_c_rate);
    emit("t_amb_c", v.breakdown.by_temperature);
    emit("dod_pct", v.breakdown.by_dod);
  }
}

namespace {

std::string format_axis_value(PretestKind kind, double v) {
  return kind == PretestKind::temperature ? format_celsius(v) : format_double(v);
}

double axis_json_value(PretestKind kind, double v) {
  return kind == PretestKind::temperature ? kelvin_to_celsius(v) : v;
}

}  // namespace

json to_json(const PretestReport& report) {
  json holdouts = json::array();
  for (const auto& h : report.holdouts) {
    holdouts.push_back({{"value", axis_json_value(report.kind, h.value)},
                        {"actual", h.actual},
                        {"proposed", h.proposed},
                        {"rbf", h.rbf},
                        {"proposed_abs_error", h.proposed_error()},
                        {"rbf_abs_error", h.rbf_error()}});
  }
  json alignment = json::array();
  const auto gain = report.improvement();
  for (std::size_t i = 0; i < report.proposed_alignment.anchors.size(); ++i) {
    alignment.push_back({{"anchor", axis_json_value(report.kind, report.proposed_alignment.anchors[i])},
                         {"proposed_error", report.proposed_alignment.errors[i]},
                         {"rbf_error", report.rbf_alignment.errors[i]},
                         {"improvement_pct", gain[i]}});
  }
  json rows = json::array();
  for (const auto& r : report.data.rows) {
    rows.push_back({{"c_rate", r.condition.c_rate},
                    {"t_amb_c", kelvin_to_celsius(r.condition.t_amb)},
                    {"dod_pct", r.condition.dod},
                    {"eol_cycles", r.eol}});
  }
  return {{"kind", std::string(to_string(report.kind))},
          {"axis_units", report.kind == PretestKind::temperature ? "degC" : "C-rate"},
          {"plate_scale", report.plate_scale},
          {"data", rows},
          {"proposed_kernel", to_json(report.proposed)},
          {"rbf_kernel", to_json(report.rbf)},
          {"holdouts", holdouts},
          {"alignment", alignment},
          {"proposed_mean_abs_error", report.proposed_error()},
          {"rbf_mean_abs_error", report.rbf_error()},
          {"proposed_better", report.proposed_better()}};
}

void write_pretest_holdouts_csv(std::ostream& out, const PretestReport& report) {
  out << "value,actual,proposed,rbf,proposed_abs_error,rbf_abs_error\n";
  for (const auto& h : report.holdouts) {
    out << format_axis_value(report.kind, h.value) << ',' << format_double(h.actual) << ','
        << format_double(h.proposed) << ',' << format_double(h.rbf) << ','
        << format_double(h.proposed_error()) << ',' << format_double(h.rbf_error()) << '\n';
  }
}

void write_pretest_alignment_csv(std::ostream& out, const PretestReport& report) {
  out << "anchor,proposed_error,rbf_error,improvement_pct\n";
  const auto gain = report.improvement();
  for (std::size_t i = 0; i < gain.size(); ++i) {
    out << format_axis_value(report.kind, report.proposed_alignment.anchors[i]) << ','
        << format_double(report.proposed_alignment.errors[i]) << ','
        << format_double(report.rbf_alignment.errors[i]) << ',' << format_double(gain[i]) << '\n';
  }
}

json to_json(const ToptSearchResult& result) {
  json rounds = json::array();
  for (const auto& r : result.rounds) {
    rounds.push_back({{"round", r.round}, {"best_coeffs", r.best_coeffs}, {"best_rmse", r.best_rmse}});
  }
  return {{"model", to_json(result.model)}, {"cv_rmse", result.cv_rmse}, {"rounds", rounds}};
}

json to_json(const ToptStudy& study) {
  json degrees = json::array();
  for (const auto& r : study.sweep.by_degree) degrees.push_back(to_json(r));
  return {{"kernel", to_json(study.kernel)}, {"by_degree", degrees}};
}

void write_topt_table_csv(std::ostream& out, const ToptStudy& study) {
  out << "degree,cv_rmse,coeffs\n";
  for (const auto& r : study.sweep.by_degree) {
    out << r.model.degree << ',' << format_double(r.cv_rmse) << ',';
    for (std::size_t i = 0; i < r.model.coeffs.size(); ++i) {
      out << (i ? " " : "") << format_double(r.model.coeffs[i]);
    }
    out << '\n';
  }
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace eolgp::io
