#include "eolgp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "eolgp/errors.hpp"
#include "eolgp/rng.hpp"

namespace eolgp {

// ---------------------------------------------------------------------------
// Wang-style closed-form fade
// ---------------------------------------------------------------------------

void validate(const WangParams& p) {
  if (!(p.b > 0.0)) throw InputError("Wang prefactor b must be positive");
  if (!(p.d > 0.0)) throw InputError("Wang cycle exponent d must be positive");
  if (!(p.loss_threshold > 0.0 && p.loss_threshold < 100.0)) {
    throw InputError("Wang loss threshold must lie in (0, 100)");
  }
}

double wang_qloss(double c_rate, double cycle_number, const WangParams& p) {
  if (cycle_number < 0.0) throw InputError("cycle number must be nonnegative");
  return p.b * std::exp(p.a * c_rate) * std::pow(cycle_number, p.d);
}

long wang_eol(double c_rate, const WangParams& p) {
  validate(p);
  if (!(c_rate > 0.0)) throw InputError("C-rate must be positive");
  const double closed = std::pow(p.loss_threshold / (p.b * std::exp(p.a * c_rate)), 1.0 / p.d);
  if (!std::isfinite(closed) || closed > 1e15) {
    throw NumericalError("Wang EOL overflows for these parameters");
  }
  auto n = static_cast<long>(std::ceil(closed));
  // The closed form can land one cycle off after rounding; settle it by forward evaluation.
  while (wang_qloss(c_rate, static_cast<double>(n), p) < p.loss_threshold) ++n;
  while (n > 0 && wang_qloss(c_rate, static_cast<double>(n - 1), p) >= p.loss_threshold) --n;
  return n;
}

// ---------------------------------------------------------------------------
// Surrogate simulator
// ---------------------------------------------------------------------------

SimulatorParams default_simulator_params() { return SimulatorParams{}; }

void validate(const SimulatorParams& p) {
  if (!(p.sei_prefactor > 0.0)) throw InputError("sei_prefactor must be positive");
  if (!(p.plate_prefactor >= 0.0)) throw InputError("plate_prefactor must be nonnegative");
  if (!(p.sei_exponent > 0.0)) throw InputError("sei_exponent must be positive");
  if (!(p.knee_onset_fraction > 0.0 && p.knee_onset_fraction < 1.0)) {
    throw InputError("knee_onset_fraction must lie in (0, 1)");
  }
  if (!(p.t_ref > 0.0)) throw InputError("t_ref must be positive");
  if (!(p.cell_sigma >= 0.0)) throw InputError("cell_sigma must be nonnegative");
  if (p.max_cycles < 1) throw InputError("max_cycles must be at least 1");
}

double sei_rate(const OperatingCondition& oc, const SimulatorParams& p) {
  const double dod_factor = 1.0 + p.dod_slope * (oc.dod - 60.0);
  if (!(dod_factor > 0.0)) throw InputError("dod_slope makes the SEI rate nonpositive");
  return p.sei_prefactor * std::exp(p.sei_c_coeff * oc.c_rate) *
         std::exp(-p.sei_activation * (1.0 / oc.t_amb - 1.0 / p.t_ref)) * dod_factor;
}

double plate_rate(const OperatingCondition& oc, const SimulatorParams& p) {
  return p.plate_prefactor * std::exp(p.plate_c_coeff * oc.c_rate) *
         std::exp(p.plate_activation * (1.0 / oc.t_amb - 1.0 / p.t_ref));
}

DegradationTrace simulate_cell(const OperatingCondition& oc, const SimulatorParams& p,
                               std::uint64_t seed) {
  validate(oc);
  validate(p);
  const double loss_at_eol = 100.0 - kEolSoh;
  const double sei = sei_rate(oc, p);
  const double plate = plate_rate(oc, p);
  const double sei_only_eol = std::pow(loss_at_eol / sei, 1.0 / p.sei_exponent);
  const double knee = p.knee_onset_fraction * sei_only_eol;

  double cell_factor = 1.0;
  if (p.cell_sigma > 0.0) {
    CounterRng rng(seed);
    cell_factor = std::max(1.0 + p.cell_sigma * rng.normal(), 1e-3);
  }

  DegradationTrace trace;
  trace.soh.reserve(static_cast<std::size_t>(std::min<long>(p.max_cycles, 8192)) + 1);
  trace.soh.push_back(100.0);
  for (long n = 1; n <= p.max_cycles; ++n) {
    const double cyc = static_cast<double>(n);
    const double past_knee = std::max(0.0, cyc - knee);
    const double loss =
        cell_factor * (sei * std::pow(cyc, p.sei_exponent) + plate * past_knee * past_knee);
    const double soh = 100.0 - loss;
    trace.soh.push_back(soh);
    if (soh <= kEolSoh) {
      trace.eol = n;
      break;
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::wang: return "wang";
    case Provenance::surrogate: return "surrogate";
    case Provenance::external_file: return "external-file";
  }
  return "?";
}

Provenance provenance_from_string(std::string_view s) {
  for (Provenance p : {Provenance::wang, Provenance::surrogate, Provenance::external_file}) {
    if (to_string(p) == s) return p;
  }
  throw DataError("unknown dataset provenance '" + std::string(s) + "'");
}

std::vector<OperatingCondition> Dataset::conditions() const {
  std::vector<OperatingCondition> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.condition);
  return out;
}

Eigen::VectorXd Dataset::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].eol;
  return y;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.provenance = provenance;
  out.seed = seed;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

void validate(const Dataset& d) {
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& r = d.rows[i];
    validate(r.condition);
    if (!(r.eol >= 1.0) || !std::isfinite(r.eol)) {
      throw DataError("row " + std::to_string(i) + ": EOL must be at least one cycle");
    }
    if (!seen.emplace(r.condition.c_rate, r.condition.t_amb, r.condition.dod).second) {
      throw DataError("row " + std::to_string(i) + ": duplicate operating condition");
    }
  }
}

std::vector<OperatingCondition> grid_conditions() {
  std::vector<OperatingCondition> out;
  for (double c : kGridCRates) {
    for (double t : kGridTempsC) {
      for (double d : kGridDods) out.push_back({c, celsius_to_kelvin(t), d});
    }
  }
  return out;
}

namespace {

std::string describe(const OperatingCondition& oc) {
  std::ostringstream s;
  s << "(c_rate=" << oc.c_rate << " C, t_amb=" << kelvin_to_celsius(oc.t_amb)
    << " degC, dod=" << oc.dod << " %)";
  return s.str();
}

}  // namespace

Dataset generate_grid_dataset(const SimulatorParams& p, std::uint64_t seed,
                              std::vector<DegradationTrace>* traces) {
  validate(p);
  Dataset out;
  out.provenance = Provenance::surrogate;
  out.seed = seed;
  if (traces) traces->clear();
  const auto conds = grid_conditions();
  for (std::size_t i = 0; i < conds.size(); ++i) {
    auto trace = simulate_cell(conds[i], p, seed ^ static_cast<std::uint64_t>(i));
    if (!trace.eol) {
      throw DataError("cell " + describe(conds[i]) + " did not reach 80 % SOH within " +
                      std::to_string(p.max_cycles) + " cycles");
    }
    out.rows.push_back({conds[i], static_cast<double>(*trace.eol)});
    if (traces) traces->push_back(std::move(trace));
  }
  return out;
}

Dataset wang_sweep(std::span<const double> c_rates, const WangParams& p) {
  Dataset out;
  out.provenance = Provenance::wang;
  for (double c : c_rates) {
    out.rows.push_back({{c, celsius_to_kelvin(25.0), 60.0}, static_cast<double>(wang_eol(c, p))});
  }
  return out;
}

namespace {

bool peaks_at_optimum(const Dataset& d) {
  // Rows follow kPretestTempsC; the optimum is the middle one.
  const auto& r = d.rows;
  return r[0].eol < r[1].eol && r[1].eol < r[2].eol && r[2].eol > r[3].eol && r[3].eol > r[4].eol;
}

}  // namespace

PretestCurve pretest_t_curve(const SimulatorParams& p) {
  validate(p);
  // Scales 10^(k/16), |k| <= 128. Among those peaking at 35 C, keep the one whose
  // 25 C and 45 C neighbours are most nearly equal, so the optimum sits centred
  // between them; ties go to the scale closest to one.
  std::optional<PretestCurve> best;
  double best_skew = 0.0;
  for (int step = 0; step <= 256; ++step) {
    const int k = (step % 2 == 1) ? (step + 1) / 2 : -(step / 2);
    const double scale = std::pow(10.0, k / 16.0);
    SimulatorParams q = p;
    q.plate_prefactor = p.plate_prefactor * scale;
    Dataset d;
    d.provenance = Provenance::surrogate;
    bool complete = true;
    for (double t : kPretestTempsC) {
      const OperatingCondition oc{kPretestCRate, celsius_to_kelvin(t), kPretestDod};
      const auto trace = simulate_cell(oc, q, 0);
      if (!trace.eol) {
        complete = false;
        break;
      }
      d.rows.push_back({oc, static_cast<double>(*trace.eol)});
    }
    if (!complete || !peaks_at_optimum(d)) continue;
    const double skew = std::abs(std::log(d.rows[1].eol / d.rows[3].eol));
    if (!best || skew < best_skew) {
      best_skew = skew;
      best = PretestCurve{std::move(d), scale};
    }
  }
  if (!best) throw DataError("no plating scale in [1e-8, 1e8] puts the pre-test optimum at 35 degC");
  return *std::move(best);
}

}  // namespace eolgp
