#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "eolgp/eval.hpp"
#include "eolgp/topt.hpp"
#include "eolgp/topt_model.hpp"

namespace eolgp {
namespace {

const ToptModel kQuadratic{2, {-48.15, 48.4, 0.77, -9.52, -0.07, -3.93e-3}};

TEST(ToptModel, Examples) {
  EXPECT_NEAR(eval_topt(ToptModel{0, {18.9}}, 1.7, 55.0), 292.05, 1e-12);
  EXPECT_NEAR(eval_topt(ToptModel{1, {-9.04, 15.90, 0.20}}, 1.0, 40.0), 288.01, 1e-10);
  EXPECT_NEAR(topt_celsius(kQuadratic, 1.0, 40.0), 12.442, 1e-10);
  EXPECT_NEAR(eval_topt(kQuadratic, 1.0, 40.0), 285.59, 5e-3);
}

TEST(ToptModel, MatchesExpandedPolynomialOnGrid) {
  const auto& k = kQuadratic.coeffs;
  for (double c : kGridCRates) {
    for (double d : kGridDods) {
      const long double lc = c, ld = d;
      const long double expanded = k[0] + k[1] * lc + k[2] * ld + k[3] * lc * lc + k[4] * lc * ld +
                                   k[5] * ld * ld + 273.15L;
      const double got = eval_topt(kQuadratic, c, d);
      EXPECT_NEAR(got, static_cast<double>(expanded), 1e-12 * got);
    }
  }
}

TEST(ToptModel, RangeAndShapeChecks) {
  EXPECT_THROW((void)eval_topt(ToptModel{0, {100.0}}, 1.0, 60.0), RangeError);
  EXPECT_THROW(validate(ToptModel{1, {1.0}}), UsageError);
  EXPECT_THROW(validate(ToptModel{3, {1.0}}), UsageError);
  EXPECT_NO_THROW(validate_over_box(kQuadratic));
}

TEST(ToptModel, LiftPreservesValues) {
  const ToptModel m1{1, {-9.04, 15.90, 0.20}};
  const ToptModel m2 = lift_degree(m1, 2);
  ASSERT_EQ(m2.coeffs.size(), 6u);
  for (double c : kGridCRates)
    for (double d : kGridDods) EXPECT_EQ(eval_topt(m2, c, d), eval_topt(m1, c, d));
  EXPECT_THROW((void)lift_degree(m2, 1), UsageError);
}

Dataset slice(std::initializer_list<std::pair<double, double>> t_eol) {
  Dataset d;
  for (auto [t, e] : t_eol) d.rows.push_back({{1.0, t, 60.0}, e});
  return d;
}

TEST(EmpiricalTopt, ArgmaxPerSlice) {
  const auto obs = empirical_topt(slice({{278.15, 400.0}, {298.15, 700.0}, {318.15, 600.0}}));
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].t_opt, 298.15);
  EXPECT_EQ(obs[0].c_rate, 1.0);
  EXPECT_EQ(obs[0].dod, 60.0);
}

TEST(EmpiricalTopt, TieGoesToLowerTemperature) {
  const auto obs = empirical_topt(slice({{308.15, 700.0}, {288.15, 700.0}, {318.15, 100.0}}));
  EXPECT_EQ(obs[0].t_opt, 288.15);
}

TEST(EmpiricalTopt, NeedsTwoTemperatures) {
  EXPECT_THROW((void)empirical_topt(slice({{298.15, 700.0}})), UsageError);
}

TEST(EmpiricalTopt, GridOptimaAreGridTemperatures) {
  const auto obs = empirical_topt(generate_grid_dataset(default_simulator_params(), 0));
  EXPECT_EQ(obs.size(), 20u);
  for (const auto& o : obs) {
    const double tc = kelvin_to_celsius(o.t_opt);
    EXPECT_TRUE(std::any_of(std::begin(kGridTempsC), std::end(kGridTempsC),
                            [&](double g) { return std::abs(g - tc) < 1e-9; }));
  }
}

TEST(ToptFit, LeastSquaresRecoversExactPlane) {
  std::vector<ToptObservation> obs;
  for (double c : kGridCRates)
    for (double d : kGridDods) obs.push_back({c, d, celsius_to_kelvin(-9.04 + 15.90 * c + 0.20 * d)});
  const ToptModel m = fit_topt_polynomial(obs, 1);
  EXPECT_NEAR(m.coeffs[0], -9.04, 1e-8);
  EXPECT_NEAR(m.coeffs[1], 15.90, 1e-8);
  EXPECT_NEAR(m.coeffs[2], 0.20, 1e-10);
}

TEST(Folds, BalancedAndDeterministic) {
  const auto f = fold_assignment(23, 5, 9);
  EXPECT_EQ(f, fold_assignment(23, 5, 9));
  std::vector<int> counts(5, 0);
  for (int v : f) ++counts[static_cast<std::size_t>(v)];
  EXPECT_EQ(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1);
  EXPECT_THROW((void)fold_assignment(3, 5, 0), UsageError);
  EXPECT_THROW((void)fold_assignment(10, 1, 0), UsageError);
}

class ToptSearch : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const Dataset all = generate_grid_dataset(default_simulator_params(), 0);
    train_ = new Dataset(split(all, 0.2, 0).first);
  }
  static void TearDownTestSuite() { delete train_; }
  static Dataset* train_;
  KernelSpec base_{};
};
Dataset* ToptSearch::train_ = nullptr;

TEST_F(ToptSearch, SingletonGridReturnsCenter) {
  ToptGridOptions o;
  o.centers = {20.0};
  o.half_widths = {5.0};
  o.points = 1;
  o.rounds = 2;
  const auto r = shrinking_grid_search(*train_, 0, base_, o);
  EXPECT_EQ(r.model.coeffs, std::vector<double>{20.0});
  EXPECT_EQ(r.cv_rmse, topt_cv_rmse(*train_, base_, ToptModel{0, {20.0}}, 5, 0));
}

TEST_F(ToptSearch, DegreeZeroIsArgminOfFinalRound) {
  ToptGridOptions o;
  o.centers = {25.0};
  o.half_widths = {20.0};
  o.points = 5;
  o.rounds = 3;
  const auto r = shrinking_grid_search(*train_, 0, base_, o);
  // Recentering can move each round by its half-width: 20 + 10 + 5.
  EXPECT_GE(r.model.coeffs[0], 25.0 - 35.0);
  EXPECT_LE(r.model.coeffs[0], 25.0 + 35.0);
  for (double v : r.rounds.back().grid_rmse) EXPECT_LE(r.cv_rmse, v);
  for (std::size_t i = 1; i < r.rounds.size(); ++i) EXPECT_LE(r.rounds[i].best_rmse, r.rounds[i - 1].best_rmse);
  EXPECT_EQ(r.rounds.front().grid_rmse.size(), 5u);
}

TEST_F(ToptSearch, DeterministicAndDegreeOrdered) {
  ToptGridOptions o;
  o.points = 3;
  o.rounds = 2;
  const auto a = topt_degree_sweep(*train_, base_, 2, o, 8.0);
  const auto b = topt_degree_sweep(*train_, base_, 2, o, 8.0);
  ASSERT_EQ(a.by_degree.size(), 3u);
  for (int d = 0; d < 3; ++d) {
    EXPECT_EQ(a.by_degree[d].model, b.by_degree[d].model);
    EXPECT_EQ(a.by_degree[d].model.degree, d);
  }
  EXPECT_LE(a.by_degree[2].cv_rmse, a.by_degree[1].cv_rmse);
  EXPECT_LE(a.by_degree[1].cv_rmse, a.by_degree[0].cv_rmse);
}

TEST_F(ToptSearch, RejectsBadOptions) {
  ToptGridOptions o;
  o.centers = {20.0, 1.0};
  o.half_widths = {5.0};
  EXPECT_THROW((void)shrinking_grid_search(*train_, 0, base_, o), UsageError);
  KernelSpec rbf;
  rbf.kind = KernelKind::rbf;
  o.centers = {20.0};
  EXPECT_THROW((void)shrinking_grid_search(*train_, 0, rbf, o), UsageError);
  EXPECT_THROW((void)shrinking_grid_search(Dataset{}, 0, base_, o), UsageError);
}

TEST_F(ToptSearch, OutOfBandPolynomialScoresInfinity) {
  EXPECT_EQ(topt_cv_rmse(*train_, base_, ToptModel{0, {150.0}}, 5, 0), std::numeric_limits<double>::infinity());
}

}  // namespace
}  // namespace eolgp
