#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "eolgp/kernels.hpp"
#include "eolgp/rng.hpp"
#include "support.hpp"

namespace eolgp {
namespace {

constexpr double kRel = 1e-10;

TEST(RbfKernel, ScalarExamples) {
  RbfConfig cfg;
  cfg.amplitude = 1.0;
  cfg.length_scales = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(1);
  EXPECT_EQ(rbf(a, a, cfg), 1.0);
  EXPECT_NEAR(rbf(a, b, cfg), std::exp(-0.5), kRel);
  EXPECT_NEAR(rbf(a, b, cfg), 0.60653, 1e-5);
  cfg.amplitude = 0.0;
  EXPECT_EQ(rbf(a, b, cfg), 0.0);
}

TEST(RbfKernel, DimensionMismatchThrows) {
  RbfConfig cfg;
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
  EXPECT_THROW((void)rbf(a, a, cfg), InputError);
}

TEST(CKernel, Examples) {
  EXPECT_EQ(c_kernel(1.7, 1.7, 0.223), 1.0);
  const double k = c_kernel(1.0, 2.0, 0.223);
  EXPECT_NEAR(k, std::exp(-0.25 / (2 * 0.223 * 0.223)), kRel * k);
  EXPECT_NEAR(k, 0.0810, 5e-5);
}

TEST(CKernel, FasterRatesCorrelateMoreAtEqualGap) {
  EXPECT_GT(c_kernel(2.0, 2.5, 0.223), c_kernel(1.0, 1.5, 0.223));
}

TEST(CKernel, RejectsNonpositiveInputs) {
  EXPECT_THROW((void)c_kernel(0.0, 1.0, 0.2), InputError);
  EXPECT_THROW((void)c_kernel(1.0, 1.0, 0.0), InputError);
}

TEST(TFeature, Examples) {
  EXPECT_EQ(t_feature(308.15, 308.15, 0.0), 0.0);
  EXPECT_NEAR(t_feature(298.15, 308.15, 0.0), 10.0 / 298.15, kRel);
  EXPECT_NEAR(t_feature(298.15, 308.15, 0.0), 0.033540, 1e-6);
  EXPECT_NEAR(t_feature(318.15, 308.15, 0.0), 0.031432, 1e-6);
  EXPECT_LT(t_feature(318.15, 308.15, 0.0), t_feature(298.15, 308.15, 0.0));
}

TEST(TFeature, NonpositiveDenominatorThrows) {
  EXPECT_THROW((void)t_feature(300.0, 308.15, -300.0), InputError);
}

TEST(TKernel, Examples) {
  EXPECT_EQ(t_kernel(300.0, 300.0, 305.0, 305.0, 0.0, 0.255), 1.0);
  auto oracle = [](double fi, double fj) {
    return std::exp(-(fi - fj) * (fi - fj) / (2 * 0.255 * 0.255));
  };
  const double k1 = t_kernel(298.15, 318.15, 308.15, 308.15, 0.0, 0.255);
  EXPECT_NEAR(k1, oracle(10.0 / 298.15, 10.0 / 318.15), kRel);
  EXPECT_NEAR(k1, 0.99997, 1e-5);
  const double k2 = t_kernel(278.15, 318.15, 308.15, 308.15, 0.0, 0.255);
  EXPECT_NEAR(k2, oracle(30.0 / 278.15, 10.0 / 318.15), kRel);
  EXPECT_NEAR(k2, 0.9561, 1e-4);
}

TEST(DodKernel, Examples) {
  EXPECT_EQ(dod_kernel(60.0, 60.0, 15.70), 1.0);
  const double k = dod_kernel(40.0, 80.0, 15.70);
  EXPECT_NEAR(k, std::exp(-1600.0 / (2 * 15.70 * 15.70)), kRel * k);
  EXPECT_NEAR(k, 0.0389, 5e-5);
}

TEST(CombinedKernel, DiagonalEqualsAmplitude) {
  KernelConfig cfg;
  const OperatingCondition x{1.3, 288.15, 50.0};
  EXPECT_NEAR(combined_kernel(x, x, cfg), 998.56, 998.56 * kRel);
  cfg.amplitude = 0.0;
  EXPECT_EQ(combined_kernel(x, {2.0, 300.0, 80.0}, cfg), 0.0);
}

TEST(CombinedKernel, ProductOfFactors) {
  KernelConfig cfg;
  cfg.topt_model = ToptModel{1, {-9.04, 15.90, 0.20}};
  const OperatingCondition a{1.0, 278.15, 40.0};
  const OperatingCondition b{2.0, 318.15, 80.0};
  const double ta = eval_topt(cfg.topt_model, 1.0, 40.0);
  const double tb = eval_topt(cfg.topt_model, 2.0, 80.0);
  const double expected = cfg.amplitude * c_kernel(1.0, 2.0, cfg.sigma_c) *
                          t_kernel(278.15, 318.15, ta, tb, cfg.c_t, cfg.sigma_t) *
                          dod_kernel(40.0, 80.0, cfg.sigma_dod);
  EXPECT_NEAR(combined_kernel(a, b, cfg), expected, kRel * expected);
}

TEST(Gram, SmallExamples) {
  KernelSpec spec;
  spec.kind = KernelKind::rbf;
  spec.rbf.amplitude = 1.0;
  spec.rbf.noise = 0.0;
  const std::vector<OperatingCondition> one{{1.0, 298.15, 60.0}};
  const Eigen::MatrixXd g1 = training_gram(one, spec);
  ASSERT_EQ(g1.rows(), 1);
  EXPECT_EQ(g1(0, 0), 1.0);

  KernelSpec c;
  c.kind = KernelKind::c_only;
  c.physics.amplitude = 1.0;
  c.physics.noise = 0.0;
  const std::vector<OperatingCondition> two{{1.0, 298.15, 60.0}, {2.0, 298.15, 60.0}};
  const Eigen::MatrixXd g2 = training_gram(two, c);
  EXPECT_EQ(g2(0, 0), 1.0);
  EXPECT_EQ(g2(1, 1), 1.0);
  EXPECT_NEAR(g2(0, 1), c_kernel(1.0, 2.0, 0.223), kRel);
  EXPECT_EQ(g2(0, 1), g2(1, 0));
}

TEST(Gram, NoiseOnlyOnTrainingDiagonal) {
  KernelSpec spec;
  spec.physics.noise = 3.0;
  const auto pts = test::random_conditions(7, 11);
  const Eigen::MatrixXd k = gram(pts, pts, spec);
  const Eigen::MatrixXd kn = training_gram(pts, spec);
  EXPECT_TRUE(((kn - k) - 9.0 * Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-9);
  EXPECT_THROW((void)gram(pts, std::span(pts).first(3), spec, true), UsageError);
}

TEST(Gram, FeatureMapMatchesPointwiseKernel) {
  for (KernelKind kind : kAllKernelKinds) {
    KernelSpec spec;
    spec.kind = kind;
    spec.physics.topt_model = ToptModel{1, {-9.04, 15.90, 0.20}};
    const auto x = test::random_conditions(9, 3);
    const auto y = test::random_conditions(5, 4);
    const Eigen::MatrixXd g = gram(x, y, spec);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double v = kernel_value(x[i], y[j], spec);
        EXPECT_NEAR(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), v, 1e-10 * spec.amplitude());
      }
    }
  }
}

// Property: every kernel kind yields a PSD Gram matrix on random inputs.
TEST(Gram, PositiveSemidefiniteOnRandomInputs) {
  CounterRng rng(2024);
  for (KernelKind kind : kAllKernelKinds) {
    for (int trial = 0; trial < 25; ++trial) {
      KernelSpec spec = test::random_spec(kind, rng);
      spec.physics.noise = 0.0;
      spec.rbf.noise = 0.0;
      const auto n = static_cast<std::size_t>(2 + rng.uniform() * 29);
      const auto pts = test::random_conditions(n, rng.next());
      const Eigen::MatrixXd k = gram(pts, pts, spec);
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff();
      EXPECT_GE(min_eig, -1e-8 * k.trace()) << to_string(kind) << " trial " << trial;
    }
  }
}

TEST(KernelSpec, HyperparameterAccessRoundTrips) {
  KernelSpec spec;
  for (const char* name : {"amplitude", "noise", "sigma_c", "sigma_t", "c_t", "sigma_dod", "l_c", "l_t", "l_dod"}) {
    set_hyperparameter(spec, name, 0.5);
    EXPECT_EQ(get_hyperparameter(spec, name), 0.5) << name;
  }
  EXPECT_THROW((void)get_hyperparameter(spec, "bogus"), UsageError);
}

TEST(KernelSpec, KindNamesRoundTrip) {
  for (KernelKind kind : kAllKernelKinds) {
    EXPECT_EQ(kernel_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW((void)kernel_kind_from_string("laplace"), Error);
}

}  // namespace
}  // namespace eolgp
