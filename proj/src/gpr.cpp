#include "eolgp/gpr.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "eolgp/errors.hpp"

namespace eolgp {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterLimit = 1e-4;
constexpr double kZ95 = 1.96;

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto d = llt.matrixLLT().diagonal();
  return (d.array() > 0.0).all() && d.allFinite();
}

struct Factor {
  Eigen::MatrixXd l;
  double jitter = 0.0;
};

Factor factorize(Eigen::MatrixXd k) {
  const Eigen::Index n = k.rows();
  if (!k.allFinite()) throw NumericalError("covariance matrix contains non-finite entries");
  {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (factor_ok(llt)) return {llt.matrixL(), 0.0};
  }
  const double scale = k.trace() / static_cast<double>(n);
  for (double rel = kJitterStart; rel <= kJitterLimit * 1.0000001; rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (factor_ok(llt)) return {llt.matrixL(), jitter};
  }
  // Report conditioning so callers can tell a bad kernel from bad data.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "Cholesky of the " << n << "x" << n << " training covariance failed after jitter up to "
      << kJitterLimit << " * trace/n; eigenvalues span [" << es.eigenvalues().minCoeff() << ", "
      << es.eigenvalues().maxCoeff() << "]";
  throw NumericalError(msg.str());
}

}  // namespace

TrainedGpr fit(std::span<const OperatingCondition> x, const Eigen::VectorXd& y,
               const KernelSpec& spec) {
  if (x.empty()) throw UsageError("fit: no training points");
  if (static_cast<Eigen::Index>(x.size()) != y.size()) {
    throw UsageError("fit: inputs and targets differ in length");
  }
  TrainedGpr m;
  m.train_x.assign(x.begin(), x.end());
  m.train_y = y;
  m.y_mean = y.mean();
  m.spec = spec;
  auto [l, jitter] = factorize(training_gram(x, spec));
  m.chol_l = std::move(l);
  m.jitter = jitter;
  const Eigen::VectorXd centered = y.array() - m.y_mean;
  const Eigen::MatrixXd& l_ref = m.chol_l;
  m.alpha = l_ref.triangularView<Eigen::Lower>().transpose().solve(
      l_ref.triangularView<Eigen::Lower>().solve(centered));
  return m;
}

TrainedGpr restore(std::vector<OperatingCondition> x, Eigen::VectorXd y, double y_mean,
                   Eigen::VectorXd alpha, double jitter, const KernelSpec& spec) {
  if (x.empty() || static_cast<Eigen::Index>(x.size()) != y.size() || y.size() != alpha.size()) {
    throw DataError("model: inconsistent training inputs, targets and weights");
  }
  TrainedGpr m;
  Eigen::MatrixXd k = training_gram(x, spec);
  k.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (!factor_ok(llt)) throw NumericalError("model: stored covariance is not positive definite");
  m.chol_l = llt.matrixL();
  m.train_x = std::move(x);
  m.train_y = std::move(y);
  m.y_mean = y_mean;
  m.alpha = std::move(alpha);
  m.jitter = jitter;
  m.spec = spec;
  return m;
}

Eigen::VectorXd predict_mean(const TrainedGpr& model, std::span<const OperatingCondition> x_star) {
  const Eigen::MatrixXd ks = gram(model.train_x, x_star, model.spec);
  Eigen::VectorXd mean = ks.transpose() * model.alpha;
  mean.array() += model.y_mean;
  return mean;
}

std::vector<Prediction> predict(const TrainedGpr& model,
                                std::span<const OperatingCondition> x_star) {
  const Eigen::MatrixXd ks = gram(model.train_x, x_star, model.spec);
  const Eigen::VectorXd mean = (ks.transpose() * model.alpha).array() + model.y_mean;
  const Eigen::MatrixXd v = model.chol_l.triangularView<Eigen::Lower>().solve(ks);
  const double amp = model.spec.amplitude();
  const double clamp = 1e-10 * amp;

  std::vector<Prediction> out(x_star.size());
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    // Prior variance is the amplitude: every kernel is amplitude * exp(0) on the diagonal.
    double var = amp - v.col(c).squaredNorm();
    if (var < 0.0) {
      if (var < -clamp) {
        std::ostringstream msg;
        msg << "negative posterior variance " << var << " at query " << i;
        throw NumericalError(msg.str());
      }
      var = 0.0;
    }
    const double sd = std::sqrt(var);
    out[i] = {mean(c), sd, mean(c) - kZ95 * sd, mean(c) + kZ95 * sd};
  }
  return out;
}

double log_marginal_likelihood(const TrainedGpr& model) {
  const Eigen::VectorXd centered = model.train_y.array() - model.y_mean;
  const double n = static_cast<double>(centered.size());
  return -0.5 * centered.dot(model.alpha) - model.chol_l.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace eolgp
