#include "ionpf/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace ionpf {

ThetaMatrix GaussianBelief::cholesky() const {
  Eigen::LLT<ThetaMatrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("GaussianBelief: covariance is not positive definite");
  }
  return llt.matrixL();
}

void GaussianBelief::validate() const {
  if (!mean.allFinite() || !cov.allFinite()) throw std::domain_error("GaussianBelief: non-finite entries");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::domain_error("GaussianBelief: covariance is not symmetric");
  }
  cholesky();
}

double GaussianBelief::log_det() const {
  const ThetaMatrix l = cholesky();
  return 2.0 * l.diagonal().array().log().sum();
}

double GaussianBelief::entropy() const {
  const double d = static_cast<double>(Theta::RowsAtCompileTime);
  return 0.5 * (d * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_det());
}

double GaussianBelief::logpdf(const Theta& theta) const {
  const ThetaMatrix l = cholesky();
  const Theta z = l.triangularView<Eigen::Lower>().solve(theta - mean);
  const double d = static_cast<double>(Theta::RowsAtCompileTime);
  return -0.5 * z.squaredNorm() - l.diagonal().array().log().sum() -
         0.5 * d * std::log(2.0 * std::numbers::pi);
}

Theta GaussianBelief::sample(RngStream& rng) const {
  Theta z;
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + cholesky() * z;
}

}  // namespace ionpf
