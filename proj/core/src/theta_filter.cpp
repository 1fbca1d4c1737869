#include "ionpf/theta_filter.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace ionpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

Theta ThetaCloud::mean() const {
  if (particles.empty()) throw std::invalid_argument("ThetaCloud: empty cloud");
  Theta m = Theta::Zero();
  for (const auto& p : particles) m += p;
  return m / static_cast<double>(particles.size());
}

ThetaMatrix ThetaCloud::covariance() const {
  const Theta m = mean();
  ThetaMatrix c = ThetaMatrix::Zero();
  for (const auto& p : particles) c += (p - m) * (p - m).transpose();
  return c / static_cast<double>(particles.size());
}

bool ThetaCloud::operator==(const ThetaCloud& other) const {
  if (particles != other.particles || ancestors != other.ancestors) return false;
  if (log_weights.size() != other.log_weights.size()) return false;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double a = log_weights[i], b = other.log_weights[i];
    if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
  }
  return true;
}

JitterConfig JitterConfig::from_prior(const GaussianBelief& prior, std::size_t M, double factor) {
  JitterConfig jc;
  jc.base_scale = factor * prior.cov.diagonal().cwiseSqrt();
  jc.M = M;
  jc.validate();
  return jc;
}

Theta JitterConfig::std_dev() const { return base_scale / std::sqrt(static_cast<double>(M)); }

void JitterConfig::validate() const {
  if (M < 1) throw std::invalid_argument("jitter: M must be >= 1");
  if (!base_scale.allFinite() || (base_scale.array() < 0.0).any())
    throw std::invalid_argument("jitter: base_scale must be finite and >= 0");
  if (clamp && (clamp->first.array() > clamp->second.array()).any())
    throw std::invalid_argument("jitter: clamp lower bound exceeds upper bound");
}

ThetaCloud cloud_init(const GaussianBelief& prior, std::size_t M, RngStream& rng) {
  if (M < 1) throw std::invalid_argument("cloud_init: M must be >= 1");
  const ThetaMatrix l = prior.cholesky();
  ThetaCloud cloud;
  cloud.particles.reserve(M);
  cloud.ancestors.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    Theta z;
    for (int d = 0; d < z.size(); ++d) z[d] = rng.normal();
    cloud.particles.push_back(prior.mean + l * z);
    cloud.ancestors[m] = m;
  }
  cloud.log_weights = LogWeights::uniform(M);
  return cloud;
}

LogWeights cloud_reweight(const ThetaCloud& cloud, const StateSpaceModel& model, const State& x_prev, double xi,
                          const State& x_next) {
  std::vector<double> lw(cloud.size());
  bool any_finite = false;
  for (std::size_t m = 0; m < cloud.size(); ++m) {
    lw[m] = model.transition_logpdf(x_next, x_prev, xi, cloud.particles[m]);
    any_finite = any_finite || lw[m] > kNegInf;
  }
  if (!any_finite) throw DegenerateCloudError("theta cloud: every particle has zero likelihood");
  return LogWeights(std::move(lw));
}

Theta jitter_kernel(const Theta& theta, const JitterConfig& jc, RngStream& rng) {
  const Theta sd = jc.std_dev();
  Theta out = theta;
  for (int d = 0; d < out.size(); ++d) {
    const double e = rng.normal();
    if (sd[d] > 0.0) out[d] += sd[d] * e;
  }
  if (jc.clamp) out = out.cwiseMax(jc.clamp->first).cwiseMin(jc.clamp->second);
  return out;
}

double jitter_logpdf(const Theta& to, const Theta& from, const JitterConfig& jc) {
  if (jc.clamp) throw std::invalid_argument("jitter_logpdf: no density for a clamped kernel");
  const Theta sd = jc.std_dev();
  double lp = 0.0;
  for (int d = 0; d < to.size(); ++d) {
    if (sd[d] > 0.0) {
      const double r = (to[d] - from[d]) / sd[d];
      lp += -0.5 * r * r - std::log(sd[d]) - kHalfLog2Pi;
    } else if (to[d] != from[d]) {
      return kNegInf;
    }
  }
  return lp;
}

ThetaCloud cloud_step_npf(const ThetaCloud& cloud, const LogWeights& reweight, const JitterConfig& jc,
                          RngStream& rng) {
  if (reweight.size() != cloud.size()) throw std::invalid_argument("cloud_step_npf: weight count mismatch");
  ThetaCloud out;
  try {
    out.ancestors = multinomial_resample(reweight, cloud.size(), rng);
  } catch (const DegenerateWeightsError&) {
    throw DegenerateCloudError("theta cloud: every particle has zero likelihood");
  }
  out.particles.reserve(cloud.size());
  for (auto b : out.ancestors) out.particles.push_back(jitter_kernel(cloud.particles[b], jc, rng));
  out.log_weights = reweight;
  return out;
}

ThetaCloud cloud_step_npf(const ThetaCloud& cloud, const StateSpaceModel& model, const State& x_prev, double xi,
                          const State& x_next, const JitterConfig& jc, RngStream& rng) {
  return cloud_step_npf(cloud, cloud_reweight(cloud, model, x_prev, xi, x_next), jc, rng);
}

double history_log_target(const StateSpaceModel& model, std::span<const AugmentedState> history, const Theta& theta) {
  double lp = model.prior().logpdf(theta);
  for (std::size_t s = 1; s < history.size() && lp > kNegInf; ++s) {
    const auto& xi = history[s].xi_prev;
    if (!xi) throw std::invalid_argument("history_log_target: missing design");
    lp += model.transition_logpdf(history[s].x, history[s - 1].x, *xi, theta);
  }
  return lp;
}

RwmhStats rwmh_moves(std::vector<Theta>& particles, std::vector<double>& log_target,
                     const std::function<double(const Theta&)>& target, const ThetaMatrix& proposal_cov,
                     std::size_t moves, RngStream& rng) {
  if (log_target.size() != particles.size()) throw std::invalid_argument("rwmh_moves: size mismatch");
  RwmhStats stats;
  if (moves == 0) return stats;
  Eigen::LLT<ThetaMatrix> llt(proposal_cov);
  if (llt.info() != Eigen::Success) throw std::domain_error("rwmh_moves: proposal covariance is not positive definite");
  const ThetaMatrix l = llt.matrixL();
  for (std::size_t m = 0; m < particles.size(); ++m) {
    for (std::size_t k = 0; k < moves; ++k) {
      Theta z;
      for (int d = 0; d < z.size(); ++d) z[d] = rng.normal();
      const Theta prop = particles[m] + l * z;
      const double lp = target(prop);
      const double u = rng.uniform();
      ++stats.proposed;
      if (lp > kNegInf && std::log(u) < lp - log_target[m]) {
        particles[m] = prop;
        log_target[m] = lp;
        ++stats.accepted;
      }
    }
  }
  return stats;
}

ThetaCloud cloud_step_ibis(const ThetaCloud& cloud, const LogWeights& reweight, const StateSpaceModel& model,
                           std::span<const AugmentedState> history, const IbisConfig& cfg, RngStream& rng,
                           RwmhStats* stats) {
  if (reweight.size() != cloud.size()) throw std::invalid_argument("cloud_step_ibis: weight count mismatch");
  ThetaCloud out;
  try {
    out.ancestors = multinomial_resample(reweight, cloud.size(), rng);
  } catch (const DegenerateWeightsError&) {
    throw DegenerateCloudError("theta cloud: every particle has zero likelihood");
  }
  out.particles.reserve(cloud.size());
  for (auto b : out.ancestors) out.particles.push_back(cloud.particles[b]);
  out.log_weights = reweight;
  if (cfg.moves == 0) return out;

  const auto target = [&](const Theta& th) { return history_log_target(model, history, th); };
  std::vector<double> lt(out.size());
  for (std::size_t m = 0; m < out.size(); ++m) lt[m] = target(out.particles[m]);
  const ThetaMatrix cov = out.covariance() + cfg.ridge * model.prior().cov;
  const double scale = 2.38 * 2.38 / static_cast<double>(Theta::RowsAtCompileTime);
  const auto s = rwmh_moves(out.particles, lt, target, scale * cov, cfg.moves, rng);
  if (stats) {
    stats->proposed += s.proposed;
    stats->accepted += s.accepted;
  }
  return out;
}

ThetaCloud cloud_step_ibis(const ThetaCloud& cloud, const StateSpaceModel& model,
                           std::span<const AugmentedState> history, const IbisConfig& cfg, RngStream& rng,
                           RwmhStats* stats) {
  if (history.size() < 2) throw std::invalid_argument("cloud_step_ibis: history needs at least one transition");
  const auto& last = history.back();
  if (!last.xi_prev) throw std::invalid_argument("cloud_step_ibis: missing design");
  const auto reweight = cloud_reweight(cloud, model, history[history.size() - 2].x, *last.xi_prev, last.x);
  return cloud_step_ibis(cloud, reweight, model, history, cfg, rng, stats);
}

double rb_transition_logpdf(std::span<const Theta> prev, const LogWeights& prev_weights, std::span<const Theta> next,
                            const JitterConfig& jc) {
  if (prev.size() != prev_weights.size()) throw std::invalid_argument("rb_transition_logpdf: weight count mismatch");
  if (jc.clamp) throw std::invalid_argument("rb_transition_logpdf: no density for a clamped kernel");
  std::vector<double> lw;
  try {
    lw = prev_weights.normalized_log();
  } catch (const DegenerateWeightsError&) {
    return kNegInf;
  }
  const Theta sd = jc.std_dev();
  Theta inv_sd = Theta::Zero();
  double log_norm = 0.0;
  for (int d = 0; d < sd.size(); ++d) {
    if (sd[d] > 0.0) {
      inv_sd[d] = 1.0 / sd[d];
      log_norm += -std::log(sd[d]) - kHalfLog2Pi;
    }
  }
  std::vector<double> terms(prev.size());
  double total = 0.0;
  for (const auto& th : next) {
    for (std::size_t k = 0; k < prev.size(); ++k) {
      double q = 0.0;
      bool support = lw[k] > kNegInf;
      for (int d = 0; d < th.size() && support; ++d) {
        if (sd[d] > 0.0) {
          const double r = (th[d] - prev[k][d]) * inv_sd[d];
          q += r * r;
        } else {
          support = th[d] == prev[k][d];
        }
      }
      terms[k] = support ? lw[k] - 0.5 * q : kNegInf;
    }
    const double lse = log_sum_exp(terms);
    if (lse == kNegInf) return kNegInf;
    total += lse + log_norm;
  }
  return total;
}

double cloud_transition_logpdf_rb(const ThetaCloud& prev, const LogWeights& prev_reweight, const ThetaCloud& next,
                                  const JitterConfig& jc) {
  return rb_transition_logpdf(prev.particles, prev_reweight, next.particles, jc);
}

}  // namespace ionpf
