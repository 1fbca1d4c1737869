#include <cmath>
#include <map>
#include <stdexcept>

#include "ionpf/policy.hpp"

namespace ionpf {

namespace {

using Mat = Eigen::MatrixXd;
using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using Dense = RecurrentGaussianPolicy::Dense;
using Gru = RecurrentGaussianPolicy::Gru;

constexpr std::size_t kInputDim = 3;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

CMap cmat(const PolicyParams& p, std::size_t offset, std::size_t rows, std::size_t cols) {
  return CMap(p.data() + offset, idx(rows), idx(cols));
}

MMap mmat(Eigen::VectorXd& p, std::size_t offset, std::size_t rows, std::size_t cols) {
  return MMap(p.data() + offset, idx(rows), idx(cols));
}

Mat inputs(std::span<const AugmentedState> z) {
  Mat x(kInputDim, idx(z.size()));
  for (std::size_t b = 0; b < z.size(); ++b) x.col(idx(b)) << z[b].x[0], z[b].x[1], z[b].design_or_zero();
  return x;
}

Mat dense_forward(const PolicyParams& p, const Dense& d, const Mat& a) {
  Mat out = cmat(p, d.weight, d.out, d.in) * a;
  out.colwise() += p.segment(idx(d.bias), idx(d.out));
  if (d.relu) out = out.cwiseMax(0.0);
  return out;
}

// Returns the gradient with respect to the layer input.
Mat dense_backward(const PolicyParams& p, const Dense& d, const Mat& in, const Mat& out, Mat dout,
                   Eigen::VectorXd& grad) {
  if (d.relu) dout = dout.cwiseProduct((out.array() > 0.0).cast<double>().matrix());
  mmat(grad, d.weight, d.out, d.in).noalias() += dout * in.transpose();
  grad.segment(idx(d.bias), idx(d.out)) += dout.rowwise().sum();
  return cmat(p, d.weight, d.out, d.in).transpose() * dout;
}

Mat sigmoid(const Mat& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

struct GruCache {
  Mat x, h, r, u, n, hn;
};

Mat gru_forward(const PolicyParams& p, const Gru& g, const Mat& x, const Mat& h, GruCache* cache) {
  const auto H = idx(g.hidden);
  Mat gi = cmat(p, g.w_input, 3 * g.hidden, g.in) * x;
  gi.colwise() += p.segment(idx(g.b_input), 3 * H);
  Mat gh = cmat(p, g.w_hidden, 3 * g.hidden, g.hidden) * h;
  gh.colwise() += p.segment(idx(g.b_hidden), 3 * H);
  Mat r = sigmoid(gi.topRows(H) + gh.topRows(H));
  Mat u = sigmoid(gi.middleRows(H, H) + gh.middleRows(H, H));
  Mat hn = gh.bottomRows(H);
  Mat n = (gi.bottomRows(H) + r.cwiseProduct(hn)).array().tanh().matrix();
  Mat out = (1.0 - u.array()).matrix().cwiseProduct(n) + u.cwiseProduct(h);
  if (cache) *cache = {x, h, std::move(r), std::move(u), std::move(n), std::move(hn)};
  return out;
}

// Accumulates parameter gradients; returns d/dx and writes d/dh_prev.
Mat gru_backward(const PolicyParams& p, const Gru& g, const GruCache& c, const Mat& dout, Mat& dh_prev,
                 Eigen::VectorXd& grad) {
  const auto H = idx(g.hidden);
  const auto B = dout.cols();
  const Mat dn = dout.cwiseProduct((1.0 - c.u.array()).matrix());
  const Mat du = dout.cwiseProduct(c.h - c.n);
  const Mat dan = dn.cwiseProduct((1.0 - c.n.array().square()).matrix());
  const Mat dar = dan.cwiseProduct(c.hn).cwiseProduct((c.r.array() * (1.0 - c.r.array())).matrix());
  const Mat dau = du.cwiseProduct((c.u.array() * (1.0 - c.u.array())).matrix());

  Mat dgi(3 * H, B);
  dgi << dar, dau, dan;
  Mat dgh(3 * H, B);
  dgh << dar, dau, dan.cwiseProduct(c.r);

  mmat(grad, g.w_input, 3 * g.hidden, g.in).noalias() += dgi * c.x.transpose();
  grad.segment(idx(g.b_input), 3 * H) += dgi.rowwise().sum();
  mmat(grad, g.w_hidden, 3 * g.hidden, g.hidden).noalias() += dgh * c.h.transpose();
  grad.segment(idx(g.b_hidden), 3 * H) += dgh.rowwise().sum();

  dh_prev = dout.cwiseProduct(c.u);
  dh_prev.noalias() += cmat(p, g.w_hidden, 3 * g.hidden, g.hidden).transpose() * dgh;
  return cmat(p, g.w_input, 3 * g.hidden, g.in).transpose() * dgi;
}

}  // namespace

RecurrentGaussianPolicy::RecurrentGaussianPolicy(PolicyArchConfig arch) : arch_(std::move(arch)) {
  arch_.kind = PolicyKind::recurrent;
  arch_.validate();
  std::size_t offset = 0;
  auto dense = [&](std::size_t in, std::size_t out, bool relu) {
    Dense d{in, out, offset, offset + in * out, relu};
    offset += in * out + out;
    return d;
  };
  std::size_t in = kInputDim;
  for (auto w : arch_.encoder_widths) {
    encoder_.push_back(dense(in, w, true));
    in = w;
  }
  encoder_.push_back(dense(in, arch_.embedding_width, false));
  in = arch_.embedding_width;
  for (auto h : arch_.recurrent_widths) {
    Gru g;
    g.in = in;
    g.hidden = h;
    g.w_input = offset;
    offset += 3 * h * in;
    g.w_hidden = offset;
    offset += 3 * h * h;
    g.b_input = offset;
    offset += 3 * h;
    g.b_hidden = offset;
    offset += 3 * h;
    g.state_offset = state_dim_;
    state_dim_ += h;
    cells_.push_back(g);
    in = h;
  }
  for (auto w : arch_.head_widths) {
    head_.push_back(dense(in, w, true));
    in = w;
  }
  head_.push_back(dense(in, 1, false));
  log_std_index_ = offset++;
  num_params_ = offset;
}

PolicyParams RecurrentGaussianPolicy::init(RngStream& rng) const {
  PolicyParams p(idx(num_params_));
  auto fill = [&](std::size_t offset, std::size_t count, double bound) {
    for (std::size_t i = 0; i < count; ++i) p[idx(offset + i)] = rng.uniform(-bound, bound);
  };
  auto init_dense = [&](const Dense& d) {
    const double k = 1.0 / std::sqrt(static_cast<double>(d.in));
    fill(d.weight, d.in * d.out, k);
    fill(d.bias, d.out, k);
  };
  for (const auto& d : encoder_) init_dense(d);
  for (const auto& g : cells_) {
    const double k = 1.0 / std::sqrt(static_cast<double>(g.hidden));
    fill(g.w_input, 3 * g.hidden * g.in, k);
    fill(g.w_hidden, 3 * g.hidden * g.hidden, k);
    fill(g.b_input, 3 * g.hidden, k);
    fill(g.b_hidden, 3 * g.hidden, k);
  }
  for (const auto& d : head_) init_dense(d);
  // Start with a near-zero mean design.
  const Dense& last = head_.back();
  p.segment(idx(last.weight), idx(last.in)) *= 0.01;
  p[idx(last.bias)] = 0.0;
  p[idx(log_std_index_)] = arch_.init_log_std;
  return p;
}

Eigen::MatrixXd RecurrentGaussianPolicy::step_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                                    std::span<const AugmentedState> z) const {
  if (states.rows() != idx(state_dim_) || states.cols() != idx(z.size()))
    throw std::invalid_argument("recurrent policy: state batch shape mismatch");
  Mat a = inputs(z);
  for (const auto& d : encoder_) a = dense_forward(params, d, a);
  Mat out(states.rows(), states.cols());
  for (const auto& g : cells_) {
    a = gru_forward(params, g, a, states.middleRows(idx(g.state_offset), idx(g.hidden)), nullptr);
    out.middleRows(idx(g.state_offset), idx(g.hidden)) = a;
  }
  return out;
}

Eigen::VectorXd RecurrentGaussianPolicy::mean_batch(const PolicyParams& params, const Eigen::MatrixXd& states) const {
  if (states.rows() != idx(state_dim_)) throw std::invalid_argument("recurrent policy: state dimension mismatch");
  Mat a = states.bottomRows(idx(cells_.back().hidden));
  for (const auto& d : head_) a = dense_forward(params, d, a);
  return a.row(0).transpose();
}

Eigen::VectorXd RecurrentGaussianPolicy::logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                                      std::span<const double> xi) const {
  if (states.cols() != idx(xi.size())) throw std::invalid_argument("recurrent policy: batch size mismatch");
  const Eigen::VectorXd mu = mean_batch(params, states);
  const double log_std = params[idx(log_std_index_)];
  Eigen::VectorXd out(mu.size());
  for (Eigen::Index b = 0; b < mu.size(); ++b)
    out[b] = squashed_gaussian::logpdf(mu[b], log_std, xi[static_cast<std::size_t>(b)]);
  return out;
}

std::vector<DesignDraw> RecurrentGaussianPolicy::sample_batch(const PolicyParams& params,
                                                              const Eigen::MatrixXd& states,
                                                              std::span<RngStream> rngs) const {
  if (states.cols() != idx(rngs.size())) throw std::invalid_argument("recurrent policy: batch size mismatch");
  const Eigen::VectorXd mu = mean_batch(params, states);
  const double log_std = params[idx(log_std_index_)];
  std::vector<DesignDraw> out;
  out.reserve(rngs.size());
  for (std::size_t b = 0; b < rngs.size(); ++b) out.push_back(squashed_gaussian::sample(mu[idx(b)], log_std, rngs[b]));
  return out;
}

Eigen::VectorXd RecurrentGaussianPolicy::score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                                               std::span<const double> weights) const {
  if (trajectories.size() != weights.size()) throw std::invalid_argument("recurrent policy: batch size mismatch");
  if (params.size() != idx(num_params_)) throw std::invalid_argument("recurrent policy: parameter size mismatch");
  std::map<std::size_t, std::pair<std::vector<const Trajectory*>, std::vector<double>>> groups;
  for (std::size_t b = 0; b < trajectories.size(); ++b) {
    if (trajectories[b].size() < 2 || weights[b] == 0.0) continue;
    auto& g = groups[trajectories[b].size()];
    g.first.push_back(&trajectories[b]);
    g.second.push_back(weights[b]);
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(idx(num_params_));
  for (const auto& [len, group] : groups) accumulate_score(params, group.first, group.second, grad);
  return grad;
}

void RecurrentGaussianPolicy::accumulate_score(const PolicyParams& params,
                                               const std::vector<const Trajectory*>& trajectories,
                                               const std::vector<double>& weights, Eigen::VectorXd& grad) const {
  struct StepCache {
    std::vector<Mat> enc_in, enc_out, head_in, head_out;
    std::vector<GruCache> cells;
    Eigen::RowVectorXd dmu;
  };
  const std::size_t B = trajectories.size();
  const std::size_t T = trajectories.front()->size() - 1;
  const double log_std = params[idx(log_std_index_)];

  std::vector<StepCache> caches(T);
  Mat state = Mat::Zero(idx(state_dim_), idx(B));
  std::vector<AugmentedState> z(B);
  for (std::size_t t = 0; t < T; ++t) {
    auto& c = caches[t];
    for (std::size_t b = 0; b < B; ++b) z[b] = (*trajectories[b])[t];
    Mat a = inputs(z);
    for (const auto& d : encoder_) {
      c.enc_in.push_back(a);
      a = dense_forward(params, d, a);
      c.enc_out.push_back(a);
    }
    Mat next(state.rows(), state.cols());
    c.cells.resize(cells_.size());
    for (std::size_t l = 0; l < cells_.size(); ++l) {
      const auto& g = cells_[l];
      a = gru_forward(params, g, a, state.middleRows(idx(g.state_offset), idx(g.hidden)), &c.cells[l]);
      next.middleRows(idx(g.state_offset), idx(g.hidden)) = a;
    }
    state = std::move(next);
    for (const auto& d : head_) {
      c.head_in.push_back(a);
      a = dense_forward(params, d, a);
      c.head_out.push_back(a);
    }
    c.dmu.resize(idx(B));
    for (std::size_t b = 0; b < B; ++b) {
      double xi_t = 0.0;
      if (const auto& xi = (*trajectories[b])[t + 1].xi_prev) {
        xi_t = *xi;
      } else {
        throw std::invalid_argument("policy score: trajectory is missing a design");
      }
      const auto g = squashed_gaussian::logpdf_gradient(a(0, idx(b)), log_std, xi_t);
      c.dmu[idx(b)] = weights[b] * g.mean;
      grad[idx(log_std_index_)] += weights[b] * g.log_std;
    }
  }

  std::vector<Mat> carry;
  for (const auto& g : cells_) carry.push_back(Mat::Zero(idx(g.hidden), idx(B)));
  for (std::size_t t = T; t-- > 0;) {
    auto& c = caches[t];
    Mat d = c.dmu;
    for (std::size_t l = head_.size(); l-- > 0;) d = dense_backward(params, head_[l], c.head_in[l], c.head_out[l], d, grad);
    Mat dcur = carry.back() + d;
    for (std::size_t l = cells_.size(); l-- > 0;) {
      Mat dh_prev;
      Mat dx = gru_backward(params, cells_[l], c.cells[l], dcur, dh_prev, grad);
      carry[l] = std::move(dh_prev);
      dcur = l > 0 ? Mat(carry[l - 1] + dx) : std::move(dx);
    }
    for (std::size_t l = encoder_.size(); l-- > 0;)
      dcur = dense_backward(params, encoder_[l], c.enc_in[l], c.enc_out[l], dcur, grad);
  }
}

}  // namespace ionpf
