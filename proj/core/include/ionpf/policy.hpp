#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ionpf/model.hpp"
#include "ionpf/random.hpp"

namespace ionpf {

enum class PolicyKind { recurrent, linear, random };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

/// Layer sizes of the design policy. The defaults are the benchmark network:
/// encoder Dense 256 -> Dense 256 -> 64, two GRU layers of 64, head Dense 256 -> Dense 256.
struct PolicyArchConfig {
  PolicyKind kind = PolicyKind::recurrent;
  std::vector<std::size_t> encoder_widths{256, 256};
  std::size_t embedding_width = 64;
  std::vector<std::size_t> recurrent_widths{64, 64};
  std::vector<std::size_t> head_widths{256, 256};
  std::size_t design_dim = 1;
  double init_log_std = -1.0;

  void validate() const;
  bool operator==(const PolicyArchConfig&) const = default;
};

/// Flat parameter vector phi.
using PolicyParams = Eigen::VectorXd;
/// Recurrent summary of z_{0:t}; empty for policies without memory.
using PolicyState = Eigen::VectorXd;
/// z_0, ..., z_T. The design chosen at step t is z_{t+1}.xi_prev.
using Trajectory = std::vector<AugmentedState>;

struct DesignDraw {
  double xi;
  double logpdf;
};

/// Stochastic design policy pi_phi(xi_t | z_{0:t}).
///
/// States are carried column-wise in batched calls: column b of `states` is
/// the state of sample b. The single-sample helpers wrap the batched ones.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const PolicyArchConfig& arch() const = 0;
  virtual std::size_t num_params() const = 0;
  virtual std::size_t state_dim() const = 0;
  /// True when pi(xi_t | z_{0:t}) depends on z_t only.
  virtual bool memoryless() const = 0;
  virtual PolicyParams init(RngStream& rng) const = 0;

  virtual Eigen::MatrixXd step_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                     std::span<const AugmentedState> z) const = 0;
  virtual Eigen::VectorXd logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                       std::span<const double> xi) const = 0;
  virtual std::vector<DesignDraw> sample_batch(const PolicyParams& params,
                                               const Eigen::MatrixXd& states,
                                               std::span<RngStream> rngs) const = 0;

  /// sum_b w_b sum_t grad_phi log pi(xi_t^b | z^b_{0:t}).
  virtual Eigen::VectorXd score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                                std::span<const double> weights) const = 0;

  PolicyState initial_state() const { return PolicyState::Zero(static_cast<Eigen::Index>(state_dim())); }
  PolicyState step(const PolicyParams& params, const PolicyState& state, const AugmentedState& z) const;
  DesignDraw sample(const PolicyParams& params, const PolicyState& state, RngStream& rng) const;
  double logpdf(const PolicyParams& params, const PolicyState& state, double xi) const;
  Eigen::VectorXd score(const PolicyParams& params, const Trajectory& trajectory) const;
  /// State after consuming every element of `prefix`.
  PolicyState state_after(const PolicyParams& params, std::span<const AugmentedState> prefix) const;
};

std::unique_ptr<Policy> make_policy(const PolicyArchConfig& arch);

/// xi = tanh(a), a ~ Normal(mean, exp(log_std)^2).
namespace squashed_gaussian {

/// -inf outside the open interval (-1, 1).
double logpdf(double mean, double log_std, double xi);
double cdf(double mean, double log_std, double xi);
/// Draw with its log-density; |xi| < 1 is guaranteed.
DesignDraw sample(double mean, double log_std, RngStream& rng);

struct Gradient {
  double mean;
  double log_std;
};
Gradient logpdf_gradient(double mean, double log_std, double xi);

}  // namespace squashed_gaussian

/// Encoder MLP, stacked GRU cells and a Gaussian head on the last hidden state.
///
/// GRU variant (one bias per input and per recurrent projection):
///   r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
///   u  = sigmoid(W_iu x + b_iu + W_hu h + b_hu)
///   n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - u) * n + u * h
/// The log standard deviation is a single state-independent parameter.
class RecurrentGaussianPolicy final : public Policy {
 public:
  explicit RecurrentGaussianPolicy(PolicyArchConfig arch);

  const PolicyArchConfig& arch() const override { return arch_; }
  std::size_t num_params() const override { return num_params_; }
  std::size_t state_dim() const override { return state_dim_; }
  bool memoryless() const override { return false; }
  PolicyParams init(RngStream& rng) const override;

  Eigen::MatrixXd step_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                             std::span<const AugmentedState> z) const override;
  Eigen::VectorXd logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                               std::span<const double> xi) const override;
  std::vector<DesignDraw> sample_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                       std::span<RngStream> rngs) const override;
  Eigen::VectorXd score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                        std::span<const double> weights) const override;
  using Policy::score;

  /// Pre-squash mean for each column of `states`.
  Eigen::VectorXd mean_batch(const PolicyParams& params, const Eigen::MatrixXd& states) const;

  struct Dense {
    std::size_t in = 0, out = 0, weight = 0, bias = 0;
    bool relu = false;
  };
  struct Gru {
    std::size_t in = 0, hidden = 0, w_input = 0, w_hidden = 0, b_input = 0, b_hidden = 0;
    std::size_t state_offset = 0;
  };

 private:
  void accumulate_score(const PolicyParams& params, const std::vector<const Trajectory*>& trajectories,
                        const std::vector<double>& weights, Eigen::VectorXd& grad) const;

  PolicyArchConfig arch_;
  std::vector<Dense> encoder_;
  std::vector<Gru> cells_;
  std::vector<Dense> head_;
  std::size_t log_std_index_ = 0;
  std::size_t num_params_ = 0;
  std::size_t state_dim_ = 0;
};

/// Memoryless mean mu = w . [q, q_dot, xi_prev, sin q, cos q] + b with a
/// learnable log standard deviation. Same contract as the recurrent policy at
/// a fraction of the cost.
class LinearGaussianPolicy final : public Policy {
 public:
  static constexpr std::size_t kFeatures = 5;

  explicit LinearGaussianPolicy(PolicyArchConfig arch);

  const PolicyArchConfig& arch() const override { return arch_; }
  std::size_t num_params() const override { return kFeatures + 2; }
  std::size_t state_dim() const override { return kFeatures; }
  bool memoryless() const override { return true; }
  PolicyParams init(RngStream& rng) const override;

  Eigen::MatrixXd step_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                             std::span<const AugmentedState> z) const override;
  Eigen::VectorXd logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                               std::span<const double> xi) const override;
  std::vector<DesignDraw> sample_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                       std::span<RngStream> rngs) const override;
  Eigen::VectorXd score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                        std::span<const double> weights) const override;
  using Policy::score;

  static Eigen::Matrix<double, kFeatures, 1> features(const AugmentedState& z);

 private:
  PolicyArchConfig arch_;
};

/// Designs drawn uniformly on (-1, 1), independent of the history.
class UniformRandomPolicy final : public Policy {
 public:
  explicit UniformRandomPolicy(PolicyArchConfig arch = random_arch());

  static PolicyArchConfig random_arch();

  const PolicyArchConfig& arch() const override { return arch_; }
  std::size_t num_params() const override { return 0; }
  std::size_t state_dim() const override { return 0; }
  bool memoryless() const override { return true; }
  PolicyParams init(RngStream&) const override { return PolicyParams(0); }

  Eigen::MatrixXd step_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                             std::span<const AugmentedState> z) const override;
  Eigen::VectorXd logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                               std::span<const double> xi) const override;
  std::vector<DesignDraw> sample_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                       std::span<RngStream> rngs) const override;
  Eigen::VectorXd score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                        std::span<const double> weights) const override;
  using Policy::score;

 private:
  PolicyArchConfig arch_;
};

/// xi ~ Uniform(-1, 1).
double random_policy_sample(RngStream& rng);

}  // namespace ionpf
