#include "enumeration.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "oracles.hpp"

namespace ionpf::oracle {

std::size_t bernoulli_cell(const Trajectory& z) {
  const auto x1 = static_cast<std::size_t>(z.at(1).x[0]);
  const auto x2 = static_cast<std::size_t>(z.at(2).x[0]);
  return x1 + 2 * x2 + 4 * (*z[1].xi_prev > 0.0 ? 1 : 0) + 8 * (*z[2].xi_prev > 0.0 ? 1 : 0);
}

std::vector<double> bernoulli_cell_probabilities(const BernoulliModel& model, std::size_t hermite_nodes,
                                                 std::size_t legendre_nodes) {
  const auto gh = gauss_hermite(hermite_nodes);
  const Quadrature halves[2] = {gauss_legendre(legendre_nodes, -1.0, 0.0), gauss_legendre(legendre_nodes, 0.0, 1.0)};
  const Eigen::Matrix3d L = model.prior().cov.llt().matrixL();
  const double norm = std::pow(std::numbers::pi, -1.5);
  std::vector<double> p(16, 0.0);
  for (std::size_t i = 0; i < hermite_nodes; ++i)
    for (std::size_t j = 0; j < hermite_nodes; ++j)
      for (std::size_t k = 0; k < hermite_nodes; ++k) {
        const Eigen::Vector3d u(gh.nodes[i], gh.nodes[j], gh.nodes[k]);
        const Theta theta = model.prior().mean + std::sqrt(2.0) * L * u;
        const double wt = norm * gh.weights[i] * gh.weights[j] * gh.weights[k];
        // a[x][h] = P(next = 1 | x, xi in half h) averaged over the half with density 1/2.
        double a[2][2];
        for (int x = 0; x < 2; ++x)
          for (int h = 0; h < 2; ++h) {
            double s = 0.0;
            for (std::size_t q = 0; q < legendre_nodes; ++q)
              s += 0.5 * halves[h].weights[q] *
                   BernoulliModel::prob_one(State(static_cast<double>(x), 0.0), halves[h].nodes[q], theta);
            a[x][h] = s;
          }
        for (int x1 = 0; x1 < 2; ++x1)
          for (int x2 = 0; x2 < 2; ++x2)
            for (int h0 = 0; h0 < 2; ++h0)
              for (int h1 = 0; h1 < 2; ++h1) {
                const double p1 = x1 ? a[0][h0] : 0.5 - a[0][h0];
                const double p2 = x2 ? a[x1][h1] : 0.5 - a[x1][h1];
                p[static_cast<std::size_t>(x1 + 2 * x2 + 4 * h0 + 8 * h1)] += wt * p1 * p2;
              }
      }
  return p;
}

std::map<std::vector<std::size_t>, double> backward_path_law(const BackwardSampler& sampler,
                                                             const FilterHistory& history, std::size_t final_index) {
  const std::size_t T = history.horizon();
  const std::size_t N = history.num_particles();
  std::map<std::vector<std::size_t>, double> law;
  std::vector<std::size_t> path(T + 1, 0);
  path[T] = final_index;

  auto recurse = [&](auto&& self, std::size_t t, double prob) -> void {
    if (prob == 0.0) return;
    if (t == static_cast<std::size_t>(-1)) {
      law[path] += prob;
      return;
    }
    const std::span<const std::size_t> suffix(path.data() + t + 1, T - t);
    const std::size_t A = history.frames[t + 1].particles[path[t + 1]].ancestor;
    const auto W = history.frames[t].log_weights.normalized();
    const double wa = sampler.weight_full(t, A, suffix);
    double stay = 1.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == A) continue;
      const double wj = sampler.weight_full(t, j, suffix);
      double accept = 0.0;
      if (wj > -std::numeric_limits<double>::infinity())
        accept = wa == -std::numeric_limits<double>::infinity() ? 1.0 : std::min(1.0, std::exp(wj - wa));
      const double pj = W[j] * accept;
      stay -= pj;
      path[t] = j;
      self(self, t - 1, prob * pj);
    }
    path[t] = A;
    self(self, t - 1, prob * stay);
  };
  recurse(recurse, T - 1, 1.0);
  return law;
}

}  // namespace ionpf::oracle
