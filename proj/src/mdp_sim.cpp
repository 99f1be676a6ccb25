#include "totalproj/mdp_sim.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace totalproj {

MarkovRewardProcess::MarkovRewardProcess(Matrix p_in, Matrix r_in, double gamma_in)
    : p(std::move(p_in)), r(std::move(r_in)), gamma(gamma_in) {
  const auto m = p.rows();
  if (p.cols() != m || r.rows() != m || r.cols() != m) {
    throw DimensionMismatch("P and R must be square and same size");
  }
  for (Eigen::Index s = 0; s < m; ++s) {
    if (p.row(s).minCoeff() < 0.0 || std::abs(p.row(s).sum() - 1.0) > 1e-9) {
      throw NotStochastic("transition row " + std::to_string(s));
    }
  }
  if (!r.allFinite()) throw DimensionMismatch("rewards must be finite");
  if (gamma < 0.0 || gamma >= 1.0) throw DimensionMismatch("gamma must lie in [0, 1)");
}

StationaryDistribution stationary_distribution(const Matrix& p) {
  const int m = static_cast<int>(p.rows());
  Vector pi = Vector::Constant(m, 1.0 / m);
  for (long sweep = 0; sweep < 1000000; ++sweep) {
    Vector next = p.transpose() * pi;
    next /= next.sum();
    const double residual = (next - pi).lpNorm<1>();
    pi = next;
    if (residual < 1e-12) return {pi};
  }
  throw NoConvergence("power iteration stalled; chain may not be ergodic");
}

Vector expected_one_step_reward(const MarkovRewardProcess& mrp) {
  return mrp.p.cwiseProduct(mrp.r).rowwise().sum();
}

Vector true_value(const MarkovRewardProcess& mrp) {
  const int m = mrp.states();
  const Matrix a = Matrix::Identity(m, m) - mrp.gamma * mrp.p;
  Eigen::PartialPivLU<Matrix> lu(a);
  const Vector rbar = expected_one_step_reward(mrp);
  const Vector v = lu.solve(rbar);
  if ((a * v - rbar).norm() > 1e-8 * (1.0 + rbar.norm())) {
    throw SingularSystem("Bellman solve failed");
  }
  return v;
}

namespace {

Trajectory rollout(const MarkovRewardProcess& mrp, int start, int length, Rng& rng) {
  if (length < 2) throw DimensionMismatch("trajectory length must be >= 2");
  Trajectory traj;
  traj.states.reserve(length);
  traj.rewards.reserve(length);
  int s = start;
  for (int t = 0; t < length; ++t) {
    const int next = rng.categorical(mrp.p.row(s).transpose());
    traj.states.push_back(s);
    traj.rewards.push_back(mrp.r(s, next));
    s = next;
  }
  traj.final_state = s;
  return traj;
}

}  // namespace

Trajectory sample_trajectory(const MarkovRewardProcess& mrp, int start, int length,
                             Rng& rng) {
  if (start < 0 || start >= mrp.states()) throw DimensionMismatch("bad start state");
  return rollout(mrp, start, length, rng);
}

Trajectory sample_trajectory(const MarkovRewardProcess& mrp, const Vector& start_dist,
                             int length, Rng& rng) {
  if (start_dist.size() != mrp.states()) throw DimensionMismatch("bad start distribution");
  return rollout(mrp, rng.categorical(start_dist), length, rng);
}

OutlierChain outlier_chain(int m, double mu, double sigma, double p_outlier,
                           double reward, double gamma, Rng& rng) {
  if (m < 2) throw DimensionMismatch("outlier chain needs at least 2 states");
  if (sigma < 0.0) throw DimensionMismatch("sigma must be non-negative");
  Matrix p = Matrix::Constant(m, m, 1.0 / m);
  Matrix r = Matrix::Constant(m, m, reward);
  Matrix phi(m, 1);
  for (int s = 0; s + 1 < m; ++s) phi(s, 0) = rng.normal(mu, sigma);
  phi(m - 1, 0) = p_outlier * mu;
  return {MarkovRewardProcess(std::move(p), std::move(r), gamma), FeatureMap{phi}};
}

RandomChain random_ergodic_chain(int m, int n, double gamma, Rng& rng) {
  // Convex combination of random permutations keeps the chain doubly
  // stochastic (uniform pi); blending toward the uniform kernel guarantees
  // ergodicity and aperiodicity.
  constexpr int kPermutations = 6;
  Matrix p = Matrix::Zero(m, m);
  Vector mix(kPermutations);
  for (int j = 0; j < kPermutations; ++j) mix[j] = -std::log(1.0 - rng.uniform());
  mix /= mix.sum();
  std::vector<int> perm(m);
  for (int j = 0; j < kPermutations; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    for (int s = 0; s < m; ++s) p(s, perm[s]) += mix[j];
  }
  p = 0.7 * p + Matrix::Constant(m, m, 0.3 / m);
  for (int s = 0; s < m; ++s) p.row(s) /= p.row(s).sum();

  Matrix r(m, m);
  for (int s = 0; s < m; ++s)
    for (int t = 0; t < m; ++t) r(s, t) = rng.uniform(0.5, 1.5);

  Matrix phi(m, n);
  for (int s = 0; s < m; ++s) {
    do {
      for (int j = 0; j < n; ++j) phi(s, j) = rng.normal();
    } while (phi.row(s).norm() < 0.5);
  }
  return {MarkovRewardProcess(std::move(p), std::move(r), gamma), FeatureMap{phi}};
}

}  // namespace totalproj
