#pragma once

#include <cstdint>
#include <vector>

#include "totalproj/common.hpp"
#include "totalproj/rng.hpp"

namespace totalproj {

// Markov reward process under a fixed policy: the policy is pre-composed into
// the transition matrix P and transition rewards R, discounted by gamma.
struct MarkovRewardProcess {
  Matrix p;      // row-stochastic, m x m
  Matrix r;      // reward on transition s -> s'
  double gamma;  // in [0, 1)

  MarkovRewardProcess(Matrix p_in, Matrix r_in, double gamma_in);
  int states() const { return static_cast<int>(p.rows()); }
};

struct StationaryDistribution {
  Vector pi;
  Matrix diagonal() const { return Matrix(pi.asDiagonal()); }
};

struct FeatureMap {
  Matrix phi;  // row s = phi_s^T
  int states() const { return static_cast<int>(phi.rows()); }
  int dim() const { return static_cast<int>(phi.cols()); }
};

// States S_0..S_{T-1} with rewards R_1..R_T; rewards[i] is earned on leaving
// states[i], and final_state is where the last transition landed.
struct Trajectory {
  std::vector<int> states;
  std::vector<double> rewards;
  int final_state = -1;

  int length() const { return static_cast<int>(states.size()); }
};

// Power iteration to residual 1e-12, at most 1e6 sweeps.
StationaryDistribution stationary_distribution(const Matrix& p);

// One-step expected reward per state: (P o R) 1.
Vector expected_one_step_reward(const MarkovRewardProcess& mrp);

// Exact value vector: solves (I - gamma P) V = Rbar.
Vector true_value(const MarkovRewardProcess& mrp);

// Markov path of T states sampled from a start state.
Trajectory sample_trajectory(const MarkovRewardProcess& mrp, int start, int length,
                             Rng& rng);

// Start state drawn from the given distribution.
Trajectory sample_trajectory(const MarkovRewardProcess& mrp, const Vector& start_dist,
                             int length, Rng& rng);

// Uniform chain with constant transition reward and one large-norm feature:
// states 0..m-2 get scalar features from Normal(mu, sigma), state m-1 gets
// p_outlier * mu.
struct OutlierChain {
  MarkovRewardProcess mrp;
  FeatureMap features;
};
OutlierChain outlier_chain(int m, double mu, double sigma, double p_outlier,
                           double reward, double gamma, Rng& rng);

// Random ergodic chain with uniform stationary distribution: a mixture of
// permutation matrices blended toward the uniform kernel. Rewards uniform in
// [0.5, 1.5), features standard normal with row norms kept above 0.5.
struct RandomChain {
  MarkovRewardProcess mrp;
  FeatureMap features;
};
RandomChain random_ergodic_chain(int m, int n, double gamma, Rng& rng);

}  // namespace totalproj
