#pragma once

#include <utility>
#include <vector>

#include "totalproj/mdp_sim.hpp"
#include "totalproj/total_projections.hpp"

namespace totalproj {

struct McEstimate {
  Vector w;
  SolveTrace trace;
  long episodes = 0;
};

// One sampled state pair: unit direction of phi_s - gamma*phi_s' and the
// distance-normalized reward.
struct TdPairSample {
  Vector l;
  double rho = 0.0;
  int s = -1;
  int s_next = -1;
};

struct TdPairStream {
  std::vector<TdPairSample> pairs;
  long degenerate_skipped = 0;
};

struct BoundReport {
  // Pair-level forms over the (pi, P) sampling measure; `holds` compares these.
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  // Row-summed vector forms, exposed for audit alongside the pair forms.
  double lhs_vector_form = 0.0;
  double rhs_vector_form = 0.0;
  // Pair residual of the exact value vector itself (zero for constant rewards).
  double true_value_pair_residual = 0.0;
  Vector w_n;
  Vector w_l;
};

// Discounted first-visit returns, scanned from the last state backwards. A
// repeated state keeps the return of its earliest occurrence.
std::vector<std::pair<int, double>> first_visit_mc_targets(const Trajectory& traj,
                                                           double gamma);

// One solver step whose batch is the first-visit (phi, return) set.
IterateState normalized_mc_step(const IterateState& state,
                                const std::vector<std::pair<int, double>>& targets,
                                const FeatureMap& features, const SolverConfig& cfg,
                                StepInfo* info = nullptr);

// Episodic estimation of the row-normalized fixed point. Episodes start from
// the stationary distribution; episode_length bounds the truncated returns.
McEstimate normalized_mc_solve(const MarkovRewardProcess& mrp, const FeatureMap& features,
                               const SolverConfig& cfg, int episode_length,
                               const Vector* w_star = nullptr);

// Analytic fixed point (Phi^T N D N Phi)^{-1} Phi^T N D N V with D = diag(pi).
Vector mc_fixed_point(const MarkovRewardProcess& mrp, const FeatureMap& features);

// First-visit-unique consecutive state pairs of the trajectory with their
// normalized directions and rewards. Near-zero phi_s - gamma*phi_s' pairs are
// skipped and counted.
TdPairStream td_pair_stream(const Trajectory& traj, const FeatureMap& features,
                            double gamma);

// Stochastic solve over per-episode pair batches.
SolveResult normalized_td0_solve(const MarkovRewardProcess& mrp,
                                 const FeatureMap& features, const SolverConfig& cfg,
                                 int episode_length, const Vector* w_star = nullptr);

// Fixed point of the expected pair update, solved by explicit double loops
// over reachable pairs. A reachable pair with zero direction is an error.
Vector td0_fixed_point_bruteforce(const MarkovRewardProcess& mrp,
                                  const FeatureMap& features);

// Same fixed point assembled through the slice/contraction tensor products.
Vector td0_fixed_point_tensor(const MarkovRewardProcess& mrp,
                              const FeatureMap& features);

// Stationary-weighted norm sqrt(sum_s pi_s x_s^2).
double d_norm(const Vector& x, const Vector& pi);

// Compares the inverse-distance-weighted estimation errors of the normalized
// TD(0) fixed point against the least-squares value, scaled by 1/(1 - gamma).
BoundReport check_error_bound(const MarkovRewardProcess& mrp, const FeatureMap& features);

// Pair-level objective sum_s pi_s sum_s' P_ss' ((dphi^T w - R)/||dphi||)^2.
double td_pair_error(const MarkovRewardProcess& mrp, const FeatureMap& features,
                     const Vector& w);

}  // namespace totalproj
