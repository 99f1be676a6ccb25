#include "totalproj/value_estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "totalproj/linear_model.hpp"
#include "totalproj/tensor_ops.hpp"

namespace totalproj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegenerateTol = 1e-12;

void check_identity(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("internal identity violated: ") + what);
}

}  // namespace

std::vector<std::pair<int, double>> first_visit_mc_targets(const Trajectory& traj,
                                                           double gamma) {
  if (traj.length() == 0) throw DimensionMismatch("empty trajectory");
  std::vector<std::pair<int, double>> out;
  std::unordered_map<int, std::size_t> slot;
  double discounted = 0.0;
  for (int i = traj.length() - 1; i >= 0; --i) {
    discounted = traj.rewards[i] + gamma * discounted;
    const int s = traj.states[i];
    auto [it, inserted] = slot.try_emplace(s, out.size());
    if (inserted) {
      out.emplace_back(s, discounted);
    } else {
      out[it->second].second = discounted;  // earlier occurrence wins
    }
  }
  return out;
}

namespace {

RowBatch batch_from_targets(const std::vector<std::pair<int, double>>& targets,
                            const FeatureMap& features) {
  RowBatch batch;
  batch.phi.resize(targets.size(), features.dim());
  batch.targets.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    batch.phi.row(static_cast<int>(i)) = features.phi.row(targets[i].first);
    batch.targets[static_cast<int>(i)] = targets[i].second;
  }
  return batch;
}

}  // namespace

IterateState normalized_mc_step(const IterateState& state,
                                const std::vector<std::pair<int, double>>& targets,
                                const FeatureMap& features, const SolverConfig& cfg,
                                StepInfo* info) {
  if (targets.empty()) throw DimensionMismatch("no first-visit targets");
  return step(state, batch_from_targets(targets, features), cfg, info);
}

McEstimate normalized_mc_solve(const MarkovRewardProcess& mrp, const FeatureMap& features,
                               const SolverConfig& cfg, int episode_length,
                               const Vector* w_star) {
  cfg.validate();
  const Vector pi = stationary_distribution(mrp.p).pi;
  Rng rng(cfg.seed);
  IterateState state{Vector::Zero(features.dim()), Vector::Zero(features.dim()), 1};

  McEstimate est;
  est.trace.records.push_back(
      {0, w_star ? (state.w - *w_star).norm() : kNaN, kNaN, kNaN, kNaN, false});
  for (long k = 1; k <= cfg.max_iters; ++k) {
    const Trajectory traj = sample_trajectory(mrp, pi, episode_length, rng);
    const auto targets = first_visit_mc_targets(traj, mrp.gamma);
    StepInfo info{kNaN, kNaN, false};
    state = normalized_mc_step(state, targets, features, cfg, &info);
    if (info.skipped) ++est.trace.skipped_steps;
    est.trace.records.push_back({k, w_star ? (state.w - *w_star).norm() : kNaN, kNaN,
                                 info.theta, info.alpha, info.skipped});
  }
  est.w = state.w;
  est.episodes = cfg.max_iters;
  return est;
}

Vector mc_fixed_point(const MarkovRewardProcess& mrp, const FeatureMap& features) {
  const Vector pi = stationary_distribution(mrp.p).pi;
  OverdeterminedSystem sys(features.phi, true_value(mrp), pi);
  return scale_invariant_solution(sys);
}

TdPairStream td_pair_stream(const Trajectory& traj, const FeatureMap& features,
                            double gamma) {
  if (traj.length() < 2) throw DimensionMismatch("need at least two states for pairs");
  TdPairStream stream;
  std::unordered_set<long> seen;
  const long m = features.states();
  for (int i = 0; i + 1 < traj.length(); ++i) {
    const int s = traj.states[i];
    const int s_next = traj.states[i + 1];
    const long key = static_cast<long>(s) * m + s_next;
    if (!seen.insert(key).second) continue;
    Vector dphi = features.phi.row(s) - gamma * features.phi.row(s_next);
    const double norm = dphi.norm();
    if (norm < kDegenerateTol) {
      ++stream.degenerate_skipped;
      continue;
    }
    stream.pairs.push_back({dphi / norm, traj.rewards[i] / norm, s, s_next});
  }
  return stream;
}

SolveResult normalized_td0_solve(const MarkovRewardProcess& mrp,
                                 const FeatureMap& features, const SolverConfig& cfg,
                                 int episode_length, const Vector* w_star) {
  cfg.validate();
  const Vector pi = stationary_distribution(mrp.p).pi;
  Rng rng(cfg.seed);
  IterateState state{Vector::Zero(features.dim()), Vector::Zero(features.dim()), 1};

  SolveResult result;
  result.trace.records.push_back(
      {0, w_star ? (state.w - *w_star).norm() : kNaN, kNaN, kNaN, kNaN, false});
  for (long k = 1; k <= cfg.max_iters; ++k) {
    const Trajectory traj = sample_trajectory(mrp, pi, episode_length, rng);
    TdPairStream stream = td_pair_stream(traj, features, mrp.gamma);
    result.trace.degenerate_pairs += stream.degenerate_skipped;
    if (stream.pairs.empty()) {
      // Nothing usable this episode; momentum-only step keeps the iterate moving.
      IterateState next{state.w + cfg.beta * (state.w - state.w_prev), state.w,
                        state.k + 1};
      state = next;
      ++result.trace.skipped_steps;
      result.trace.records.push_back(
          {k, w_star ? (state.w - *w_star).norm() : kNaN, kNaN, kNaN, kNaN, true});
      continue;
    }
    RowBatch batch;
    batch.phi.resize(stream.pairs.size(), features.dim());
    batch.targets.resize(stream.pairs.size());
    for (std::size_t i = 0; i < stream.pairs.size(); ++i) {
      batch.phi.row(static_cast<int>(i)) = stream.pairs[i].l.transpose();
      batch.targets[static_cast<int>(i)] = stream.pairs[i].rho;
    }
    StepInfo info{kNaN, kNaN, false};
    state = step(state, batch, cfg, &info);
    if (info.skipped) ++result.trace.skipped_steps;
    result.trace.records.push_back({k, w_star ? (state.w - *w_star).norm() : kNaN, kNaN,
                                    info.theta, info.alpha, info.skipped});
  }
  result.w = state.w;
  return result;
}

namespace {

struct PairSums {
  Matrix lhs;   // sum pi_s P_ss' L L^T
  Vector rhs;   // sum pi_s P_ss' rho L
};

PairSums accumulate_pairs(const MarkovRewardProcess& mrp, const FeatureMap& features,
                          const Vector& pi) {
  const int m = mrp.states();
  const int n = features.dim();
  PairSums sums{Matrix::Zero(n, n), Vector::Zero(n)};
  for (int s = 0; s < m; ++s) {
    for (int t = 0; t < m; ++t) {
      if (mrp.p(s, t) <= 0.0) continue;
      Vector dphi = features.phi.row(s) - mrp.gamma * features.phi.row(t);
      const double norm = dphi.norm();
      if (norm < kDegenerateTol) {
        throw DegeneratePair("reachable pair (" + std::to_string(s) + "," +
                             std::to_string(t) + ") has phi_s ~ gamma*phi_s'");
      }
      const Vector l = dphi / norm;
      const double weight = pi[s] * mrp.p(s, t);
      sums.lhs.noalias() += weight * (l * l.transpose());
      sums.rhs.noalias() += weight * (mrp.r(s, t) / norm) * l;
    }
  }
  return sums;
}

}  // namespace

Vector td0_fixed_point_bruteforce(const MarkovRewardProcess& mrp,
                                  const FeatureMap& features) {
  const Vector pi = stationary_distribution(mrp.p).pi;
  const PairSums sums = accumulate_pairs(mrp, features, pi);
  return guarded_spd_solve(sums.lhs, sums.rhs, "td0_fixed_point_bruteforce");
}

Vector td0_fixed_point_tensor(const MarkovRewardProcess& mrp,
                              const FeatureMap& features) {
  const int m = mrp.states();
  const int n = features.dim();
  const Vector pi = stationary_distribution(mrp.p).pi;

  Tensor3 l_tensor(m, m, n);
  Matrix rho(m, m);
  rho.setZero();
  for (int s = 0; s < m; ++s) {
    for (int t = 0; t < m; ++t) {
      Vector dphi = features.phi.row(s) - mrp.gamma * features.phi.row(t);
      const double norm = dphi.norm();
      if (norm < kDegenerateTol) {
        if (mrp.p(s, t) > 0.0) {
          throw DegeneratePair("reachable pair (" + std::to_string(s) + "," +
                               std::to_string(t) + ") has phi_s ~ gamma*phi_s'");
        }
        continue;  // unreachable and degenerate: the zero fiber never enters
      }
      for (int j = 0; j < n; ++j) l_tensor(s, t, j) = dphi[j] / norm;
      rho(s, t) = mrp.r(s, t) / norm;
    }
  }

  const Tensor3 prob = build_probability_tensor(mrp.p);
  const Tensor3 lt_p = slice_transform_product(transpose(l_tensor), prob);
  const Tensor3 quadratic = slice_transform_product(lt_p, l_tensor);
  const Tensor3 weighted = mode_p_multiply(quadratic, Matrix(pi.asDiagonal()), 1);

  Matrix lhs = Matrix::Zero(n, n);
  for (int s = 0; s < m; ++s) lhs += weighted.slice(s);

  const Matrix per_state_rhs = slice_contract_product(lt_p, rho);  // m x n
  const Vector rhs = per_state_rhs.transpose() * pi;

  return guarded_spd_solve(lhs, rhs, "td0_fixed_point_tensor");
}

double d_norm(const Vector& x, const Vector& pi) {
  if (x.size() != pi.size()) throw DimensionMismatch("d_norm: size mismatch");
  if (std::abs(pi.sum() - 1.0) > 1e-9) throw DimensionMismatch("d_norm: pi must sum to 1");
  return std::sqrt(pi.dot(x.cwiseAbs2()));
}

double td_pair_error(const MarkovRewardProcess& mrp, const FeatureMap& features,
                     const Vector& w) {
  const Vector pi = stationary_distribution(mrp.p).pi;
  double acc = 0.0;
  for (int s = 0; s < mrp.states(); ++s) {
    for (int t = 0; t < mrp.states(); ++t) {
      if (mrp.p(s, t) <= 0.0) continue;
      Vector dphi = features.phi.row(s) - mrp.gamma * features.phi.row(t);
      const double norm = dphi.norm();
      const double resid = (dphi.dot(w) - mrp.r(s, t)) / norm;
      acc += pi[s] * mrp.p(s, t) * resid * resid;
    }
  }
  return acc;
}

BoundReport check_error_bound(const MarkovRewardProcess& mrp,
                              const FeatureMap& features) {
  const int m = mrp.states();
  const Vector pi = stationary_distribution(mrp.p).pi;
  const Vector v = true_value(mrp);
  const Vector rbar = expected_one_step_reward(mrp);

  // One-step reward and value-matrix identities used by the bound derivation.
  {
    Matrix value_matrix = v * Matrix::Ones(1, m);  // row s constant at V_s
    const Vector row_sum = mrp.p.cwiseProduct(value_matrix).rowwise().sum();
    const Vector col_sum = mrp.p.cwiseProduct(value_matrix.transpose()).rowwise().sum();
    check_identity((row_sum - v).norm() <= 1e-10 * (1.0 + v.norm()), "(P o V1')1 = V");
    check_identity((col_sum - mrp.p * v).norm() <= 1e-10 * (1.0 + v.norm()),
                   "(P o (V1')^T)1 = PV");
    Vector rbar_loop = Vector::Zero(m);
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) rbar_loop[s] += mrp.p(s, t) * mrp.r(s, t);
    check_identity((rbar_loop - rbar).norm() <= 1e-12 * (1.0 + rbar.norm()),
                   "Rbar = (R o P)1");
    check_identity((v - rbar - mrp.gamma * mrp.p * v).norm() <= 1e-8 * (1.0 + v.norm()),
                   "Bellman consistency");
  }

  BoundReport report;
  report.w_n = td0_fixed_point_bruteforce(mrp, features);
  {
    OverdeterminedSystem sys(features.phi, v, pi);
    report.w_l = least_squares_solution(sys);
  }
  const Vector err_n = features.phi * report.w_n - v;
  const Vector err_l = features.phi * report.w_l - v;

  Matrix inv_dist = Matrix::Zero(m, m);
  for (int s = 0; s < m; ++s) {
    for (int t = 0; t < m; ++t) {
      if (mrp.p(s, t) <= 0.0) continue;
      const double norm =
          (features.phi.row(s) - mrp.gamma * features.phi.row(t)).norm();
      if (norm < kDegenerateTol) {
        throw DegeneratePair("reachable pair (" + std::to_string(s) + "," +
                             std::to_string(t) + ") has phi_s ~ gamma*phi_s'");
      }
      inv_dist(s, t) = 1.0 / norm;
    }
  }

  // Pair-level norm over the (pi, P) sampling measure of the weighted
  // value-difference structure (x_s - gamma x_s') / ||dphi_ss'||.
  const auto pair_norm = [&](const Vector& x) {
    double acc = 0.0;
    for (int s = 0; s < m; ++s) {
      for (int t = 0; t < m; ++t) {
        if (mrp.p(s, t) <= 0.0) continue;
        const double e = inv_dist(s, t) * (x[s] - mrp.gamma * x[t]);
        acc += pi[s] * mrp.p(s, t) * e * e;
      }
    }
    return std::sqrt(acc);
  };
  // Row-summed vector form of the same structure.
  const auto vector_form = [&](const Vector& x) {
    Vector row = Vector::Zero(m);
    for (int s = 0; s < m; ++s) {
      for (int t = 0; t < m; ++t) {
        row[s] += mrp.p(s, t) * inv_dist(s, t) * (x[s] - mrp.gamma * x[t]);
      }
    }
    return d_norm(row, pi);
  };

  report.lhs = pair_norm(err_n);
  report.rhs = pair_norm(err_l) / (1.0 - mrp.gamma);
  report.lhs_vector_form = vector_form(err_n);
  report.rhs_vector_form = vector_form(err_l) / (1.0 - mrp.gamma);

  double resid = 0.0;
  for (int s = 0; s < m; ++s) {
    for (int t = 0; t < m; ++t) {
      if (mrp.p(s, t) <= 0.0) continue;
      const double e = inv_dist(s, t) * (v[s] - mrp.gamma * v[t] - mrp.r(s, t));
      resid += pi[s] * mrp.p(s, t) * e * e;
    }
  }
  report.true_value_pair_residual = std::sqrt(resid);

  report.holds = report.lhs <= report.rhs * (1.0 + 1e-12) + 1e-12;
  return report;
}

}  // namespace totalproj
