#include <doctest.h>

#include <cmath>
#include <map>

#include "totalproj/linear_model.hpp"
#include "totalproj/value_estimators.hpp"

using namespace totalproj;

namespace {

Trajectory make_trajectory(std::vector<int> states, std::vector<double> rewards,
                           int final_state) {
  Trajectory t;
  t.states = std::move(states);
  t.rewards = std::move(rewards);
  t.final_state = final_state;
  return t;
}

MarkovRewardProcess random_mrp(int m, double gamma, Rng& rng) {
  Matrix p(m, m), r(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      p(i, j) = rng.uniform(0.05, 1.0);
      r(i, j) = rng.uniform(-1.0, 1.0);
    }
    p.row(i) /= p.row(i).sum();
  }
  return MarkovRewardProcess(std::move(p), std::move(r), gamma);
}

FeatureMap random_features(int m, int n, Rng& rng) {
  Matrix phi(m, n);
  for (int s = 0; s < m; ++s) {
    do {
      for (int j = 0; j < n; ++j) phi(s, j) = rng.normal();
    } while (phi.row(s).norm() < 0.3);
  }
  return FeatureMap{phi};
}

// Loop oracle for the expected-update fixed point, kept free of any tensor
// or solver machinery beyond the final linear solve.
void pair_sums_oracle(const MarkovRewardProcess& mrp, const FeatureMap& f,
                      const Vector& pi, Matrix* lhs, Vector* rhs) {
  const int n = f.dim();
  *lhs = Matrix::Zero(n, n);
  *rhs = Vector::Zero(n);
  for (int s = 0; s < mrp.states(); ++s) {
    for (int t = 0; t < mrp.states(); ++t) {
      if (mrp.p(s, t) <= 0.0) continue;
      const Vector dphi = f.phi.row(s) - mrp.gamma * f.phi.row(t);
      const Vector l = dphi / dphi.norm();
      *lhs += pi[s] * mrp.p(s, t) * (l * l.transpose());
      *rhs += pi[s] * mrp.p(s, t) * (mrp.r(s, t) / dphi.norm()) * l;
    }
  }
}

}  // namespace

TEST_CASE("first-visit returns") {
  // a -> b with rewards (1, 1) at gamma = 0.5.
  const Trajectory ab = make_trajectory({0, 1}, {1.0, 1.0}, 0);
  auto targets = first_visit_mc_targets(ab, 0.5);
  std::map<int, double> by_state(targets.begin(), targets.end());
  CHECK(by_state[1] == doctest::Approx(1.0));
  CHECK(by_state[0] == doctest::Approx(1.5));

  // Single transition.
  const Trajectory single = make_trajectory({2}, {0.7}, 0);
  targets = first_visit_mc_targets(single, 0.9);
  REQUIRE(targets.size() == 1);
  CHECK(targets[0].first == 2);
  CHECK(targets[0].second == doctest::Approx(0.7));

  // a-b-a: the repeated state keeps the value of its earliest occurrence,
  // which is the one reached last in the backward scan.
  const Trajectory aba = make_trajectory({0, 1, 0}, {1.0, 2.0, 4.0}, 1);
  targets = first_visit_mc_targets(aba, 0.5);
  REQUIRE(targets.size() == 2);
  std::map<int, double> values(targets.begin(), targets.end());
  CHECK(values[0] == doctest::Approx(1.0 + 0.5 * 2.0 + 0.25 * 4.0));
  CHECK(values[1] == doctest::Approx(2.0 + 0.5 * 4.0));

  // Every truncated return is capped by R_max/(1-gamma).
  Rng rng(41);
  const MarkovRewardProcess mrp = random_mrp(6, 0.8, rng);
  const double cap = mrp.r.cwiseAbs().maxCoeff() / (1.0 - mrp.gamma);
  for (int rep = 0; rep < 20; ++rep) {
    const Trajectory traj = sample_trajectory(mrp, rep % 6, 30, rng);
    for (const auto& [state, value] : first_visit_mc_targets(traj, mrp.gamma)) {
      CHECK(std::abs(value) <= cap + 1e-12);
    }
  }
}

TEST_CASE("normalized MC step matches a hand-computed update") {
  Matrix phi(2, 2);
  phi << 1.0, 0.0, 1.0, 1.0;
  FeatureMap features{phi};
  std::vector<std::pair<int, double>> targets{{0, 2.0}, {1, 1.0}};

  SolverConfig cfg;
  cfg.step_rule = StepRule::kFixedAlpha;
  cfg.alpha = 0.8;
  cfg.beta = 0.25;

  Vector w(2), w_prev(2);
  w << 0.5, -0.5;
  w_prev << 0.0, 0.0;
  const IterateState next =
      normalized_mc_step({w, w_prev, 4}, targets, features, cfg, nullptr);

  // U1 = (1/2) sum ((phi^T w - target)/||phi||^2) phi over the two rows.
  Vector u1 = Vector::Zero(2);
  u1 += (w[0] - 2.0) * phi.row(0).transpose() / 1.0;
  u1 += ((w[0] + w[1]) - 1.0) * phi.row(1).transpose() / 2.0;
  u1 *= 0.5;
  const Vector expect = w - 0.8 * u1 + 0.25 * (w - w_prev);
  CHECK((next.w - expect).norm() < 1e-14);

  // With w already at the consistent solution and exact targets, U1 = 0.
  Vector sol(2);
  sol << 2.0, -1.0;
  const IterateState still =
      normalized_mc_step({sol, sol, 4}, targets, features, cfg, nullptr);
  CHECK((still.w - sol).norm() < 1e-14);
}

TEST_CASE("MC fixed point") {
  Rng rng(5);
  // Square invertible features: the consistent solution ignores weights.
  Matrix phi(3, 3);
  phi << 1.0, 0.2, 0.0, 0.0, 2.0, 0.1, 0.3, 0.0, 1.5;
  const MarkovRewardProcess mrp = random_mrp(3, 0.7, rng);
  const Vector v = true_value(mrp);
  const Vector w = mc_fixed_point(mrp, FeatureMap{phi});
  CHECK((phi * w - v).norm() < 1e-9);

  // Unit-norm rows and uniform stationary weights reduce to least squares.
  const int m = 6;
  Matrix unit(m, 2);
  for (int s = 0; s < m; ++s) {
    Vector row(2);
    do {
      row << rng.normal(), rng.normal();
    } while (row.norm() < 0.3);
    unit.row(s) = row / row.norm();
  }
  Matrix p_unif = Matrix::Constant(m, m, 1.0 / m);
  Matrix r_unif(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r_unif(i, j) = rng.uniform(0.0, 1.0);
  MarkovRewardProcess chain(p_unif, r_unif, 0.6);
  const Vector v_unif = true_value(chain);
  const Vector w_m = mc_fixed_point(chain, FeatureMap{unit});
  OverdeterminedSystem sys(unit, v_unif);
  CHECK((w_m - least_squares_solution(sys)).norm() < 1e-10);

  // Stationarity condition of the fixed point.
  const MarkovRewardProcess mrp2 = random_mrp(7, 0.5, rng);
  const FeatureMap f2 = random_features(7, 3, rng);
  const Vector pi2 = stationary_distribution(mrp2.p).pi;
  const Vector v2 = true_value(mrp2);
  const Vector fixed = mc_fixed_point(mrp2, f2);
  Vector resid = Vector::Zero(3);
  for (int s = 0; s < 7; ++s) {
    const Vector phi_s = f2.phi.row(s).transpose();
    resid += pi2[s] * (phi_s.dot(fixed) - v2[s]) / phi_s.squaredNorm() * phi_s;
  }
  CHECK(resid.norm() < 1e-10);
}

TEST_CASE("TD pair stream") {
  Matrix phi(3, 2);
  phi << 3.0, 4.0, 1.0, 0.0, 0.0, 2.0;
  FeatureMap features{phi};

  // gamma = 0: direction is the normalized departing feature.
  const Trajectory t1 = make_trajectory({0, 1}, {2.0, 0.5}, 2);
  const TdPairStream s1 = td_pair_stream(t1, features, 0.0);
  REQUIRE(s1.pairs.size() == 1);
  CHECK((s1.pairs[0].l - phi.row(0).transpose() / 5.0).norm() < 1e-14);
  CHECK(s1.pairs[0].rho == doctest::Approx(2.0 / 5.0));

  // Self-pair at gamma = 1 is degenerate: skipped and counted.
  const Trajectory t2 = make_trajectory({1, 1, 0}, {1.0, 1.0, 1.0}, 1);
  const TdPairStream s2 = td_pair_stream(t2, features, 1.0);
  CHECK(s2.degenerate_skipped == 1);
  REQUIRE(s2.pairs.size() == 1);
  CHECK(s2.pairs[0].s == 1);
  CHECK(s2.pairs[0].s_next == 0);

  // Repeated pair within one trajectory appears once.
  const Trajectory t3 = make_trajectory({0, 1, 0, 1}, {1.0, 1.0, 1.0, 1.0}, 0);
  const TdPairStream s3 = td_pair_stream(t3, features, 0.5);
  CHECK(s3.pairs.size() == 2);
}

TEST_CASE("TD fixed point by brute force") {
  Rng rng(9);

  // Scalar features: closed-form ratio.
  const MarkovRewardProcess mrp = random_mrp(5, 0.6, rng);
  Matrix phi1(5, 1);
  for (int s = 0; s < 5; ++s) phi1(s, 0) = rng.uniform(0.5, 2.0);
  const Vector pi = stationary_distribution(mrp.p).pi;
  double num = 0.0, den = 0.0;
  for (int s = 0; s < 5; ++s) {
    for (int t = 0; t < 5; ++t) {
      const double dphi = phi1(s, 0) - 0.6 * phi1(t, 0);
      const double l = dphi / std::abs(dphi);
      const double rho = mrp.r(s, t) / std::abs(dphi);
      num += pi[s] * mrp.p(s, t) * rho * l;
      den += pi[s] * mrp.p(s, t) * l * l;
    }
  }
  const Vector w1 = td0_fixed_point_bruteforce(mrp, FeatureMap{phi1});
  CHECK(w1[0] == doctest::Approx(num / den).epsilon(1e-12));

  // The returned point zeroes the defining condition.
  const FeatureMap f = random_features(6, 3, rng);
  const MarkovRewardProcess mrp6 = random_mrp(6, 0.7, rng);
  const Vector pi6 = stationary_distribution(mrp6.p).pi;
  const Vector w = td0_fixed_point_bruteforce(mrp6, f);
  Matrix lhs;
  Vector rhs;
  pair_sums_oracle(mrp6, f, pi6, &lhs, &rhs);
  CHECK((lhs * w - rhs).norm() < 1e-10);

  // A pair-consistent reward table is recovered exactly.
  Vector w_true(3);
  w_true << 0.4, -1.2, 0.9;
  Matrix r_consistent(6, 6);
  for (int s = 0; s < 6; ++s) {
    for (int t = 0; t < 6; ++t) {
      const Vector dphi = f.phi.row(s) - 0.7 * f.phi.row(t);
      r_consistent(s, t) = dphi.dot(w_true);
    }
  }
  MarkovRewardProcess consistent(mrp6.p, r_consistent, 0.7);
  CHECK((td0_fixed_point_bruteforce(consistent, f) - w_true).norm() < 1e-10);

  // A reachable degenerate pair is a loud error.
  Matrix phi_dup(3, 1);
  phi_dup << 1.0, 1.0, 2.0;
  Matrix p_dup = Matrix::Constant(3, 3, 1.0 / 3.0);
  MarkovRewardProcess dup(p_dup, Matrix::Constant(3, 3, 1.0), 1.0 - 1e-15);
  CHECK_THROWS_AS(td0_fixed_point_bruteforce(dup, FeatureMap{phi_dup}), DegeneratePair);
}

TEST_CASE("tensor route equals brute force") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + rng.index(7);            // up to 8 states
    const int n = 1 + rng.index(std::min(m, 4));  // up to 4 features
    const MarkovRewardProcess mrp = random_mrp(m, rng.uniform(0.1, 0.9), rng);
    const FeatureMap f = random_features(m, n, rng);
    const Vector brute = td0_fixed_point_bruteforce(mrp, f);
    const Vector tensor = td0_fixed_point_tensor(mrp, f);
    CHECK((brute - tensor).norm() < 1e-9);
  }

  // Single self-looping state: one consistent pair, exact recovery.
  Matrix p1(1, 1), r1(1, 1), phi(1, 1);
  p1 << 1.0;
  r1 << 0.3;
  phi << 2.0;
  MarkovRewardProcess loop(p1, r1, 0.5);
  const Vector w = td0_fixed_point_tensor(loop, FeatureMap{phi});
  CHECK(w[0] == doctest::Approx(0.3 / (2.0 - 0.5 * 2.0)));

  // The assembled quadratic matrix matches the loop oracle entrywise.
  const MarkovRewardProcess mrp5 = random_mrp(5, 0.6, rng);
  const FeatureMap f5 = random_features(5, 2, rng);
  const Vector pi5 = stationary_distribution(mrp5.p).pi;
  Matrix lhs;
  Vector rhs;
  pair_sums_oracle(mrp5, f5, pi5, &lhs, &rhs);
  const Vector tensor5 = td0_fixed_point_tensor(mrp5, f5);
  CHECK((lhs * tensor5 - rhs).norm() < 1e-10);
}

TEST_CASE("d-norm") {
  Vector pi(2), x(2);
  pi << 5.0 / 6.0, 1.0 / 6.0;
  x << 1.0, -1.0;
  CHECK(d_norm(x, pi) == doctest::Approx(1.0));
  CHECK(d_norm(Vector::Zero(2), pi) == 0.0);

  const int m = 4;
  Vector uniform = Vector::Constant(m, 1.0 / m);
  Vector y(m);
  y << 1.0, 2.0, -3.0, 0.5;
  CHECK(d_norm(y, uniform) == doctest::Approx(y.norm() / std::sqrt(double(m))));

  Vector bad = Vector::Constant(m, 1.0);
  CHECK_THROWS_AS(d_norm(y, bad), DimensionMismatch);
}

TEST_CASE("error bound report") {
  Rng rng(21);

  // Pair-consistent case: both sides collapse to zero.
  const MarkovRewardProcess base = random_mrp(5, 0.7, rng);
  const FeatureMap f = random_features(5, 2, rng);
  Vector w_true(2);
  w_true << 1.1, -0.4;
  Matrix r(5, 5);
  for (int s = 0; s < 5; ++s)
    for (int t = 0; t < 5; ++t)
      r(s, t) = (f.phi.row(s) - 0.7 * f.phi.row(t)).dot(w_true);
  MarkovRewardProcess consistent(base.p, r, 0.7);
  const BoundReport zero = check_error_bound(consistent, f);
  CHECK(zero.holds);
  CHECK(zero.lhs < 1e-9);
  CHECK(zero.rhs < 1e-9);
  CHECK(zero.true_value_pair_residual < 1e-9);

  // Constant-reward chains: the bound holds with slack.
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 3 + rng.index(6);
    const int n = 1 + rng.index(std::min(m - 1, 4));
    Matrix p(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) p(i, j) = rng.uniform(0.05, 1.0);
      p.row(i) /= p.row(i).sum();
    }
    MarkovRewardProcess mrp(p, Matrix::Constant(m, m, rng.uniform(0.2, 3.0)),
                            rng.uniform(0.1, 0.9));
    const FeatureMap feats = random_features(m, n, rng);
    const BoundReport report = check_error_bound(mrp, feats);
    CHECK(report.holds);
    CHECK(report.true_value_pair_residual < 1e-9);
    CHECK(std::isfinite(report.lhs_vector_form));
    CHECK(std::isfinite(report.rhs_vector_form));
  }

  // Canonical outlier chain.
  Rng rng2(22);
  const OutlierChain chain = outlier_chain(20, 1.0, 0.05, 5.0, 1.0, 0.5, rng2);
  const BoundReport outlier = check_error_bound(chain.mrp, chain.features);
  CHECK(outlier.holds);
  CHECK(outlier.lhs < outlier.rhs);
}

TEST_CASE("stochastic estimators move toward their oracles") {
  Rng rng(31);
  const RandomChain chain = random_ergodic_chain(10, 3, 0.6, rng);
  const Vector w_m = mc_fixed_point(chain.mrp, chain.features);
  const Vector w_n = td0_fixed_point_bruteforce(chain.mrp, chain.features);

  SolverConfig cfg;
  cfg.mode = SolveMode::kStochastic;
  cfg.step_rule = StepRule::kCurvature;
  cfg.p = 0.75;
  cfg.beta = 0.5;
  cfg.max_iters = 4000;
  cfg.seed = 7;

  const McEstimate mc = normalized_mc_solve(chain.mrp, chain.features, cfg, 40, &w_m);
  CHECK(mc.trace.records.back().err < mc.trace.records.front().err);
  CHECK(mc.trace.records.back().err < 0.2);

  const SolveResult td = normalized_td0_solve(chain.mrp, chain.features, cfg, 20, &w_n);
  CHECK(td.trace.records.back().err < td.trace.records.front().err);
  CHECK(td.trace.records.back().err < 0.3);

  // Two-state deterministic cycle: the pair system is tiny and the solve
  // settles near the analytic point quickly.
  Matrix p2(2, 2);
  p2 << 0.0, 1.0, 1.0, 0.0;
  Matrix r2(2, 2);
  r2 << 0.0, 1.0, 0.5, 0.0;
  Matrix phi2(2, 1);
  phi2 << 1.0, 3.0;
  MarkovRewardProcess cycle(p2, r2, 0.5);
  const FeatureMap f2{phi2};
  const Vector w_cycle = td0_fixed_point_bruteforce(cycle, f2);
  SolverConfig cfg2 = cfg;
  cfg2.max_iters = 8000;
  const SolveResult td2 = normalized_td0_solve(cycle, f2, cfg2, 6, &w_cycle);
  CHECK(std::abs(td2.w[0] - w_cycle[0]) < 0.05);
}
