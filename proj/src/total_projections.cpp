#include "totalproj/total_projections.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace totalproj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector field_eval(const Matrix& phi, const Vector& targets, const Vector& coeffs,
                  const Vector& w) {
  const Vector sq_norms = phi.rowwise().squaredNorm();
  const Vector c = coeffs.cwiseProduct((phi * w - targets).cwiseQuotient(sq_norms));
  return phi.transpose() * c;
}

// Shared update core over an arbitrary linear projection field.
template <typename Field>
IterateState step_core(const IterateState& state, const Field& field,
                       const SolverConfig& cfg, StepInfo* info) {
  StepInfo local{kNaN, kNaN, false};
  const Vector tp = field(state.w);
  Vector update = Vector::Zero(state.w.size());

  if (cfg.step_rule == StepRule::kFixedAlpha) {
    local.alpha = cfg.alpha;
    update = cfg.alpha * tp;
  } else {
    const Vector dtp = field(state.w - tp) - tp;
    const double dtp_norm = dtp.norm();
    if (dtp_norm < cfg.epsilon_guard) {
      local.skipped = true;
    } else {
      const double tp_norm = tp.norm();
      local.theta = tp_norm * tp_norm / dtp_norm;
      const double eta = 1.0 / std::pow(static_cast<double>(state.k), cfg.p);
      local.alpha = eta * tp_norm / dtp_norm;
      update = local.alpha * tp;
    }
  }

  IterateState next;
  next.w = state.w - update + cfg.beta * (state.w - state.w_prev);
  next.w_prev = state.w;
  next.k = state.k + 1;
  if (info) *info = local;
  return next;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(p > 0.5) || p > 1.0) throw DimensionMismatch("p must lie in (0.5, 1]");
  if (beta < 0.0 || beta >= 1.0) throw DimensionMismatch("beta must lie in [0, 1)");
  if (!(epsilon_guard > 0.0)) throw DimensionMismatch("epsilon_guard must be positive");
  if (tau < 1) throw DimensionMismatch("tau must be at least 1");
  if (max_iters < 0) throw DimensionMismatch("max_iters must be non-negative");
  if (step_rule == StepRule::kFixedAlpha && (alpha <= 0.0 || alpha >= 2.0)) {
    throw DimensionMismatch("fixed alpha must lie in (0, 2)");
  }
}

Vector tp_update(const RowBatch& batch, const Vector& w) {
  if (batch.size() == 0) throw DimensionMismatch("empty row batch");
  const Vector coeffs = Vector::Constant(batch.size(), 1.0 / batch.size());
  return field_eval(batch.phi, batch.targets, coeffs, w);
}

Vector delta_tp(const RowBatch& batch, const Vector& w) {
  const Vector tp = tp_update(batch, w);
  return tp_update(batch, w - tp) - tp;
}

std::optional<double> curvature_step(const RowBatch& batch, const Vector& w,
                                     double epsilon_guard) {
  const Vector tp = tp_update(batch, w);
  const double dtp_norm = delta_tp(batch, w).norm();
  if (dtp_norm < epsilon_guard) return std::nullopt;
  return tp.squaredNorm() / dtp_norm;
}

IterateState step(const IterateState& state, const RowBatch& batch,
                  const SolverConfig& cfg, StepInfo* info) {
  if (batch.size() == 0) throw DimensionMismatch("empty row batch");
  auto field = [&batch](const Vector& w) { return tp_update(batch, w); };
  return step_core(state, field, cfg, info);
}

RowSampler::RowSampler(const OverdeterminedSystem& sys, std::uint64_t seed)
    : sys_(sys), rng_(seed) {
  cdf_ = sys.weights();
  for (int i = 1; i < cdf_.size(); ++i) cdf_[i] += cdf_[i - 1];
}

RowBatch RowSampler::draw(int tau) {
  RowBatch batch;
  batch.phi.resize(tau, sys_.cols());
  batch.targets.resize(tau);
  for (int t = 0; t < tau; ++t) {
    const double u = rng_.uniform() * cdf_[cdf_.size() - 1];
    int lo = 0, hi = static_cast<int>(cdf_.size()) - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (cdf_[mid] <= u) lo = mid + 1; else hi = mid;
    }
    batch.phi.row(t) = sys_.phi().row(lo);
    batch.targets[t] = sys_.targets()[lo];
  }
  return batch;
}

SolveResult solve(const OverdeterminedSystem& sys, const SolverConfig& cfg,
                  const Vector& w0, const Vector* w_star) {
  cfg.validate();
  IterateState state{w0, w0, 1};
  SolveTrace trace;
  trace.records.push_back({0, w_star ? (w0 - *w_star).norm() : kNaN,
                           normalized_error(sys, w0), kNaN, kNaN, false});

  RowSampler sampler(sys, cfg.seed);
  auto batch_field = [&sys](const Vector& w) {
    return projection_field(sys, w);
  };

  for (long k = 1; k <= cfg.max_iters; ++k) {
    StepInfo info{kNaN, kNaN, false};
    if (cfg.mode == SolveMode::kBatch) {
      state = step_core(state, batch_field, cfg, &info);
    } else {
      const RowBatch batch = sampler.draw(cfg.tau);
      auto field = [&batch](const Vector& w) { return tp_update(batch, w); };
      state = step_core(state, field, cfg, &info);
    }
    if (info.skipped) ++trace.skipped_steps;
    trace.records.push_back({k, w_star ? (state.w - *w_star).norm() : kNaN,
                             normalized_error(sys, state.w), info.theta, info.alpha,
                             info.skipped});
  }
  return {state.w, std::move(trace)};
}

SolveResult solve(const OverdeterminedSystem& sys, const SolverConfig& cfg) {
  return solve(sys, cfg, Vector::Zero(sys.cols()), nullptr);
}

}  // namespace totalproj
