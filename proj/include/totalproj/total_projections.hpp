#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "totalproj/linear_model.hpp"
#include "totalproj/rng.hpp"

namespace totalproj {

enum class SolveMode { kBatch, kStochastic };
enum class StepRule { kCurvature, kFixedAlpha };

struct SolverConfig {
  double p = 0.75;              // decay exponent for eta_k = 1/k^p, in (0.5, 1]
  double beta = 0.5;            // heavy-ball multiplier, in [0, 1)
  double epsilon_guard = 1e-6;  // skip threshold on ||delta TP||
  int tau = 1;                  // rows sampled per stochastic step
  long max_iters = 1000;
  SolveMode mode = SolveMode::kBatch;
  StepRule step_rule = StepRule::kCurvature;
  double alpha = 1.0;  // used by kFixedAlpha, in (0, 2)
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterateState {
  Vector w;
  Vector w_prev;
  long k = 1;  // iteration counter, starts at 1 so 1/k^p is defined
};

// Sampled rows with noisy targets; one matrix row per sampled equation.
struct RowBatch {
  Matrix phi;
  Vector targets;

  int size() const { return static_cast<int>(phi.rows()); }
};

struct TraceRecord {
  long k = 0;
  double err = 0.0;  // ||w_k - w*||, NaN when no reference supplied
  double g = 0.0;    // normalized error on the full system, NaN outside solve()
  double theta = 0.0;
  double alpha = 0.0;
  bool skipped = false;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  long skipped_steps = 0;
  long degenerate_pairs = 0;  // used by the TD(0) estimator
};

// Per-step diagnostics; theta/alpha are NaN when not applicable.
struct StepInfo {
  double theta;
  double alpha;
  bool skipped = false;
};

struct SolveResult {
  Vector w;
  SolveTrace trace;
};

// Averaged projection directions: (1/tau) sum_i ((phi_i^T w - v_i)/||phi_i||^2) phi_i.
Vector tp_update(const RowBatch& batch, const Vector& w);

// Field difference TP(w - TP(w)) - TP(w). For the linear field this equals
// -(1/tau)[sum phi phi^T/||phi||^2] TP(w); only its norm enters the step.
Vector delta_tp(const RowBatch& batch, const Vector& w);

// Curvature step length ||TP||^2 / ||dTP||. Empty when ||dTP|| is below the
// guard, which tells the caller to skip the gradient part of this iteration.
std::optional<double> curvature_step(const RowBatch& batch, const Vector& w,
                                     double epsilon_guard);

// One update of w_{k+1} = w_k - step + beta (w_k - w_prev). Skipped gradient
// steps (guard fired) still apply momentum; info->skipped reports the event.
IterateState step(const IterateState& state, const RowBatch& batch,
                  const SolverConfig& cfg, StepInfo* info = nullptr);

// Draws row batches i.i.d. proportional to the system weights (inverse CDF).
class RowSampler {
 public:
  RowSampler(const OverdeterminedSystem& sys, std::uint64_t seed);
  RowBatch draw(int tau);

 private:
  const OverdeterminedSystem& sys_;
  Vector cdf_;
  Rng rng_;
};

// Runs max_iters steps from w0. Batch mode applies the weighted full-system
// field; stochastic mode samples rows by weight. Deterministic given the seed.
SolveResult solve(const OverdeterminedSystem& sys, const SolverConfig& cfg,
                  const Vector& w0, const Vector* w_star = nullptr);

SolveResult solve(const OverdeterminedSystem& sys, const SolverConfig& cfg);

}  // namespace totalproj
