#pragma once

#include "totalproj/common.hpp"

namespace totalproj {

// Overdetermined system Phi w = v with positive row weights. Weights are
// stored normalized to sum 1, so weighted sums need no extra constants.
class OverdeterminedSystem {
 public:
  // Uniform row weights.
  OverdeterminedSystem(Matrix phi, Vector v);
  OverdeterminedSystem(Matrix phi, Vector v, Vector weights);

  const Matrix& phi() const { return phi_; }
  const Vector& targets() const { return v_; }
  const Vector& weights() const { return d_; }
  // Row norms ||phi_i||, cached at construction.
  const Vector& row_norms() const { return row_norms_; }

  int rows() const { return static_cast<int>(phi_.rows()); }
  int cols() const { return static_cast<int>(phi_.cols()); }

  // Returns (phi_i, v_i) <- (c*phi_i, c*v_i) with all else unchanged.
  OverdeterminedSystem with_scaled_row(int i, double c) const;

 private:
  Matrix phi_;
  Vector v_;
  Vector d_;
  Vector row_norms_;
};

// Diagonal of the normalization matrix: entries 1/||phi_i||.
Vector normalization_diagonal(const OverdeterminedSystem& sys);

// Signed distance from the point w to the hyperplane phi_i^T w = v_i.
double hyperplane_distance(const OverdeterminedSystem& sys, const Vector& w, int i);

// Weighted sum of squared hyperplane distances; the scale-invariant criterion.
double normalized_error(const OverdeterminedSystem& sys, const Vector& w);

// Weighted projection directions sum_i d_i ((phi_i^T w - v_i)/||phi_i||^2) phi_i.
// This is the solver's descent field; it equals one half the gradient of
// normalized_error (the factor 2 is absorbed into step sizes throughout).
Vector projection_field(const OverdeterminedSystem& sys, const Vector& w);

// Weighted sum of squared residuals (no normalization).
double least_squares_error(const OverdeterminedSystem& sys, const Vector& w);

// Minimizer of least_squares_error via guarded normal equations.
Vector least_squares_solution(const OverdeterminedSystem& sys);

// Minimizer of normalized_error. Equals the weighted least-squares solution of
// the row-normalized system (N Phi, N v) with the same weights.
Vector scale_invariant_solution(const OverdeterminedSystem& sys);

}  // namespace totalproj
