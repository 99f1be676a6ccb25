#include "totalproj/linear_model.hpp"

#include <Eigen/SVD>

namespace totalproj {

Vector guarded_spd_solve(const Matrix& m, const Vector& b, const char* context) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > kConditionLimit) {
    throw SingularSystem(std::string(context) + ": condition number exceeds limit");
  }
  return svd.solve(b);
}

namespace {

Vector validated_weights(const Matrix& phi, const Vector& v, Vector d) {
  const auto m = phi.rows();
  if (m < phi.cols() || phi.cols() < 1) {
    throw DimensionMismatch("system requires m >= n >= 1");
  }
  if (v.size() != m || d.size() != m) {
    throw DimensionMismatch("targets/weights must have one entry per row");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (phi.row(i).norm() == 0.0) {
      throw DimensionMismatch("zero feature row " + std::to_string(i));
    }
    if (!(d[i] > 0.0)) {
      throw DimensionMismatch("row weights must be positive");
    }
  }
  if (!phi.allFinite() || !v.allFinite()) {
    throw DimensionMismatch("non-finite system entries");
  }
  return d / d.sum();
}

}  // namespace

OverdeterminedSystem::OverdeterminedSystem(Matrix phi, Vector v)
    : OverdeterminedSystem(std::move(phi), std::move(v),
                           Vector::Ones(v.size())) {}

OverdeterminedSystem::OverdeterminedSystem(Matrix phi, Vector v, Vector weights)
    : phi_(std::move(phi)), v_(std::move(v)) {
  d_ = validated_weights(phi_, v_, std::move(weights));
  row_norms_ = phi_.rowwise().norm();
}

OverdeterminedSystem OverdeterminedSystem::with_scaled_row(int i, double c) const {
  Matrix phi = phi_;
  Vector v = v_;
  phi.row(i) *= c;
  v[i] *= c;
  return OverdeterminedSystem(std::move(phi), std::move(v), d_);
}

Vector normalization_diagonal(const OverdeterminedSystem& sys) {
  return sys.row_norms().cwiseInverse();
}

double hyperplane_distance(const OverdeterminedSystem& sys, const Vector& w, int i) {
  return (sys.phi().row(i).dot(w) - sys.targets()[i]) / sys.row_norms()[i];
}

double normalized_error(const OverdeterminedSystem& sys, const Vector& w) {
  const Vector delta = (sys.phi() * w - sys.targets()).cwiseQuotient(sys.row_norms());
  return delta.cwiseAbs2().dot(sys.weights());
}

Vector projection_field(const OverdeterminedSystem& sys, const Vector& w) {
  const Vector sq_norms = sys.row_norms().cwiseAbs2();
  const Vector coef =
      sys.weights().cwiseProduct((sys.phi() * w - sys.targets()).cwiseQuotient(sq_norms));
  return sys.phi().transpose() * coef;
}

double least_squares_error(const OverdeterminedSystem& sys, const Vector& w) {
  const Vector r = sys.phi() * w - sys.targets();
  return r.cwiseAbs2().dot(sys.weights());
}

namespace {

// Weighted normal equations (Phi^T W Phi) w = Phi^T W v for diagonal W.
Vector weighted_normal_solve(const Matrix& phi, const Vector& v, const Vector& w_diag,
                             const char* context) {
  const Matrix weighted = w_diag.asDiagonal() * phi;
  const Matrix normal = phi.transpose() * weighted;
  const Vector rhs = weighted.transpose() * v;
  return guarded_spd_solve(normal, rhs, context);
}

}  // namespace

Vector least_squares_solution(const OverdeterminedSystem& sys) {
  return weighted_normal_solve(sys.phi(), sys.targets(), sys.weights(),
                               "least_squares_solution");
}

Vector scale_invariant_solution(const OverdeterminedSystem& sys) {
  // d-weighted least squares of the row-normalized system.
  const Vector n = normalization_diagonal(sys);
  const Matrix phi_n = n.asDiagonal() * sys.phi();
  const Vector v_n = n.cwiseProduct(sys.targets());
  return weighted_normal_solve(phi_n, v_n, sys.weights(), "scale_invariant_solution");
}

}  // namespace totalproj
