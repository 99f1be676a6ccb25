#pragma once

#include <array>
#include <initializer_list>
#include <utility>
#include <vector>

#include "totalproj/common.hpp"

namespace totalproj {

// Dense order-3 tensor, row-major over (i1, i2, i3).
class Tensor3 {
 public:
  Tensor3() : dims_{0, 0, 0} {}
  Tensor3(int i1, int i2, int i3)
      : dims_{i1, i2, i3}, data_(static_cast<std::size_t>(i1) * i2 * i3, 0.0) {}

  int dim(int mode) const { return dims_[mode]; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i1, int i2, int i3) {
    return data_[(static_cast<std::size_t>(i1) * dims_[1] + i2) * dims_[2] + i3];
  }
  double operator()(int i1, int i2, int i3) const {
    return data_[(static_cast<std::size_t>(i1) * dims_[1] + i2) * dims_[2] + i3];
  }

  // Mode-1 slice as an I2 x I3 matrix.
  Matrix slice(int i1) const;
  void set_slice(int i1, const Matrix& s);

  // Mode-3 fiber at (i1, i2).
  Vector fiber(int i1, int i2) const;

  const std::vector<double>& data() const { return data_; }

 private:
  std::array<int, 3> dims_;
  std::vector<double> data_;
};

// Permutation of the three modes, built from transpositions. order()[k] gives
// the source mode feeding output mode k.
class IndexPermutation {
 public:
  IndexPermutation() : order_{0, 1, 2} {}
  explicit IndexPermutation(const std::array<int, 3>& order);
  static IndexPermutation from_transpositions(
      std::initializer_list<std::pair<int, int>> swaps);

  const std::array<int, 3>& order() const { return order_; }
  IndexPermutation inverse() const;

 private:
  std::array<int, 3> order_;
};

// Family of per-position transform matrices for mode products, indexed by
// (i1, i2) row-major: entry i1*I2 + i2.
using MatrixFamily = std::vector<Matrix>;
using VectorFamily = std::vector<Vector>;

// Applies a distinct matrix to every mode-3 fiber: out fiber (i1,i2) equals
// A(i1,i2,.) * T[i1,i2]. All family matrices must share the column count J.
Tensor3 mode_transform_product(const Tensor3& a, const MatrixFamily& t);

// J = 1 case: each fiber contracts to a dot product, giving an I1 x I2 matrix.
Matrix mode_contract_product(const Tensor3& a, const VectorFamily& t);

// Applies a distinct matrix to every mode-1 slice: out slice i1 equals
// A(i1) * T(i1). A is (I1,I2,I3), T is (I1,I3,J), result (I1,I2,J).
Tensor3 slice_transform_product(const Tensor3& a, const Tensor3& t);

// Slice product against a per-slice vector (rows of t): result row i1 equals
// A(i1) * t.row(i1), an I1 x I2 matrix.
Matrix slice_contract_product(const Tensor3& a, const Matrix& t);

// Standard mode-p product with a matrix: mode p cardinality I_p becomes
// M.rows(), contracting A over M.cols() == I_p. Modes are 1-based.
Tensor3 mode_p_multiply(const Tensor3& a, const Matrix& m, int p);

// Matrix case: p = 1 left-multiplies, p = 2 multiplies rows by M^T.
Matrix mode_p_multiply(const Matrix& a, const Matrix& m, int p);

Tensor3 permute(const Tensor3& a, const IndexPermutation& perm);

// Swap of the last two modes.
Tensor3 transpose(const Tensor3& a);

// Order-3 tensor with slice s = diag(P row s), so slice_s * 1 recovers P_s.
// Throws NotStochastic unless P is row-stochastic within 1e-9.
Tensor3 build_probability_tensor(const Matrix& p);

}  // namespace totalproj
