#include "totalproj/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace totalproj {

Matrix Tensor3::slice(int i1) const {
  Matrix s(dims_[1], dims_[2]);
  for (int i2 = 0; i2 < dims_[1]; ++i2)
    for (int i3 = 0; i3 < dims_[2]; ++i3) s(i2, i3) = (*this)(i1, i2, i3);
  return s;
}

void Tensor3::set_slice(int i1, const Matrix& s) {
  if (s.rows() != dims_[1] || s.cols() != dims_[2]) {
    throw DimensionMismatch("set_slice: slice shape mismatch");
  }
  for (int i2 = 0; i2 < dims_[1]; ++i2)
    for (int i3 = 0; i3 < dims_[2]; ++i3) (*this)(i1, i2, i3) = s(i2, i3);
}

Vector Tensor3::fiber(int i1, int i2) const {
  Vector f(dims_[2]);
  for (int i3 = 0; i3 < dims_[2]; ++i3) f[i3] = (*this)(i1, i2, i3);
  return f;
}

IndexPermutation::IndexPermutation(const std::array<int, 3>& order) : order_(order) {
  std::array<bool, 3> seen{false, false, false};
  for (int v : order_) {
    if (v < 0 || v > 2 || seen[v]) throw DimensionMismatch("invalid mode permutation");
    seen[v] = true;
  }
}

IndexPermutation IndexPermutation::from_transpositions(
    std::initializer_list<std::pair<int, int>> swaps) {
  std::array<int, 3> order{0, 1, 2};
  for (const auto& [a, b] : swaps) {
    if (a < 0 || a > 2 || b < 0 || b > 2) {
      throw DimensionMismatch("transposition index out of range");
    }
    std::swap(order[a], order[b]);
  }
  return IndexPermutation(order);
}

IndexPermutation IndexPermutation::inverse() const {
  std::array<int, 3> inv{};
  for (int k = 0; k < 3; ++k) inv[order_[k]] = k;
  return IndexPermutation(inv);
}

Tensor3 mode_transform_product(const Tensor3& a, const MatrixFamily& t) {
  const int i1n = a.dim(0), i2n = a.dim(1), i3n = a.dim(2);
  if (static_cast<int>(t.size()) != i1n * i2n) {
    throw DimensionMismatch("mode_transform_product: family size != I1*I2");
  }
  const int j = static_cast<int>(t.front().cols());
  Tensor3 out(i1n, i2n, j);
  for (int i1 = 0; i1 < i1n; ++i1) {
    for (int i2 = 0; i2 < i2n; ++i2) {
      const Matrix& m = t[static_cast<std::size_t>(i1) * i2n + i2];
      if (m.rows() != i3n || m.cols() != j) {
        throw DimensionMismatch("mode_transform_product: transformer shape mismatch");
      }
      const Vector res = m.transpose() * a.fiber(i1, i2);
      for (int k = 0; k < j; ++k) out(i1, i2, k) = res[k];
    }
  }
  return out;
}

Matrix mode_contract_product(const Tensor3& a, const VectorFamily& t) {
  const int i1n = a.dim(0), i2n = a.dim(1), i3n = a.dim(2);
  if (static_cast<int>(t.size()) != i1n * i2n) {
    throw DimensionMismatch("mode_contract_product: family size != I1*I2");
  }
  Matrix out(i1n, i2n);
  for (int i1 = 0; i1 < i1n; ++i1) {
    for (int i2 = 0; i2 < i2n; ++i2) {
      const Vector& v = t[static_cast<std::size_t>(i1) * i2n + i2];
      if (v.size() != i3n) {
        throw DimensionMismatch("mode_contract_product: vector length mismatch");
      }
      out(i1, i2) = a.fiber(i1, i2).dot(v);
    }
  }
  return out;
}

Tensor3 slice_transform_product(const Tensor3& a, const Tensor3& t) {
  if (t.dim(0) != a.dim(0) || t.dim(1) != a.dim(2)) {
    throw DimensionMismatch("slice_transform_product: incompatible slice shapes");
  }
  Tensor3 out(a.dim(0), a.dim(1), t.dim(2));
  for (int i1 = 0; i1 < a.dim(0); ++i1) {
    out.set_slice(i1, a.slice(i1) * t.slice(i1));
  }
  return out;
}

Matrix slice_contract_product(const Tensor3& a, const Matrix& t) {
  if (t.rows() != a.dim(0) || t.cols() != a.dim(2)) {
    throw DimensionMismatch("slice_contract_product: vector family shape mismatch");
  }
  Matrix out(a.dim(0), a.dim(1));
  for (int i1 = 0; i1 < a.dim(0); ++i1) {
    out.row(i1) = (a.slice(i1) * t.row(i1).transpose()).transpose();
  }
  return out;
}

Tensor3 mode_p_multiply(const Tensor3& a, const Matrix& m, int p) {
  if (p < 1 || p > 3) throw DimensionMismatch("mode_p_multiply: mode must be 1..3");
  const int mode = p - 1;
  if (m.cols() != a.dim(mode)) {
    throw DimensionMismatch("mode_p_multiply: M columns != mode cardinality");
  }
  std::array<int, 3> od = a.dims();
  od[mode] = static_cast<int>(m.rows());
  Tensor3 out(od[0], od[1], od[2]);
  for (int i1 = 0; i1 < od[0]; ++i1) {
    for (int i2 = 0; i2 < od[1]; ++i2) {
      for (int i3 = 0; i3 < od[2]; ++i3) {
        std::array<int, 3> idx{i1, i2, i3};
        double acc = 0.0;
        for (int k = 0; k < a.dim(mode); ++k) {
          std::array<int, 3> src = idx;
          src[mode] = k;
          acc += m(idx[mode], k) * a(src[0], src[1], src[2]);
        }
        out(i1, i2, i3) = acc;
      }
    }
  }
  return out;
}

Matrix mode_p_multiply(const Matrix& a, const Matrix& m, int p) {
  if (p == 1) {
    if (m.cols() != a.rows()) throw DimensionMismatch("mode_p_multiply: shape");
    return m * a;
  }
  if (p == 2) {
    if (m.cols() != a.cols()) throw DimensionMismatch("mode_p_multiply: shape");
    return a * m.transpose();
  }
  throw DimensionMismatch("mode_p_multiply: matrix mode must be 1 or 2");
}

Tensor3 permute(const Tensor3& a, const IndexPermutation& perm) {
  const auto& ord = perm.order();
  Tensor3 out(a.dim(ord[0]), a.dim(ord[1]), a.dim(ord[2]));
  for (int i1 = 0; i1 < a.dim(0); ++i1) {
    for (int i2 = 0; i2 < a.dim(1); ++i2) {
      for (int i3 = 0; i3 < a.dim(2); ++i3) {
        const std::array<int, 3> src{i1, i2, i3};
        out(src[ord[0]], src[ord[1]], src[ord[2]]) = a(i1, i2, i3);
      }
    }
  }
  return out;
}

Tensor3 transpose(const Tensor3& a) {
  return permute(a, IndexPermutation::from_transpositions({{1, 2}}));
}

Tensor3 build_probability_tensor(const Matrix& p) {
  const int m = static_cast<int>(p.rows());
  if (p.cols() != m) throw DimensionMismatch("build_probability_tensor: square P required");
  for (int s = 0; s < m; ++s) {
    if (p.row(s).minCoeff() < 0.0 || std::abs(p.row(s).sum() - 1.0) > 1e-9) {
      throw NotStochastic("row " + std::to_string(s) + " is not a distribution");
    }
  }
  Tensor3 out(m, m, m);
  for (int s = 0; s < m; ++s) {
    for (int k = 0; k < m; ++k) out(s, k, k) = p(s, k);
  }
  return out;
}

}  // namespace totalproj
