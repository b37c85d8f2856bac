#pragma once

// Thin shape-checked wrappers over the active kernel set.

#include <cmath>
#include <span>

#include "dfpc/kernels.hpp"
#include "dfpc/matrix.hpp"

namespace dfpc {

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y = A x
inline Vector matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw InvalidArgument("matvec: dimension mismatch");
  Vector y(a.rows());
  kernels::active().gemm_nt(x.data(), a.data(), y.data(), 1, a.rows(), a.cols());
  return y;
}

// y = A^T x
inline Vector matvec_t(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw InvalidArgument("matvec_t: dimension mismatch");
  Vector y(a.cols(), 0.0);
  kernels::active().gemm_tn_acc(x.data(), a.data(), y.data(), 1, a.cols(), a.rows());
  return y;
}

// A * B^T
inline Matrix mul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw InvalidArgument("mul_nt: inner dimension mismatch");
  Matrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.data(), b.data(), c.data(), a.rows(), b.rows(), a.cols());
  return c;
}

// C += A * B
inline void add_mul_nn(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw InvalidArgument("add_mul_nn: dimension mismatch");
  kernels::active().gemm_nn_acc(a.data(), b.data(), c.data(), a.rows(), b.cols(), a.cols());
}

// C += A^T * B
inline void add_mul_tn(Matrix& c, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw InvalidArgument("add_mul_tn: dimension mismatch");
  kernels::active().gemm_tn_acc(a.data(), b.data(), c.data(), a.cols(), b.cols(), a.rows());
}

inline void scale(std::span<double> x, double s) {
  for (auto& v : x) v *= s;
}

}  // namespace dfpc
