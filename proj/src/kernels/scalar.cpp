#include <cmath>

#include "dfpc/kernels.hpp"

namespace dfpc::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot(a + i * k, b + j * k, k);
}

void gemm_nn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                 std::size_t k) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double s = a[i * k + p];
      if (s != 0.0) axpy(s, b + p * n, c + i * n, n);
    }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                 std::size_t k) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) {
      const double s = a[p * m + i];
      if (s != 0.0) axpy(s, b + p * n, c + i * n, n);
    }
}

// NaN inputs pass through so divergence stays visible downstream.
void soft_threshold(const double* z, double nu, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(z[i]) - nu;
    out[i] = !(mag <= 0.0) ? std::copysign(mag, z[i]) : 0.0;
  }
}

void sign_relu(const double* y, const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double q = y[i] * z[i];
    out[i] = q > 0.0 ? y[i] * q : 0.0;
  }
}

void sign_residual(const double* y, const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] - (z[i] >= 0.0 ? 1.0 : -1.0);
}

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double bias1, double bias2,
                 double epsilon) {
  const double c1 = 1.0 - beta1;
  const double c2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + c1 * g;
    v[i] = beta2 * v[i] + c2 * (g * g);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
  }
}

}  // namespace

const KernelSet& scalar() {
  static const KernelSet set{"scalar",      dot,       axpy,          gemm_nt,
                             gemm_nn_acc,   gemm_tn_acc, soft_threshold, sign_relu,
                             sign_residual, adam_update};
  return set;
}

}  // namespace dfpc::kernels
