// AVX2/FMA variants of the kernels in scalar.cpp. Built with -mavx2 -mfma
// -ffp-contract=off; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "dfpc/kernels.hpp"

namespace dfpc::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * k;
    double* cr = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d va = _mm256_loadu_pd(ar + p);
        s0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b3 + p), s3);
      }
      double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
      for (; p < k; ++p) {
        t0 += ar[p] * b0[p];
        t1 += ar[p] * b1[p];
        t2 += ar[p] * b2[p];
        t3 += ar[p] * b3[p];
      }
      cr[j] = t0;
      cr[j + 1] = t1;
      cr[j + 2] = t2;
      cr[j + 3] = t3;
    }
    for (; j < n; ++j) cr[j] = dot(ar, b + j * k, k);
  }
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

void soft_threshold(const double* z, double nu, double* out, std::size_t n) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d vnu = _mm256_set1_pd(nu);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vz = _mm256_loadu_pd(z + i);
    const __m256d mag = _mm256_sub_pd(_mm256_andnot_pd(sign_bit, vz), vnu);
    const __m256d keep = _mm256_cmp_pd(mag, zero, _CMP_NLE_UQ);  // NaN stays NaN
    const __m256d signed_mag = _mm256_or_pd(mag, _mm256_and_pd(sign_bit, vz));
    _mm256_storeu_pd(out + i, _mm256_and_pd(keep, signed_mag));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(z[i]) - nu;
    out[i] = !(mag <= 0.0) ? std::copysign(mag, z[i]) : 0.0;
  }
}

void sign_relu(const double* y, const double* z, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d q = _mm256_mul_pd(vy, _mm256_loadu_pd(z + i));
    const __m256d pos = _mm256_cmp_pd(q, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(pos, _mm256_mul_pd(vy, q)));
  }
  for (; i < n; ++i) {
    const double q = y[i] * z[i];
    out[i] = q > 0.0 ? y[i] * q : 0.0;
  }
}

void sign_residual(const double* y, const double* z, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d nonneg = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GE_OQ);
    const __m256d s = _mm256_blendv_pd(minus_one, one, nonneg);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), s));
  }
  for (; i < n; ++i) out[i] = y[i] - (z[i] >= 0.0 ? 1.0 : -1.0);
}

void adam_update(double* param, const double* grad, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double bias1, double bias2,
                 double epsilon) {
  const double c1 = 1.0 - beta1;
  const double c2 = 1.0 - beta2;
  const __m256d vb1 = _mm256_set1_pd(beta1), vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(c1), vc2 = _mm256_set1_pd(c2);
  const __m256d vbias1 = _mm256_set1_pd(bias1), vbias2 = _mm256_set1_pd(bias2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(epsilon);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vc1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(vc2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, vbias1);
    const __m256d vhat = _mm256_div_pd(vi, vbias2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(vlr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), veps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + c1 * g;
    v[i] = beta2 * v[i] + c2 * (g * g);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
  }
}

}  // namespace

const KernelSet& avx2_set() {
  static const KernelSet set{"avx2",        dot,         axpy,           gemm_nt,
                             gemm_nn_acc,   gemm_tn_acc, soft_threshold, sign_relu,
                             sign_residual, adam_update};
  return set;
}

}  // namespace dfpc::kernels
