#pragma once

// Dense inner-loop kernels with a scalar reference implementation and an
// AVX2 variant chosen at runtime.
//
// Elementwise and axpy-shaped kernels produce bit-identical results across
// variants (the AVX2 translation unit is built with -ffp-contract=off and
// uses separate multiply/add). Reductions (dot, gemm_nt) reassociate and may
// differ from the scalar reference in the last few ulps.

#include <cstddef>
#include <string_view>

namespace dfpc::kernels {

struct KernelSet {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // C(m x n) = A(m x k) * B(n x k)^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k);
  // C(m x n) += A(m x k) * B(k x n)
  void (*gemm_nn_acc)(const double* a, const double* b, double* c, std::size_t m,
                      std::size_t n, std::size_t k);
  // C(m x n) += A(k x m)^T * B(k x n)
  void (*gemm_tn_acc)(const double* a, const double* b, double* c, std::size_t m,
                      std::size_t n, std::size_t k);

  // out = sign(z) * max(|z| - nu, 0)
  void (*soft_threshold)(const double* z, double nu, double* out, std::size_t n);
  // out = y * relu(y * z); the one-sided l2 correction with y in {-1, +1}
  void (*sign_relu)(const double* y, const double* z, double* out, std::size_t n);
  // out = y - sign(z), sign(0) = +1
  void (*sign_residual)(const double* y, const double* z, double* out, std::size_t n);

  // One ADAM step over n parameters. bias1/bias2 are 1 - beta^t.
  void (*adam_update)(double* param, const double* grad, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double bias1, double bias2,
                      double epsilon);
};

const KernelSet& scalar();
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelSet* avx2();

// Kernels in use. Chosen on first call: DFPC_KERNELS=scalar|avx2|auto, default auto.
const KernelSet& active();

// Override the runtime choice. Accepts "scalar", "avx2", "auto"; throws
// InvalidArgument for an unknown or unavailable variant.
void select(std::string_view name);

}  // namespace dfpc::kernels
