#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dfpc/error.hpp"
#include "dfpc/kernels.hpp"

using namespace dfpc;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<double> signs(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  std::vector<double> v(n);
  for (auto& x : v) x = b(rng) ? 1.0 : -1.0;
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= rel * std::max(1.0, std::abs(a[i])));
}

const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 17, 100, 301};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("avx2 elementwise kernels are bit-identical to scalar") {
    const kernels::KernelSet* simd = kernels::avx2();
    if (!simd) {
      MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
      return;
    }
    const kernels::KernelSet& ref = kernels::scalar();
    std::mt19937_64 rng(11);
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      auto z = randn(n, rng);
      if (n > 2) z[1] = 0.0;  // sign(0) convention
      const auto y = signs(n, rng);
      std::vector<double> a(n), b(n);

      ref.soft_threshold(z.data(), 0.3, a.data(), n);
      simd->soft_threshold(z.data(), 0.3, b.data(), n);
      CHECK(a == b);

      ref.sign_relu(y.data(), z.data(), a.data(), n);
      simd->sign_relu(y.data(), z.data(), b.data(), n);
      CHECK(a == b);

      ref.sign_residual(y.data(), z.data(), a.data(), n);
      simd->sign_residual(y.data(), z.data(), b.data(), n);
      CHECK(a == b);

      a = randn(n, rng);
      b = a;
      ref.axpy(0.7, z.data(), a.data(), n);
      simd->axpy(0.7, z.data(), b.data(), n);
      CHECK(a == b);

      auto p1 = randn(n, rng), m1 = randn(n, rng), v1 = randn(n, rng);
      for (auto& v : v1) v = std::abs(v);
      auto p2 = p1, m2 = m1, v2 = v1;
      ref.adam_update(p1.data(), z.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 0.19, 0.002, 1e-8);
      simd->adam_update(p2.data(), z.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 0.19, 0.002, 1e-8);
      CHECK(p1 == p2);
      CHECK(m1 == m2);
      CHECK(v1 == v2);
    }
  }

  TEST_CASE("avx2 reductions agree with scalar to rounding") {
    const kernels::KernelSet* simd = kernels::avx2();
    if (!simd) return;
    const kernels::KernelSet& ref = kernels::scalar();
    std::mt19937_64 rng(12);
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      const auto a = randn(n, rng), b = randn(n, rng);
      CHECK(ref.dot(a.data(), b.data(), n) ==
            doctest::Approx(simd->dot(a.data(), b.data(), n)).epsilon(1e-12));
    }
    for (auto [m, n, k] : {std::array<std::size_t, 3>{1, 300, 100}, {25, 300, 100}, {7, 5, 3},
                           {3, 9, 13}, {4, 4, 1}}) {
      CAPTURE(m);
      CAPTURE(n);
      CAPTURE(k);
      const auto a = randn(m * k, rng), b = randn(n * k, rng), bt = randn(k * n, rng),
                 at = randn(k * m, rng);
      std::vector<double> c1(m * n), c2(m * n);
      ref.gemm_nt(a.data(), b.data(), c1.data(), m, n, k);
      simd->gemm_nt(a.data(), b.data(), c2.data(), m, n, k);
      check_close(c1, c2, 1e-12);

      std::vector<double> d1 = randn(m * n, rng), d2 = d1;
      ref.gemm_nn_acc(a.data(), bt.data(), d1.data(), m, n, k);
      simd->gemm_nn_acc(a.data(), bt.data(), d2.data(), m, n, k);
      check_close(d1, d2, 1e-12);

      std::vector<double> e1 = randn(m * n, rng), e2 = e1;
      ref.gemm_tn_acc(at.data(), bt.data(), e1.data(), m, n, k);
      simd->gemm_tn_acc(at.data(), bt.data(), e2.data(), m, n, k);
      check_close(e1, e2, 1e-12);
    }
  }

  TEST_CASE("scalar kernels match direct formulas") {
    const kernels::KernelSet& k = kernels::scalar();
    const double z[] = {1.2, -0.3, 0.0, -2.0};
    const double y[] = {1.0, 1.0, -1.0, -1.0};
    double out[4];
    k.soft_threshold(z, 0.5, out, 4);
    CHECK(out[0] == doctest::Approx(0.7));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK(out[3] == doctest::Approx(-1.5));
    k.sign_relu(y, z, out, 4);  // y * max(y z, 0)
    CHECK(out[0] == doctest::Approx(1.2));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK(out[3] == doctest::Approx(-2.0));
    k.sign_residual(y, z, out, 4);  // y - sign(z), sign(0) = +1
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 2.0);
    CHECK(out[2] == -2.0);
    CHECK(out[3] == 0.0);
  }

  TEST_CASE("soft threshold passes NaN through") {
    std::vector<const kernels::KernelSet*> sets{&kernels::scalar()};
    if (kernels::avx2()) sets.push_back(kernels::avx2());
    std::array<double, 6> z{0.1, std::nan(""), -2.0, 0.0, 3.0, std::nan("")};
    for (const auto* k : sets) {
      CAPTURE(k->name);
      std::array<double, 6> out{};
      k->soft_threshold(z.data(), 0.5, out.data(), z.size());
      CHECK(out[0] == 0.0);
      CHECK(std::isnan(out[1]));
      CHECK(out[2] == -1.5);
      CHECK(std::isnan(out[5]));
    }
  }

  TEST_CASE("runtime selection") {
    kernels::select("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    CHECK_THROWS_AS(kernels::select("sse9"), InvalidArgument);
    kernels::select("auto");
    if (kernels::avx2()) CHECK(std::string(kernels::active().name) == "avx2");
  }
}
