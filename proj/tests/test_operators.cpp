#include <doctest.h>

#include <random>

#include "dfpc/error.hpp"
#include "dfpc/operators.hpp"
#include "oracles.hpp"

using namespace dfpc;

TEST_SUITE("operators") {
  TEST_CASE("soft threshold examples") {
    CHECK(soft_threshold(1.2, Threshold(0.5)) == doctest::Approx(0.7));
    CHECK(soft_threshold(-0.3, Threshold(0.5)) == 0.0);
    const Vector z{1.5, -2.25, 0.0, 3e-9};
    CHECK(soft_threshold(z, Threshold(0.0)) == z);
    CHECK_THROWS_AS(Threshold(-1e-9), InvalidArgument);
    CHECK(Threshold::from_tau_lambda(1.0, 50.0).value() == doctest::Approx(0.02));
  }

  TEST_CASE("soft threshold matches a scalar loop exactly") {
    std::mt19937_64 rng(1);
    const Matrix z = oracle::random_matrix(1, 1000, rng);
    const Vector out = soft_threshold(z.row(0), Threshold(0.25));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(out[i] == oracle::shrink(z(0, i), 0.25));
  }

  TEST_CASE("soft threshold is nonexpansive and vanishes exactly inside the band") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0), unu(0.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
      const double a = u(rng), b = u(rng);
      const Threshold nu(unu(rng));
      // Exact in real arithmetic; the subtraction of nu may round by an ulp.
      CHECK(std::abs(soft_threshold(a, nu) - soft_threshold(b, nu)) <= std::abs(a - b) + 1e-15);
      CHECK((soft_threshold(a, nu) == 0.0) == (std::abs(a) <= nu.value()));
    }
  }

  TEST_CASE("one-sided penalties") {
    CHECK(one_sided_l1(Vector{1, 2, 3}) == 0.0);
    CHECK(one_sided_l2(Vector{1, 2, 3}) == 0.0);
    CHECK(one_sided_l1(Vector{-2}) == 2.0);
    CHECK(one_sided_l2(Vector{-2}) == 2.0);
    CHECK(one_sided_l1(Vector{-1, 1, -3}) == 4.0);
    CHECK(one_sided_l2(Vector{-1, 1, -3}) == 5.0);
    std::mt19937_64 rng(3);
    const Matrix z = oracle::random_matrix(1, 200, rng);
    CHECK(one_sided_l1(z.row(0)) >= 0.0);
    CHECK(one_sided_l2(z.row(0)) >= 0.0);
  }

  TEST_CASE("one-sided l2 derivative") {
    CHECK(one_sided_l2_deriv(Vector{2, 0, -3}) == Vector{0, 0, -3});
    CHECK(one_sided_l2_deriv(Vector{0.1, 4, 9}) == Vector{0, 0, 0});

    std::mt19937_64 rng(4);
    const Matrix z = oracle::random_matrix(1, 500, rng);
    const Vector d = one_sided_l2_deriv(z.row(0));
    Vector neg(500);
    for (std::size_t i = 0; i < 500; ++i) neg[i] = -z(0, i);
    const Vector r = relu(neg);
    for (std::size_t i = 0; i < 500; ++i) CHECK(d[i] == -r[i]);

    // Finite differences of the penalty away from the kink.
    const double h = 1e-6;
    for (std::size_t i = 0; i < 500; ++i) {
      const double zi = z(0, i);
      if (std::abs(zi) < 1e-3) continue;
      const double fd =
          (one_sided_l2(Vector{zi + h}) - one_sided_l2(Vector{zi - h})) / (2.0 * h);
      CHECK(fd == doctest::Approx(d[i]).epsilon(1e-6).scale(1.0));
    }
  }
}
