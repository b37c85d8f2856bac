#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "dfpc/error.hpp"
#include "dfpc/model_core.hpp"
#include "dfpc/parallel.hpp"
#include "oracles.hpp"

using namespace dfpc;

TEST_SUITE("model_core") {
  TEST_CASE("generated signals are K-sparse and unit norm") {
    const SignalBatch s = generate_signals(100, 10, 100, 7);
    REQUIRE(s.count() == 100);
    for (std::size_t l = 0; l < s.count(); ++l) {
      std::size_t nnz = 0;
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < 100; ++i)
        if (s.values(l, i) != 0.0) {
          ++nnz;
          support.push_back(i);
        }
      CHECK(nnz == 10);
      CHECK(support == s.supports[l]);
      CHECK(std::abs(oracle::norm(s.signal(l)) - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("k = n gives a dense unit vector") {
    const SignalBatch s = generate_signals(4, 4, 1, 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.values(0, i) != 0.0);
    CHECK(std::abs(oracle::norm(s.signal(0)) - 1.0) <= 1e-12);
  }

  TEST_CASE("signal generation rejects bad arguments") {
    CHECK_THROWS_AS(generate_signals(10, 11, 1, 0), InvalidArgument);
    CHECK_THROWS_AS(generate_signals(10, 0, 1, 0), InvalidArgument);
    CHECK_THROWS_AS(generate_signals(10, 3, 0, 0), InvalidArgument);
  }

  TEST_CASE("support positions are uniform (chi-square, alpha = 0.01)") {
    const SignalBatch s = generate_signals(100, 10, 1000, 7);
    std::vector<double> counts(100, 0.0);
    for (const auto& sup : s.supports)
      for (std::size_t i : sup) counts[i] += 1.0;
    const double expected = 1000.0 * 10.0 / 100.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 134.6416);  // 99th percentile of chi-square with 99 degrees of freedom
  }

  TEST_CASE("generation does not depend on the worker count") {
    set_worker_count(1);
    const SignalBatch a = generate_signals(50, 5, 40, 9);
    const Matrix pa = generate_sensing_matrix(30, 50, 9);
    set_worker_count(3);
    const SignalBatch b = generate_signals(50, 5, 40, 9);
    const Matrix pb = generate_sensing_matrix(30, 50, 9);
    set_worker_count(1);
    CHECK(a.values == b.values);
    CHECK(pa == pb);
  }

  TEST_CASE("sensing matrix entries have variance 1/M") {
    const Matrix phi = generate_sensing_matrix(300, 100, 7);
    double sum = 0.0, sq = 0.0;
    for (double v : phi.flat()) {
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(phi.size());
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(1.0 / 300.0 / n));
    CHECK(var == doctest::Approx(1.0 / 300.0).epsilon(0.03));
  }

  TEST_CASE("measure: small cases") {
    Matrix x(1, 2);
    x(0, 0) = 0.6;
    x(0, 1) = -0.8;
    const MeasurementBatch y = measure(Matrix::identity(2), x);
    CHECK(y.signs(0, 0) == 1.0);
    CHECK(y.signs(0, 1) == -1.0);

    std::mt19937_64 rng(5);
    const Matrix phi = oracle::random_matrix(6, 4, rng);
    Matrix e1(1, 4);
    e1(0, 0) = 1.0;
    const MeasurementBatch ye = measure(phi, e1);
    for (std::size_t i = 0; i < 6; ++i) CHECK(ye.signs(0, i) == oracle::sgn(phi(i, 0)));

    CHECK(measure(phi, Matrix(1, 4)).signs(0, 3) == 1.0);  // sign(0) = +1
    CHECK_THROWS_AS(measure(phi, Matrix(1, 5)), InvalidArgument);
  }

  TEST_CASE("measure matches a per-entry dot-product loop") {
    const Matrix phi = generate_sensing_matrix(300, 100, 7);
    const SignalBatch s = generate_signals(100, 10, 100, 7);
    const MeasurementBatch y = measure(phi, s.values);
    for (std::size_t l = 0; l < s.count(); ++l) {
      const Vector z = oracle::matvec(phi, s.signal(l));
      for (std::size_t i = 0; i < 300; ++i) {
        CHECK(y.signs(l, i) == oracle::sgn(z[i]));
        CHECK(std::abs(y.pre_quant(l, i) - z[i]) <= 1e-14);
      }
    }
  }

  TEST_CASE("noise amplitude") {
    CHECK(noise_amplitude(1.0, 20.0) == doctest::Approx(0.1));
    CHECK(noise_amplitude(4.0, 0.0) == doctest::Approx(2.0));
  }

  TEST_CASE("gaussian noise: infinite SNR and missing analog values") {
    const ProblemInstance inst = make_instance(generate_sensing_matrix(30, 10, 1),
                                               generate_signals(10, 2, 5, 1), 1);
    const MeasurementBatch same =
        add_gaussian_noise(inst.measurements, std::numeric_limits<double>::infinity(), 3);
    CHECK(same.signs == inst.measurements.signs);
    CHECK(apply_noise(inst.measurements, NoiseSpec::none()).signs == inst.measurements.signs);

    MeasurementBatch bare = inst.measurements;
    bare.pre_quant = Matrix();
    CHECK_THROWS_AS(add_gaussian_noise(bare, 20.0, 3), InvalidState);
  }

  TEST_CASE("gaussian noise flip fraction matches an independent re-simulation") {
    const ProblemInstance inst = make_instance(generate_sensing_matrix(300, 100, 7),
                                               generate_signals(100, 10, 100, 7), 7);
    const MeasurementBatch noisy = add_gaussian_noise(inst.measurements, 30.0, 7);
    double flips = 0.0;
    for (std::size_t i = 0; i < noisy.signs.size(); ++i)
      flips += noisy.signs.flat()[i] != inst.measurements.signs.flat()[i];
    const double observed = flips / static_cast<double>(noisy.signs.size());

    std::mt19937_64 rng(424242);
    double expected_flips = 0.0, trials = 0.0;
    for (int rep = 0; rep < 20; ++rep)
      for (std::size_t l = 0; l < 100; ++l) {
        const auto z = inst.measurements.pre_quant.row(l);
        double ps = 0.0;
        for (double v : z) ps += v * v;
        ps /= 300.0;
        std::normal_distribution<double> g(0.0, std::sqrt(ps / std::pow(10.0, 3.0)));
        for (double v : z) {
          expected_flips += oracle::sgn(v + g(rng)) != oracle::sgn(v);
          trials += 1.0;
        }
      }
    CHECK(std::abs(observed - expected_flips / trials) <= 0.005);
    // Signs stay the quantized analog values.
    for (std::size_t i = 0; i < noisy.signs.size(); ++i)
      CHECK(noisy.signs.flat()[i] == oracle::sgn(noisy.pre_quant.flat()[i]));
  }

  TEST_CASE("sign flips") {
    const ProblemInstance inst = make_instance(generate_sensing_matrix(300, 100, 7),
                                               generate_signals(100, 10, 20, 7), 7);
    const MeasurementBatch& y = inst.measurements;
    CHECK(flip_signs(y, 0.0, 1).signs == y.signs);

    const MeasurementBatch f = flip_signs(y, 0.10, 1);
    std::set<std::vector<double>> patterns;
    for (std::size_t l = 0; l < y.count(); ++l) {
      std::size_t neg = 0;
      std::vector<double> xi(300);
      for (std::size_t i = 0; i < 300; ++i) {
        xi[i] = f.signs(l, i) * y.signs(l, i);
        neg += xi[i] < 0;
      }
      CHECK(neg == 30);
      patterns.insert(xi);
    }
    CHECK(patterns.size() == y.count());  // fresh pattern per column

    const Matrix xi = flip_pattern(300, y.count(), 0.25, 4);
    const MeasurementBatch twice = apply_flip_pattern(apply_flip_pattern(y, xi), xi);
    CHECK(twice.signs == y.signs);
    CHECK(twice.pre_quant == y.pre_quant);

    CHECK(flip_count(0.10, 300) == 30);
    CHECK(flip_count(0.015, 300) == flip_count(0.015, 300));
    CHECK_THROWS_AS(flip_signs(y, 1.5, 1), InvalidArgument);
    CHECK_THROWS_AS(flip_signs(y, -0.1, 1), InvalidArgument);
    CHECK(apply_noise(y, NoiseSpec::flip(0.1, 1)).signs == f.signs);
  }

  TEST_CASE("nmse_db") {
    const Vector x{1.0, 0.0};
    CHECK(nmse_db(Vector{1.0, 0.1}, x) == doctest::Approx(-20.0));
    CHECK(nmse_db(Vector{0.0, 0.0}, x) == doctest::Approx(0.0));
    CHECK(nmse_db(Vector{-1.0, 0.0}, x) == doctest::Approx(6.0206).epsilon(1e-5));
    CHECK(nmse_db(x, x) == -std::numeric_limits<double>::infinity());
    CHECK(clamp_nmse(nmse_db(x, x)) == kNmseFloorDb);
    CHECK_THROWS_AS(nmse_db(x, Vector{0.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(nmse_db(Vector{1.0}, x), InvalidArgument);
    // No scale invariance: a scaled estimate has a different error.
    CHECK(nmse_db(Vector{0.5, 0.05}, x) != doctest::Approx(nmse_db(Vector{1.0, 0.1}, x)));
  }

  TEST_CASE("dB-domain mean") {
    const double v[] = {-10.0, -20.0, -std::numeric_limits<double>::infinity()};
    CHECK(mean_db(std::span<const double>(v, 2)) == doctest::Approx(-15.0));
    CHECK(mean_db(v) == doctest::Approx((-30.0 + kNmseFloorDb) / 3.0));
  }
}
