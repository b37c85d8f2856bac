#include "dfpc/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dfpc/linalg.hpp"
#include "dfpc/parallel.hpp"
#include "dfpc/rng.hpp"

namespace dfpc {
namespace {

// First `count` entries of a uniformly shuffled 0..n-1 (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    Engine& eng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(eng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

SignalBatch generate_signals(std::size_t n, std::size_t k, std::size_t count,
                             std::uint64_t seed) {
  if (k == 0 || k > n) throw InvalidArgument("generate_signals: need 0 < k <= n");
  if (count == 0) throw InvalidArgument("generate_signals: count must be >= 1");

  SignalBatch batch{n, k, Matrix(count, n), std::vector<std::vector<std::size_t>>(count)};
  parallel_for(count, [&](std::size_t l) {
    Engine eng = make_engine(seed, l);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto support = sample_without_replacement(n, k, eng);
    std::sort(support.begin(), support.end());
    auto x = batch.values.row(l);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (std::size_t idx : support) {
        x[idx] = normal(eng);
        sq += x[idx] * x[idx];
      }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t idx : support) x[idx] *= inv;
    batch.supports[l] = std::move(support);
  });
  return batch;
}

Matrix generate_sensing_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0 || n == 0) throw InvalidArgument("generate_sensing_matrix: empty dimensions");
  Matrix phi(m, n);
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  parallel_for(m, [&](std::size_t r) {
    Engine eng = make_engine(seed, r);
    std::normal_distribution<double> normal(0.0, sd);
    for (double& v : phi.row(r)) v = normal(eng);
  });
  return phi;
}

MeasurementBatch measure(const Matrix& phi, const Matrix& signals) {
  if (signals.cols() != phi.cols())
    throw InvalidArgument("measure: signal length " + std::to_string(signals.cols()) +
                          " does not match sensing matrix columns " +
                          std::to_string(phi.cols()));
  MeasurementBatch out;
  out.pre_quant = mul_nt(signals, phi);
  out.signs = Matrix(out.pre_quant.rows(), out.pre_quant.cols());
  auto src = out.pre_quant.flat();
  auto dst = out.signs.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sign_of(src[i]);
  return out;
}

double noise_amplitude(double signal_power, double snr_db) {
  return std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
}

MeasurementBatch add_gaussian_noise(const MeasurementBatch& batch, double snr_db,
                                    std::uint64_t seed) {
  if (!batch.has_pre_quant())
    throw InvalidState("add_gaussian_noise: batch carries no pre-quantization values");
  if (std::isinf(snr_db) && snr_db > 0) return batch;
  if (std::isnan(snr_db)) throw InvalidArgument("add_gaussian_noise: SNR is NaN");

  MeasurementBatch out = batch;
  const std::size_t m = batch.m();
  parallel_for(batch.count(), [&](std::size_t l) {
    auto z = out.pre_quant.row(l);
    double power = 0.0;
    for (double v : z) power += v * v;
    power /= static_cast<double>(m);
    const double amp = noise_amplitude(power, snr_db);
    Engine eng = make_engine(seed, l);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto s = out.signs.row(l);
    for (std::size_t i = 0; i < m; ++i) {
      z[i] += amp * normal(eng);
      s[i] = sign_of(z[i]);
    }
  });
  return out;
}

std::size_t flip_count(double ratio, std::size_t m) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw InvalidArgument("flip ratio must lie in [0, 1], got " + std::to_string(ratio));
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m)));
}

Matrix flip_pattern(std::size_t m, std::size_t count, double ratio, std::uint64_t seed) {
  const std::size_t flips = flip_count(ratio, m);
  Matrix xi(count, m, 1.0);
  parallel_for(count, [&](std::size_t l) {
    Engine eng = make_engine(seed, l);
    for (std::size_t idx : sample_without_replacement(m, flips, eng)) xi(l, idx) = -1.0;
  });
  return xi;
}

MeasurementBatch apply_flip_pattern(const MeasurementBatch& batch, const Matrix& xi) {
  require_shape(xi, batch.count(), batch.m(), "apply_flip_pattern");
  MeasurementBatch out = batch;
  auto s = out.signs.flat();
  auto f = xi.flat();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= f[i];
  // Negate the analog values too so signs == sign(pre_quant) keeps holding.
  if (out.has_pre_quant()) {
    auto z = out.pre_quant.flat();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= f[i];
  }
  return out;
}

MeasurementBatch flip_signs(const MeasurementBatch& batch, double ratio, std::uint64_t seed) {
  if (flip_count(ratio, batch.m()) == 0) return batch;
  return apply_flip_pattern(batch, flip_pattern(batch.m(), batch.count(), ratio, seed));
}

MeasurementBatch apply_noise(const MeasurementBatch& batch, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::none:
      return batch;
    case NoiseKind::gaussian:
      return add_gaussian_noise(batch, spec.snr_db, spec.seed);
    case NoiseKind::flip:
      return flip_signs(batch, spec.flip_ratio, spec.seed);
  }
  return batch;
}

ProblemInstance make_instance(const Matrix& phi, SignalBatch signals, std::uint64_t seed) {
  ProblemInstance inst;
  inst.phi = phi;
  inst.measurements = measure(phi, signals.values);
  inst.signals = std::move(signals);
  inst.seed = seed;
  return inst;
}

double nmse_db(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw InvalidArgument("nmse_db: length mismatch");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    err += d * d;
    ref += truth[i] * truth[i];
  }
  if (ref == 0.0) throw InvalidArgument("nmse_db: truth has zero norm");
  if (err == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(err / ref);
}

double mean_db(std::span<const double> values_db) {
  if (values_db.empty()) throw InvalidArgument("mean_db: no values");
  double s = 0.0;
  for (double v : values_db) s += clamp_nmse(v);
  return s / static_cast<double>(values_db.size());
}

}  // namespace dfpc
