#pragma once

// Problem data for 1-bit compressed sensing: sparse unit-norm signals,
// Gaussian sensing matrices, sign measurements, noise channels and NMSE.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dfpc/matrix.hpp"

namespace dfpc {

/// K-sparse unit-norm signals, one per row of `values` (count x n).
struct SignalBatch {
  std::size_t n = 0;
  std::size_t k = 0;
  Matrix values;
  std::vector<std::vector<std::size_t>> supports;  // sorted nonzero positions per signal

  std::size_t count() const noexcept { return values.rows(); }
  std::span<const double> signal(std::size_t l) const { return values.row(l); }
};

/// Sign measurements of a signal batch. Rows are measurement vectors y_l.
struct MeasurementBatch {
  Matrix signs;      // count x m, entries in {-1, +1}
  Matrix pre_quant;  // count x m, Phi x_l before quantization; empty when unavailable

  std::size_t count() const noexcept { return signs.rows(); }
  std::size_t m() const noexcept { return signs.cols(); }
  bool has_pre_quant() const noexcept { return !pre_quant.empty(); }
};

struct ProblemInstance {
  Matrix phi;  // m x n
  SignalBatch signals;
  MeasurementBatch measurements;
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return phi.cols(); }
  std::size_t m() const noexcept { return phi.rows(); }
};

enum class NoiseKind { none, gaussian, flip };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double snr_db = std::numeric_limits<double>::infinity();
  double flip_ratio = 0.0;
  std::uint64_t seed = 0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double snr_db, std::uint64_t seed) {
    return {NoiseKind::gaussian, snr_db, 0.0, seed};
  }
  static NoiseSpec flip(double ratio, std::uint64_t seed) {
    return {NoiseKind::flip, std::numeric_limits<double>::infinity(), ratio, seed};
  }
};

// Quantizer with sign(0) = +1.
constexpr double sign_of(double v) noexcept { return v >= 0.0 ? 1.0 : -1.0; }

SignalBatch generate_signals(std::size_t n, std::size_t k, std::size_t count, std::uint64_t seed);

// i.i.d. N(0, 1/m) entries.
Matrix generate_sensing_matrix(std::size_t m, std::size_t n, std::uint64_t seed);

MeasurementBatch measure(const Matrix& phi, const Matrix& signals);

// A_N = sqrt(P_S / 10^(snr/10)).
double noise_amplitude(double signal_power, double snr_db);

// Adds N(0, A_N^2) to the pre-quantization values with P_S = |Phi x_l|^2 / m
// computed per column, then re-quantizes. Infinite SNR returns the input.
MeasurementBatch add_gaussian_noise(const MeasurementBatch& batch, double snr_db,
                                    std::uint64_t seed);

// Number of sign flips per column, round(ratio * m).
std::size_t flip_count(double ratio, std::size_t m);

// Flip vectors xi in {-1, +1}^m, one fresh row per column.
Matrix flip_pattern(std::size_t m, std::size_t count, double ratio, std::uint64_t seed);

MeasurementBatch apply_flip_pattern(const MeasurementBatch& batch, const Matrix& xi);

MeasurementBatch flip_signs(const MeasurementBatch& batch, double ratio, std::uint64_t seed);

MeasurementBatch apply_noise(const MeasurementBatch& batch, const NoiseSpec& spec);

ProblemInstance make_instance(const Matrix& phi, SignalBatch signals, std::uint64_t seed);

// Lowest value written for an exact reconstruction.
inline constexpr double kNmseFloorDb = -300.0;

// 10 log10(|est - truth|^2 / |truth|^2); -inf for an exact match.
double nmse_db(std::span<const double> estimate, std::span<const double> truth);

// Replaces -inf by kNmseFloorDb.
constexpr double clamp_nmse(double db) noexcept { return db < kNmseFloorDb ? kNmseFloorDb : db; }

// dB-domain mean, summed in index order. -inf entries enter at the floor.
double mean_db(std::span<const double> values_db);

}  // namespace dfpc
