#pragma once

// Fixed-point continuation for 1-bit compressed sensing: a gradient step on
// the one-sided l1 or l2 consistency term, soft-thresholding, and projection
// back onto the unit sphere.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dfpc/model_core.hpp"

namespace dfpc {

enum class Variant { l1, l2 };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view s);

enum class InitPolicy { backprojection, given };

class FpcConfig {
 public:
  // Calibrated defaults for the N=100, M=300, K=10 setup (see config/fpc_defaults.conf).
  static FpcConfig defaults(Variant v);
  static FpcConfig from_tau_nu(Variant v, double tau, double nu, std::size_t max_iters);

  FpcConfig(Variant v, double tau, double lambda, std::size_t max_iters);

  Variant variant() const noexcept { return variant_; }
  double tau() const noexcept { return tau_; }
  double lambda() const noexcept { return lambda_; }
  double nu() const noexcept { return tau_ / lambda_; }
  std::size_t max_iters() const noexcept { return max_iters_; }

  InitPolicy x0_policy = InitPolicy::backprojection;
  // When false, intermediate iterates are left unnormalized and only the
  // recorded readouts are projected onto the sphere.
  bool renormalize_each_iter = true;

  FpcConfig& with_iters(std::size_t iters);

 private:
  Variant variant_;
  double tau_;
  double lambda_;
  std::size_t max_iters_;
};

struct FpcTrace {
  std::vector<Vector> iterates;         // unit-norm x^(1) .. x^(R)
  std::vector<double> nmse_db_per_iter;  // filled when the truth is supplied

  const Vector& final_estimate() const { return iterates.back(); }
};

// Phi^T (sign(Phi x) - y), sign(0) = +1.
Vector gradient_l1(const Matrix& phi, std::span<const double> y, std::span<const double> x);
// Phi^T (y .* min(y .* Phi x, 0)).
Vector gradient_l2(const Matrix& phi, std::span<const double> y, std::span<const double> x);

Vector consistency_gradient(Variant v, const Matrix& phi, std::span<const double> y,
                            std::span<const double> x);

// Phi^T y / |Phi^T y|.
Vector backprojection(const Matrix& phi, std::span<const double> y);

FpcTrace fpc_solve(const Matrix& phi, std::span<const double> y, const FpcConfig& cfg,
                   std::optional<std::span<const double>> truth = std::nullopt,
                   std::optional<std::span<const double>> x0 = std::nullopt);

// Per-sample, per-iteration NMSE (count x max_iters) over a measured batch.
// Instances run on the worker pool; each row is written by one instance.
Matrix fpc_nmse_table(const Matrix& phi, const MeasurementBatch& batch, const SignalBatch& truth,
                      const FpcConfig& cfg);

}  // namespace dfpc
