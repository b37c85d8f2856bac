#pragma once

#include <span>

#include "dfpc/matrix.hpp"

namespace dfpc {

/// Shrinkage amount nu = tau / lambda of the soft-thresholding operator.
class Threshold {
 public:
  explicit Threshold(double nu);
  static Threshold from_tau_lambda(double tau, double lambda);
  double value() const noexcept { return nu_; }

 private:
  double nu_;
};

// sign(z) * max(|z| - nu, 0), elementwise.
Vector soft_threshold(std::span<const double> z, Threshold nu);
double soft_threshold(double z, Threshold nu);

// Sum of |z_i| over negative entries.
double one_sided_l1(std::span<const double> z);
// Sum of z_i^2 / 2 over negative entries.
double one_sided_l2(std::span<const double> z);
// min(z, 0): derivative of the one-sided l2 penalty, 0 at the kink.
Vector one_sided_l2_deriv(std::span<const double> z);

Vector relu(std::span<const double> z);

}  // namespace dfpc
