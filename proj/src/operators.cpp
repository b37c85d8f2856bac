#include "dfpc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfpc/kernels.hpp"

namespace dfpc {

Threshold::Threshold(double nu) : nu_(nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("threshold nu must be >= 0, got " + std::to_string(nu));
}

Threshold Threshold::from_tau_lambda(double tau, double lambda) {
  if (!(tau > 0.0) || !(lambda > 0.0)) throw InvalidArgument("tau and lambda must be > 0");
  return Threshold(tau / lambda);
}

Vector soft_threshold(std::span<const double> z, Threshold nu) {
  Vector out(z.size());
  kernels::active().soft_threshold(z.data(), nu.value(), out.data(), z.size());
  return out;
}

double soft_threshold(double z, Threshold nu) {
  const double mag = std::fabs(z) - nu.value();
  return !(mag <= 0.0) ? std::copysign(mag, z) : 0.0;
}

double one_sided_l1(std::span<const double> z) {
  double s = 0.0;
  for (double v : z)
    if (v < 0.0) s -= v;
  return s;
}

double one_sided_l2(std::span<const double> z) {
  double s = 0.0;
  for (double v : z)
    if (v < 0.0) s += 0.5 * v * v;
  return s;
}

Vector one_sided_l2_deriv(std::span<const double> z) {
  Vector out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](double v) { return std::min(v, 0.0); });
  return out;
}

Vector relu(std::span<const double> z) {
  Vector out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](double v) { return std::max(v, 0.0); });
  return out;
}

}  // namespace dfpc
