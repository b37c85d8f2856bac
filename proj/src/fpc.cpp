#include "dfpc/fpc.hpp"

#include <cmath>
#include <string>

#include "dfpc/kernels.hpp"
#include "dfpc/linalg.hpp"
#include "dfpc/parallel.hpp"

namespace dfpc {

std::string_view to_string(Variant v) noexcept { return v == Variant::l1 ? "l1" : "l2"; }

Variant parse_variant(std::string_view s) {
  if (s == "l1") return Variant::l1;
  if (s == "l2") return Variant::l2;
  throw InvalidArgument("variant must be l1 or l2, got '" + std::string(s) + "'");
}

FpcConfig::FpcConfig(Variant v, double tau, double lambda, std::size_t max_iters)
    : variant_(v), tau_(tau), lambda_(lambda), max_iters_(max_iters) {
  if (!(tau > 0.0)) throw InvalidArgument("FpcConfig: tau must be > 0");
  if (!(lambda > 0.0)) throw InvalidArgument("FpcConfig: lambda must be > 0");
  if (max_iters == 0) throw InvalidArgument("FpcConfig: max_iters must be >= 1");
}

FpcConfig FpcConfig::from_tau_nu(Variant v, double tau, double nu, std::size_t max_iters) {
  if (!(nu > 0.0)) throw InvalidArgument("FpcConfig: nu must be > 0");
  return FpcConfig(v, tau, tau / nu, max_iters);
}

FpcConfig FpcConfig::defaults(Variant v) {
  // Fitted to the reference FPC-l2 trajectory on the N=100, M=300, K=10 setup.
  // The l1 step is chosen so its first iteration makes the same progress.
  return v == Variant::l2 ? from_tau_nu(v, 0.5, 0.0015, 150)
                          : from_tau_nu(v, 0.005, 0.0015, 150);
}

FpcConfig& FpcConfig::with_iters(std::size_t iters) {
  if (iters == 0) throw InvalidArgument("FpcConfig: max_iters must be >= 1");
  max_iters_ = iters;
  return *this;
}

namespace {
void check_dims(const Matrix& phi, std::span<const double> y, std::span<const double> x) {
  if (y.size() != phi.rows() || x.size() != phi.cols())
    throw InvalidArgument("gradient: expected y of length " + std::to_string(phi.rows()) +
                          " and x of length " + std::to_string(phi.cols()));
}
}  // namespace

Vector gradient_l1(const Matrix& phi, std::span<const double> y, std::span<const double> x) {
  check_dims(phi, y, x);
  Vector z = matvec(phi, x);
  kernels::active().sign_residual(y.data(), z.data(), z.data(), z.size());
  // z now holds y - sign(Phi x); the gradient is its negation through Phi^T.
  for (double& v : z) v = -v;
  return matvec_t(phi, z);
}

Vector gradient_l2(const Matrix& phi, std::span<const double> y, std::span<const double> x) {
  check_dims(phi, y, x);
  Vector z = matvec(phi, x);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double q = y[i] * z[i];
    z[i] = q <= 0.0 ? y[i] * q : 0.0;
  }
  return matvec_t(phi, z);
}

Vector consistency_gradient(Variant v, const Matrix& phi, std::span<const double> y,
                            std::span<const double> x) {
  return v == Variant::l1 ? gradient_l1(phi, y, x) : gradient_l2(phi, y, x);
}

Vector backprojection(const Matrix& phi, std::span<const double> y) {
  Vector x = matvec_t(phi, y);
  const double nrm = norm2(x);
  if (nrm == 0.0) throw InvalidArgument("backprojection: Phi^T y is zero");
  scale(x, 1.0 / nrm);
  return x;
}

FpcTrace fpc_solve(const Matrix& phi, std::span<const double> y, const FpcConfig& cfg,
                   std::optional<std::span<const double>> truth,
                   std::optional<std::span<const double>> x0) {
  if (y.size() != phi.rows()) throw InvalidArgument("fpc_solve: y length mismatch");
  for (double v : y)
    if (v != 1.0 && v != -1.0) throw InvalidArgument("fpc_solve: y must be in {-1, +1}");
  if (truth && truth->size() != phi.cols()) throw InvalidArgument("fpc_solve: truth length");

  Vector x;
  if (cfg.x0_policy == InitPolicy::given) {
    if (!x0) throw InvalidArgument("fpc_solve: x0 policy 'given' without an x0");
    if (x0->size() != phi.cols()) throw InvalidArgument("fpc_solve: x0 length mismatch");
    x.assign(x0->begin(), x0->end());
  } else {
    x = backprojection(phi, y);
  }

  const auto& k = kernels::active();
  const double tau = cfg.tau();
  const double nu = cfg.nu();
  FpcTrace trace;
  trace.iterates.reserve(cfg.max_iters());
  Vector u(x.size());
  for (std::size_t r = 0; r < cfg.max_iters(); ++r) {
    const Vector g = consistency_gradient(cfg.variant(), phi, y, x);
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] - tau * g[i];
    k.soft_threshold(u.data(), nu, u.data(), u.size());
    const double nrm = norm2(u);
    if (nrm == 0.0) throw ShrinkageCollapse(r + 1);

    Vector unit = u;
    scale(unit, 1.0 / nrm);
    if (cfg.renormalize_each_iter)
      x = unit;
    else
      x = u;
    if (truth) trace.nmse_db_per_iter.push_back(nmse_db(unit, *truth));
    trace.iterates.push_back(std::move(unit));
  }
  return trace;
}

Matrix fpc_nmse_table(const Matrix& phi, const MeasurementBatch& batch, const SignalBatch& truth,
                      const FpcConfig& cfg) {
  if (truth.count() != batch.count()) throw InvalidArgument("fpc_nmse_table: batch sizes");
  Matrix table(batch.count(), cfg.max_iters());
  parallel_for(batch.count(), [&](std::size_t l) {
    const FpcTrace t = fpc_solve(phi, batch.signs.row(l), cfg, truth.signal(l));
    for (std::size_t r = 0; r < cfg.max_iters(); ++r) table(l, r) = t.nmse_db_per_iter[r];
  });
  return table;
}

}  // namespace dfpc
