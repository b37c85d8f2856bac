#include "dfpc/unfolded.hpp"

#include <cmath>
#include <string>

#include "dfpc/kernels.hpp"
#include "dfpc/linalg.hpp"
#include "dfpc/operators.hpp"

namespace dfpc {

UnfoldedModel::UnfoldedModel(Variant variant, std::size_t depth, bool tied,
                             std::vector<LayerParams> params)
    : variant_(variant), depth_(depth), tied_(tied), params_(std::move(params)) {
  if (depth_ == 0) throw InvalidArgument("UnfoldedModel: need at least one layer");
  const std::size_t expected = tied_ ? 1 : depth_;
  if (params_.size() != expected)
    throw InvalidArgument("UnfoldedModel: expected " + std::to_string(expected) +
                          " parameter sets, got " + std::to_string(params_.size()));
  const std::size_t n = params_.front().a.rows(), m = params_.front().a.cols();
  for (const auto& p : params_) {
    require_shape(p.a, n, m, "UnfoldedModel A");
    require_shape(p.bbar, m, n, "UnfoldedModel Bbar");
    if (!(p.nu >= 0.0)) throw InvalidArgument("UnfoldedModel: nu must be >= 0");
  }
}

UnfoldedModel UnfoldedModel::init(const Matrix& phi, Variant variant, std::size_t depth,
                                  double tau, double nu0, bool tied) {
  if (depth == 0) throw InvalidArgument("init_model: num_layers must be >= 1");
  if (!(tau > 0.0)) throw InvalidArgument("init_model: tau must be > 0");
  LayerParams p;
  p.a = phi.transposed();
  scale(p.a.flat(), tau);
  p.bbar = phi;
  if (variant == Variant::l2) scale(p.bbar.flat(), -1.0);
  p.nu = nu0;
  std::vector<LayerParams> params(tied ? 1 : depth, p);
  return UnfoldedModel(variant, depth, tied, std::move(params));
}

UnfoldedModel UnfoldedModel::truncated(std::size_t depth) const {
  if (depth == 0 || depth > depth_) throw InvalidArgument("truncated: depth out of range");
  std::vector<LayerParams> params(params_.begin(),
                                  params_.begin() + static_cast<std::ptrdiff_t>(tied_ ? 1 : depth));
  return UnfoldedModel(variant_, depth, tied_, std::move(params));
}

const Matrix& ForwardCache::layer_output(std::size_t r) const {
  if (r == 0 || r > depth()) throw InvalidArgument("layer_output: depth out of range");
  return r == depth() ? output : inputs[r];
}

namespace {

void check_batch(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0) {
  if (signs.cols() != model.m()) throw InvalidArgument("forward: sign length != m");
  require_shape(x0, signs.rows(), model.n(), "forward x0");
}

// Writes y .* relu(y .* z) (l2) or y - sign(z) (l1) into v.
void correction(Variant variant, const double* y, const double* z, double* v, std::size_t len) {
  const auto& k = kernels::active();
  if (variant == Variant::l2)
    k.sign_relu(y, z, v, len);
  else
    k.sign_residual(y, z, v, len);
}

}  // namespace

ForwardCache forward_cache(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0) {
  check_batch(model, signs, x0);
  const auto& k = kernels::active();
  const std::size_t depth = model.depth();
  ForwardCache cache;
  cache.signs = signs;
  cache.inputs.reserve(depth);
  cache.pre_act.reserve(depth);
  cache.corrections.reserve(depth);
  cache.pre_shrink.reserve(depth);

  Matrix x = x0;
  for (std::size_t r = 0; r < depth; ++r) {
    const LayerParams& p = model.layer(r);
    // Row l of x * Bbar^T is Bbar x_l; multiplying by the sign rows is the
    // Hadamard product with the (implicitly broadcast) extended sign matrix.
    Matrix z = mul_nt(x, p.bbar);
    Matrix v(z.rows(), z.cols());
    correction(model.variant(), signs.data(), z.data(), v.data(), z.size());
    Matrix c = mul_nt(v, p.a);
    k.axpy(1.0, x.data(), c.data(), c.size());
    Matrix next(c.rows(), c.cols());
    k.soft_threshold(c.data(), p.nu, next.data(), c.size());

    cache.inputs.push_back(std::move(x));
    cache.pre_act.push_back(std::move(z));
    cache.corrections.push_back(std::move(v));
    cache.pre_shrink.push_back(std::move(c));
    x = std::move(next);
  }
  cache.output = std::move(x);
  return cache;
}

Matrix readout(const ForwardCache& cache, std::size_t depth, std::vector<std::size_t>* zero_rows) {
  Matrix out = cache.layer_output(depth);
  for (std::size_t l = 0; l < out.rows(); ++l) {
    auto row = out.row(l);
    const double nrm = norm2(row);
    if (nrm == 0.0) {
      if (zero_rows) zero_rows->push_back(l);
      continue;
    }
    scale(row, 1.0 / nrm);
  }
  return out;
}

SingleForward forward_single(const UnfoldedModel& model, std::span<const double> y,
                             std::span<const double> x0) {
  if (y.size() != model.m() || x0.size() != model.n())
    throw InvalidArgument("forward_single: dimension mismatch");
  if (norm2(x0) == 0.0) throw InvalidArgument("forward_single: x0 must be nonzero");
  const auto& k = kernels::active();
  SingleForward out;
  ForwardCache& cache = out.cache;
  cache.signs = Matrix(1, y.size());
  std::copy(y.begin(), y.end(), cache.signs.data());

  Vector x(x0.begin(), x0.end());
  for (std::size_t r = 0; r < model.depth(); ++r) {
    const LayerParams& p = model.layer(r);
    Vector z = matvec(p.bbar, x);
    Vector v(z.size());
    correction(model.variant(), y.data(), z.data(), v.data(), z.size());
    Vector c = matvec(p.a, v);
    k.axpy(1.0, x.data(), c.data(), c.size());
    Vector next(c.size());
    k.soft_threshold(c.data(), p.nu, next.data(), c.size());

    auto as_row = [](const Vector& v) {
      Matrix m(1, v.size());
      std::copy(v.begin(), v.end(), m.data());
      return m;
    };
    cache.inputs.push_back(as_row(x));
    cache.pre_act.push_back(as_row(z));
    cache.corrections.push_back(as_row(v));
    cache.pre_shrink.push_back(as_row(c));
    x = std::move(next);
  }
  cache.output = Matrix(1, x.size());
  std::copy(x.begin(), x.end(), cache.output.data());

  const double nrm = norm2(x);
  if (nrm == 0.0) throw ZeroOutput(0);
  scale(x, 1.0 / nrm);
  out.xstar = std::move(x);
  return out;
}

Matrix forward_batched(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0) {
  check_batch(model, signs, x0);
  for (std::size_t l = 0; l < x0.rows(); ++l)
    if (norm2(x0.row(l)) == 0.0)
      throw InvalidArgument("forward_batched: x0 column " + std::to_string(l) + " is zero");
  const ForwardCache cache = forward_cache(model, signs, x0);
  std::vector<std::size_t> zeros;
  Matrix out = readout(cache, model.depth(), &zeros);
  if (!zeros.empty()) throw ZeroOutput(zeros.front());
  return out;
}

Matrix forward_serial_diagonal(const UnfoldedModel& model, const Matrix& signs,
                               const Matrix& x0) {
  check_batch(model, signs, x0);
  const std::size_t n = model.n(), m = model.m();
  Matrix out(signs.rows(), n);
  for (std::size_t l = 0; l < signs.rows(); ++l) {
    Matrix diag(m, m);
    for (std::size_t i = 0; i < m; ++i) diag(i, i) = signs(l, i);
    Vector x(x0.row(l).begin(), x0.row(l).end());
    for (std::size_t r = 0; r < model.depth(); ++r) {
      const LayerParams& p = model.layer(r);
      // Dense products on purpose: this is the cost the batched form avoids.
      Matrix yb(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t q = 0; q < m; ++q) {
          const double d = diag(i, q);
          for (std::size_t j = 0; j < n; ++j) yb(i, j) += d * p.bbar(q, j);
        }
      Matrix ay(n, m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < m; ++q) {
          const double a = p.a(i, q);
          for (std::size_t j = 0; j < m; ++j) ay(i, j) += a * diag(q, j);
        }
      Vector inner = matvec(yb, x);
      Vector v(m);
      if (model.variant() == Variant::l2) {
        for (std::size_t i = 0; i < m; ++i) v[i] = std::max(inner[i], 0.0);
      } else {
        // diag(y)(1 - diag(y) sign(Bx)) == y - sign(Bx)
        for (std::size_t i = 0; i < m; ++i)
          v[i] = 1.0 - signs(l, i) * sign_of(signs(l, i) * inner[i]);
      }
      Vector c = matvec(ay, v);
      for (std::size_t i = 0; i < n; ++i) x[i] = soft_threshold(x[i] + c[i], Threshold(p.nu));
    }
    const double nrm = norm2(x);
    if (nrm == 0.0) throw ZeroOutput(l);
    for (std::size_t i = 0; i < n; ++i) out(l, i) = x[i] / nrm;
  }
  return out;
}

Matrix backprojection_batch(const Matrix& phi, const Matrix& signs) {
  if (signs.cols() != phi.rows()) throw InvalidArgument("backprojection_batch: sign length");
  Matrix x(signs.rows(), phi.cols());
  add_mul_nn(x, signs, phi);
  for (std::size_t l = 0; l < x.rows(); ++l) {
    auto row = x.row(l);
    const double nrm = norm2(row);
    if (nrm == 0.0) throw InvalidArgument("backprojection: Phi^T y is zero");
    scale(row, 1.0 / nrm);
  }
  return x;
}

ExtendedBatch build_extended(const Matrix& signs, const Matrix& bbar, const Matrix& x) {
  const std::size_t batch = signs.rows(), m = signs.cols(), n = bbar.cols();
  if (bbar.rows() != m) throw InvalidArgument("build_extended: Bbar rows != m");
  require_shape(x, batch, n, "build_extended x");
  ExtendedBatch ext{Matrix(m * batch, n), Matrix(m * batch, n), Matrix(n, m * batch), m, batch};
  for (std::size_t l = 0; l < batch; ++l)
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t q = l * m + i;
      for (std::size_t j = 0; j < n; ++j) {
        ext.y_ex(q, j) = signs(l, i);
        ext.b_ex(q, j) = bbar(i, j);
        ext.x_ex(j, q) = x(l, j);
      }
    }
  return ext;
}

Matrix extended_hadamard(const ExtendedBatch& ext) {
  Matrix h(ext.y_ex.rows(), ext.y_ex.cols());
  auto y = ext.y_ex.flat();
  auto b = ext.b_ex.flat();
  auto out = h.flat();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] * b[i];
  return h;
}

Matrix extended_products(const ExtendedBatch& ext) {
  const Matrix h = extended_hadamard(ext);
  const std::size_t n = h.cols();
  Matrix out(ext.batch, ext.m);
  for (std::size_t q = 0; q < h.rows(); ++q) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += h(q, j) * ext.x_ex(j, q);
    out(q / ext.m, q % ext.m) = s;
  }
  return out;
}

}  // namespace dfpc
