#include "dfpc/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dfpc/kernels.hpp"
#include "dfpc/linalg.hpp"
#include "dfpc/rng.hpp"

namespace dfpc {

Gradients Gradients::zeros_like(const UnfoldedModel& model) {
  Gradients g;
  for (const auto& p : model.parameter_sets())
    g.sets.push_back({Matrix(p.a.rows(), p.a.cols()), Matrix(p.bbar.rows(), p.bbar.cols()), 0.0});
  return g;
}

bool Gradients::all_zero() const {
  for (const auto& s : sets) {
    if (s.nu != 0.0) return false;
    for (double v : s.a.flat())
      if (v != 0.0) return false;
    for (double v : s.bbar.flat())
      if (v != 0.0) return false;
  }
  return true;
}

namespace {

// Vector-Jacobian product of x -> x / |x|, row by row. Zero rows get zero.
Matrix normalization_vjp(const Matrix& x, const Matrix& upstream) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t l = 0; l < x.rows(); ++l) {
    const auto xr = x.row(l);
    const double nrm = norm2(xr);
    if (nrm == 0.0) continue;
    const auto ur = upstream.row(l);
    double proj = 0.0;
    for (std::size_t i = 0; i < xr.size(); ++i) proj += xr[i] * ur[i];
    proj /= nrm * nrm;
    auto gr = g.row(l);
    for (std::size_t i = 0; i < xr.size(); ++i) gr[i] = (ur[i] - xr[i] * proj) / nrm;
  }
  return g;
}

}  // namespace

Gradients backward(const UnfoldedModel& model, const ForwardCache& cache,
                   std::span<const ReadoutGradient> upstream, const BackwardOptions& opts) {
  const std::size_t depth = cache.depth();
  if (depth == 0 || cache.output.empty())
    throw InvalidState("backward: cache is empty (run a forward pass first)");
  if (depth != model.depth()) throw InvalidState("backward: cache depth != model depth");
  const std::size_t batch = cache.batch(), n = model.n(), m = model.m();
  for (const auto& u : upstream) {
    if (u.depth == 0 || u.depth > depth) throw InvalidArgument("backward: readout depth");
    require_shape(u.grad, batch, n, "backward upstream");
  }

  const auto& k = kernels::active();
  Gradients grads = Gradients::zeros_like(model);
  Matrix gx(batch, n);
  for (std::size_t r = depth; r >= 1; --r) {
    for (const auto& u : upstream) {
      if (u.depth != r) continue;
      const Matrix g = normalization_vjp(cache.layer_output(r), u.grad);
      k.axpy(1.0, g.data(), gx.data(), gx.size());
    }
    const std::size_t idx = r - 1;
    const LayerParams& p = model.layer(idx);
    LayerParams& gp = grads.sets[model.tied() ? 0 : idx];
    const Matrix& c = cache.pre_shrink[idx];
    const Matrix& z = cache.pre_act[idx];
    const Matrix& v = cache.corrections[idx];
    const Matrix& x_in = cache.inputs[idx];

    // Soft threshold: identity slope where |c| > nu, d/dnu = -sign(c).
    Matrix gc(batch, n);
    {
      const auto cf = c.flat();
      const auto gxf = gx.flat();
      auto gcf = gc.flat();
      double dnu = 0.0;
      for (std::size_t i = 0; i < cf.size(); ++i) {
        if (std::fabs(cf[i]) > p.nu) {
          gcf[i] = gxf[i];
          dnu -= cf[i] > 0.0 ? gxf[i] : -gxf[i];
        }
      }
      gp.nu += dnu;
    }

    // c = x_in + v A^T
    add_mul_tn(gp.a, gc, v);
    Matrix gv(batch, m);
    add_mul_nn(gv, gc, p.a);

    Matrix gz(batch, m);
    {
      const auto zf = z.flat();
      const auto yf = cache.signs.flat();
      const auto gvf = gv.flat();
      auto gzf = gz.flat();
      if (model.variant() == Variant::l2) {
        for (std::size_t i = 0; i < zf.size(); ++i)
          if (yf[i] * zf[i] > 0.0) gzf[i] = gvf[i];
      } else if (opts.sign_gradient == SignGradient::straight_through) {
        for (std::size_t i = 0; i < zf.size(); ++i)
          if (std::fabs(zf[i]) <= 1.0) gzf[i] = -gvf[i];
      }
    }

    // z = x_in Bbar^T
    add_mul_tn(gp.bbar, gz, x_in);
    Matrix next = gc;
    add_mul_nn(next, gz, p.bbar);
    gx = std::move(next);
  }
  return grads;
}

Gradients backward(const UnfoldedModel& model, const ForwardCache& cache, const Matrix& upstream,
                   const BackwardOptions& opts) {
  const ReadoutGradient u{cache.depth(), upstream};
  return backward(model, cache, std::span<const ReadoutGradient>(&u, 1), opts);
}

double loss(std::span<const double> xstar, std::span<const double> truth) {
  if (xstar.size() != truth.size()) throw InvalidArgument("loss: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = xstar[i] - truth[i];
    s += d * d;
  }
  return s;
}

namespace {

std::vector<std::size_t> readout_depths(std::size_t depth, ReadoutLoss readout) {
  if (readout == ReadoutLoss::final_only) return {depth};
  std::vector<std::size_t> d(depth);
  std::iota(d.begin(), d.end(), std::size_t{1});
  return d;
}

// Objective value and, when `upstream` is non-null, its readout gradients.
double evaluate_objective(const ForwardCache& cache, const Matrix& truth, ReadoutLoss mode,
                          std::vector<ReadoutGradient>* upstream) {
  const std::size_t batch = cache.batch();
  const auto depths = readout_depths(cache.depth(), mode);
  const double weight = 1.0 / static_cast<double>(batch * depths.size());
  double total = 0.0;
  for (std::size_t d : depths) {
    const Matrix xhat = readout(cache, d);
    Matrix g(xhat.rows(), xhat.cols());
    for (std::size_t l = 0; l < batch; ++l) {
      total += loss(xhat.row(l), truth.row(l)) * weight;
      if (upstream) {
        auto gr = g.row(l);
        const auto xr = xhat.row(l);
        const auto tr = truth.row(l);
        for (std::size_t i = 0; i < gr.size(); ++i) gr[i] = 2.0 * weight * (xr[i] - tr[i]);
      }
    }
    if (upstream) upstream->push_back({d, std::move(g)});
  }
  return total;
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(src.row(rows[i]).begin(), src.row(rows[i]).end(), out.row(i).begin());
  return out;
}

}  // namespace

double objective(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0,
                 const Matrix& truth, ReadoutLoss readout) {
  const ForwardCache cache = forward_cache(model, signs, x0);
  return evaluate_objective(cache, truth, readout, nullptr);
}

AdamState::AdamState(const UnfoldedModel& model, AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg_.lr0 >= 0.0)) throw InvalidArgument("ADAM: lr0 must be >= 0");
  if (!(cfg_.decay_rate > 0.0 && cfg_.decay_rate <= 1.0))
    throw InvalidArgument("ADAM: decay_rate must lie in (0, 1]");
  if (cfg_.decay_every == 0) throw InvalidArgument("ADAM: decay_every must be >= 1");
  first_ = Gradients::zeros_like(model).sets;
  second_ = first_;
}

double AdamState::effective_lr() const {
  return cfg_.lr0 * std::pow(cfg_.decay_rate, static_cast<double>(step_) /
                                                  static_cast<double>(cfg_.decay_every));
}

void AdamState::apply(UnfoldedModel& model, const Gradients& grads) {
  auto sets = model.parameter_sets();
  if (grads.sets.size() != sets.size() || first_.size() != sets.size())
    throw InvalidArgument("ADAM: gradient layout does not match the model");
  const double lr = effective_lr();
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg_.beta2, t);
  const auto& k = kernels::active();
  for (std::size_t s = 0; s < sets.size(); ++s) {
    LayerParams& p = sets[s];
    const LayerParams& g = grads.sets[s];
    k.adam_update(p.a.data(), g.a.data(), first_[s].a.data(), second_[s].a.data(), p.a.size(), lr,
                  cfg_.beta1, cfg_.beta2, bias1, bias2, cfg_.epsilon);
    k.adam_update(p.bbar.data(), g.bbar.data(), first_[s].bbar.data(), second_[s].bbar.data(),
                  p.bbar.size(), lr, cfg_.beta1, cfg_.beta2, bias1, bias2, cfg_.epsilon);
    k.adam_update(&p.nu, &g.nu, &first_[s].nu, &second_[s].nu, 1, lr, cfg_.beta1, cfg_.beta2,
                  bias1, bias2, cfg_.epsilon);
    p.nu = std::max(p.nu, 0.0);
  }
}

TrainResult train(UnfoldedModel model, const ProblemInstance& dataset, const TrainConfig& cfg,
                  AdamState adam, const TrainObserver& observer) {
  const Matrix& phi = dataset.phi;
  if (phi.rows() != model.m() || phi.cols() != model.n())
    throw InvalidArgument("train: model dimensions do not match the dataset");
  if (cfg.batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0))
    throw InvalidArgument("train: validation_fraction must lie in [0, 1)");

  const std::size_t total = dataset.signals.count();
  const std::size_t n_val = static_cast<std::size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(total)));
  const std::size_t n_train = total - n_val;
  const std::size_t pool_size = cfg.resample_each_epoch ? cfg.train_size : n_train;
  if (pool_size == 0) throw InvalidArgument("train: no training pairs");
  if (cfg.batch_size > pool_size)
    throw InvalidArgument("train: batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds the " + std::to_string(pool_size) + " training pairs");

  std::vector<std::size_t> val_rows(n_val);
  std::iota(val_rows.begin(), val_rows.end(), n_train);
  const Matrix val_signs = gather_rows(dataset.measurements.signs, val_rows);
  const Matrix val_truth = gather_rows(dataset.signals.values, val_rows);
  const Matrix val_x0 = n_val ? backprojection_batch(phi, val_signs) : Matrix();

  Matrix fixed_signs, fixed_truth, fixed_x0;
  if (!cfg.resample_each_epoch) {
    std::vector<std::size_t> rows(n_train);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    fixed_signs = gather_rows(dataset.measurements.signs, rows);
    fixed_truth = gather_rows(dataset.signals.values, rows);
    fixed_x0 = backprojection_batch(phi, fixed_signs);
  }

  TrainResult result{std::move(model), {}};
  UnfoldedModel& net = result.model;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Matrix pool_signs, pool_truth, pool_x0;
    if (cfg.resample_each_epoch) {
      SignalBatch fresh = generate_signals(dataset.n(), dataset.signals.k, cfg.train_size,
                                           derive_seed(cfg.seed, Stream::fresh_train, epoch));
      pool_signs = measure(phi, fresh.values).signs;
      pool_truth = std::move(fresh.values);
      pool_x0 = backprojection_batch(phi, pool_signs);
    }
    const Matrix& signs = cfg.resample_each_epoch ? pool_signs : fixed_signs;
    const Matrix& truth = cfg.resample_each_epoch ? pool_truth : fixed_truth;
    const Matrix& x0 = cfg.resample_each_epoch ? pool_x0 : fixed_x0;

    std::vector<std::size_t> order(pool_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine shuffler(derive_seed(cfg.seed, Stream::shuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffler);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < pool_size; begin += cfg.batch_size) {
      const std::size_t end = std::min(pool_size, begin + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const Matrix bs = gather_rows(signs, rows);
      const Matrix bt = gather_rows(truth, rows);
      const Matrix bx = gather_rows(x0, rows);

      const ForwardCache cache = forward_cache(net, bs, bx);
      std::vector<ReadoutGradient> upstream;
      const double batch_loss = evaluate_objective(cache, bt, cfg.readout, &upstream);
      if (!std::isfinite(batch_loss)) throw Divergence(adam.step(), adam.effective_lr());
      const Gradients grads = backward(net, cache, upstream, cfg.backward);
      adam.apply(net, grads);
      loss_sum += batch_loss * static_cast<double>(rows.size());
    }

    double val_db = std::numeric_limits<double>::quiet_NaN();
    if (n_val > 0) {
      const ForwardCache cache = forward_cache(net, val_signs, val_x0);
      const Matrix xhat = readout(cache, net.depth());
      std::vector<double> db(n_val);
      for (std::size_t l = 0; l < n_val; ++l) db[l] = nmse_db(xhat.row(l), val_truth.row(l));
      val_db = mean_db(db);
    }
    const TrainRecord rec{adam.step(), epoch + 1, adam.effective_lr(),
                          loss_sum / static_cast<double>(pool_size), val_db};
    result.history.push_back(rec);
    if (observer) observer(rec);
  }
  return result;
}

}  // namespace dfpc
