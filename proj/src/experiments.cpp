#include "dfpc/experiments.hpp"

#include <bit>
#include <string>

#include "dfpc/parallel.hpp"
#include "dfpc/rng.hpp"

namespace dfpc {

namespace {
std::string readout_name(ReadoutLoss r) {
  return r == ReadoutLoss::all_layers ? "all_layers" : "final_only";
}
}  // namespace

KeyValues ExperimentSetup::describe() const {
  KeyValues kv;
  kv["n"] = std::to_string(n);
  kv["m"] = std::to_string(m);
  kv["k"] = std::to_string(k);
  kv["train_pairs"] = std::to_string(train_pairs);
  kv["test_pairs"] = std::to_string(test_pairs);
  kv["seed"] = std::to_string(seed);
  kv["phi_draws"] = std::to_string(phi_draws);
  kv["fpc_l1.tau"] = format_double(fpc_l1.tau());
  kv["fpc_l1.nu"] = format_double(fpc_l1.nu());
  kv["fpc_l1.iters"] = std::to_string(fpc_l1.max_iters());
  kv["fpc_l2.tau"] = format_double(fpc_l2.tau());
  kv["fpc_l2.nu"] = format_double(fpc_l2.nu());
  kv["fpc_l2.iters"] = std::to_string(fpc_l2.max_iters());
  kv["fpc.x0"] = "backprojection";
  kv["layers"] = std::to_string(layers);
  kv["tied"] = tied ? "1" : "0";
  kv["train.epochs"] = std::to_string(train.epochs);
  kv["train.batch_size"] = std::to_string(train.batch_size);
  kv["train.validation_fraction"] = format_double(train.validation_fraction);
  kv["train.resample_each_epoch"] = train.resample_each_epoch ? "1" : "0";
  kv["train.train_size"] = std::to_string(train.train_size);
  kv["train.sign_gradient"] =
      train.backward.sign_gradient == SignGradient::zero ? "zero" : "straight_through";
  kv["adam.lr0"] = format_double(adam.lr0);
  kv["adam.decay_rate"] = format_double(adam.decay_rate);
  kv["adam.decay_every"] = std::to_string(adam.decay_every);
  kv["adam.beta1"] = format_double(adam.beta1);
  kv["adam.beta2"] = format_double(adam.beta2);
  kv["adam.epsilon"] = format_double(adam.epsilon);
  kv["table_readout"] = readout_name(table_readout);
  kv["sweep_readout"] = readout_name(sweep_readout);
  kv["retrain_per_depth"] = retrain_per_depth ? "1" : "0";
  kv["nmse_aggregation"] = "db_mean";
  kv["zero_output_policy"] = "zero_estimate_0db";
  return kv;
}

DataSplit make_split(const ExperimentSetup& setup, std::size_t draw) {
  const Matrix phi =
      generate_sensing_matrix(setup.m, setup.n, derive_seed(setup.seed, Stream::sensing, draw));
  DataSplit split;
  split.train = make_instance(
      phi,
      generate_signals(setup.n, setup.k, setup.train_pairs,
                       derive_seed(setup.seed, Stream::train_signals, draw)),
      setup.seed);
  split.test = make_instance(
      phi,
      generate_signals(setup.n, setup.k, setup.test_pairs,
                       derive_seed(setup.seed, Stream::test_signals, draw)),
      setup.seed);
  return split;
}

const ResultRow& ExperimentResult::find(const std::string& method, double sweep_value) const {
  for (const auto& r : rows)
    if (r.method == method && r.sweep_value == sweep_value) return r;
  throw InvalidArgument("no result row for " + method + " at " + format_double(sweep_value));
}

ResultRow make_row(std::string method, std::string sweep_param, double sweep_value,
                   std::vector<double> per_sample_db, std::size_t zero_outputs) {
  ResultRow row{std::move(method), std::move(sweep_param), sweep_value, std::move(per_sample_db),
                0.0, zero_outputs};
  row.mean_db = mean_db(row.per_sample_db);
  return row;
}

ModelEvaluation evaluate_model(const UnfoldedModel& model, const Matrix& phi,
                               const MeasurementBatch& measurements, const SignalBatch& truth,
                               bool all_depths) {
  if (truth.count() != measurements.count())
    throw InvalidArgument("evaluate_model: batch sizes differ");
  const Matrix x0 = backprojection_batch(phi, measurements.signs);
  const ForwardCache cache = forward_cache(model, measurements.signs, x0);
  ModelEvaluation ev;
  const std::size_t first = all_depths ? 1 : model.depth();
  for (std::size_t d = first; d <= model.depth(); ++d) {
    std::vector<std::size_t> zeros;
    const Matrix xhat = readout(cache, d, &zeros);
    std::vector<double> db(truth.count());
    for (std::size_t l = 0; l < truth.count(); ++l) db[l] = nmse_db(xhat.row(l), truth.signal(l));
    ev.per_depth_db.push_back(std::move(db));
    ev.zero_outputs.push_back(zeros.size());
  }
  return ev;
}

UnfoldedModel train_network(const ExperimentSetup& setup, const DataSplit& split, Variant variant,
                            std::size_t depth, ReadoutLoss readout, const TrainObserver& observer,
                            std::vector<TrainRecord>* history) {
  const FpcConfig& fpc = variant == Variant::l1 ? setup.fpc_l1 : setup.fpc_l2;
  UnfoldedModel model =
      UnfoldedModel::init(split.train.phi, variant, depth, fpc.tau(), fpc.nu(), setup.tied);
  TrainConfig cfg = setup.train;
  cfg.readout = readout;
  cfg.seed = derive_seed(setup.seed, Stream::fresh_train, 0);
  AdamState adam(model, setup.adam);
  TrainResult res = train(std::move(model), split.train, cfg, std::move(adam), observer);
  if (history) *history = std::move(res.history);
  return std::move(res.model);
}

Table1Output run_table1(const ExperimentSetup& setup, const TrainObserver& observer) {
  const DataSplit split = make_split(setup, 0);
  const std::size_t depth = setup.layers;

  Table1Output out;
  out.result.experiment = "table1";
  out.result.seed = setup.seed;
  out.result.config = setup.describe();

  FpcConfig fpc = setup.fpc_l2;
  fpc.with_iters(std::max<std::size_t>(fpc.max_iters(), depth));
  const Matrix table = fpc_nmse_table(split.test.phi, split.test.measurements, split.test.signals, fpc);
  auto fpc_row = [&](std::size_t iter) {
    std::vector<double> db(table.rows());
    for (std::size_t l = 0; l < table.rows(); ++l) db[l] = table(l, iter - 1);
    out.result.rows.push_back(
        make_row("FPC-l2", "iterations", static_cast<double>(iter), std::move(db)));
  };
  for (std::size_t r = 1; r <= depth; ++r) fpc_row(r);
  if (fpc.max_iters() > depth) fpc_row(fpc.max_iters());

  if (!setup.retrain_per_depth) {
    out.models.push_back(train_network(setup, split, Variant::l2, depth, setup.table_readout,
                                       observer, &out.history));
    const ModelEvaluation ev = evaluate_model(out.models.front(), split.test.phi,
                                              split.test.measurements, split.test.signals, true);
    for (std::size_t r = 1; r <= depth; ++r)
      out.result.rows.push_back(make_row("DeepFPC-l2", "layers", static_cast<double>(r),
                                         ev.per_depth_db[r - 1], ev.zero_outputs[r - 1]));
  } else {
    for (std::size_t r = 1; r <= depth; ++r) {
      std::vector<TrainRecord> hist;
      out.models.push_back(
          train_network(setup, split, Variant::l2, r, setup.table_readout, observer, &hist));
      const ModelEvaluation ev = evaluate_model(out.models.back(), split.test.phi,
                                                split.test.measurements, split.test.signals);
      out.result.rows.push_back(make_row("DeepFPC-l2", "layers", static_cast<double>(r),
                                         ev.per_depth_db.back(), ev.zero_outputs.back()));
      if (r == depth) out.history = std::move(hist);
    }
  }
  return out;
}

TrainedPair train_pair(const ExperimentSetup& setup, const DataSplit& split,
                       const TrainObserver& observer) {
  UnfoldedModel l1 =
      train_network(setup, split, Variant::l1, setup.layers, setup.sweep_readout, observer);
  UnfoldedModel l2 =
      train_network(setup, split, Variant::l2, setup.layers, setup.sweep_readout, observer);
  return {std::move(l1), std::move(l2)};
}

std::uint64_t noise_seed(std::uint64_t seed, NoiseKind kind, double value, std::size_t draw) {
  const Stream s = kind == NoiseKind::gaussian ? Stream::gaussian_noise : Stream::flips;
  return derive_seed(derive_seed(seed, s, draw), std::bit_cast<std::uint64_t>(value));
}

std::vector<double> default_snr_grid() { return {20, 25, 30, 35, 40}; }
std::vector<double> default_flip_grid() { return {0, 0.01, 0.03, 0.05, 0.10, 0.20, 0.30}; }

namespace {

NoiseSpec channel(NoiseKind kind, double value, std::uint64_t seed) {
  return kind == NoiseKind::gaussian ? NoiseSpec::gaussian(value, seed)
                                     : NoiseSpec::flip(value, seed);
}

struct Accumulator {
  std::vector<double> db;
  std::size_t zeros = 0;
  void add(const std::vector<double>& v, std::size_t z) {
    db.insert(db.end(), v.begin(), v.end());
    zeros += z;
  }
};

ExperimentResult noise_sweep(const ExperimentSetup& setup, NoiseKind kind,
                             const std::vector<double>& grid,
                             const std::optional<TrainedPair>& models,
                             const TrainObserver& observer) {
  if (models && setup.phi_draws != 1)
    throw InvalidArgument("pre-trained models apply to a single Phi draw");
  for (double v : grid)
    if (kind == NoiseKind::flip) flip_count(v, setup.m);  // range check

  ExperimentResult res;
  res.experiment = kind == NoiseKind::gaussian ? "sweep-snr" : "sweep-flip";
  res.seed = setup.seed;
  res.config = setup.describe();
  const std::string param = kind == NoiseKind::gaussian ? "snr_db" : "flip_ratio";

  std::vector<Accumulator> acc_l1(grid.size()), acc_l2(grid.size());
  for (std::size_t draw = 0; draw < setup.phi_draws; ++draw) {
    const DataSplit split = make_split(setup, draw);
    const TrainedPair pair = models ? *models : train_pair(setup, split, observer);
    std::vector<ModelEvaluation> ev1(grid.size()), ev2(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
      const MeasurementBatch noisy = apply_noise(
          split.test.measurements, channel(kind, grid[g], noise_seed(setup.seed, kind, grid[g], draw)));
      ev1[g] = evaluate_model(pair.l1, split.test.phi, noisy, split.test.signals);
      ev2[g] = evaluate_model(pair.l2, split.test.phi, noisy, split.test.signals);
    });
    for (std::size_t g = 0; g < grid.size(); ++g) {
      acc_l1[g].add(ev1[g].per_depth_db.back(), ev1[g].zero_outputs.back());
      acc_l2[g].add(ev2[g].per_depth_db.back(), ev2[g].zero_outputs.back());
    }
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    res.rows.push_back(make_row("DeepFPC-l1", param, grid[g], acc_l1[g].db, acc_l1[g].zeros));
    res.rows.push_back(make_row("DeepFPC-l2", param, grid[g], acc_l2[g].db, acc_l2[g].zeros));
  }
  return res;
}

}  // namespace

ExperimentResult run_snr_sweep(const ExperimentSetup& setup, const std::vector<double>& snr_db,
                               const std::optional<TrainedPair>& models,
                               const TrainObserver& observer) {
  return noise_sweep(setup, NoiseKind::gaussian, snr_db, models, observer);
}

ExperimentResult run_flip_sweep(const ExperimentSetup& setup, const std::vector<double>& ratios,
                                const std::optional<TrainedPair>& models,
                                const TrainObserver& observer) {
  return noise_sweep(setup, NoiseKind::flip, ratios, models, observer);
}

ExperimentResult run_algorithm_noise_comparison(const ExperimentSetup& setup,
                                                const std::vector<double>& snr_db,
                                                const std::vector<double>& ratios) {
  ExperimentResult res;
  res.experiment = "compare-fpc";
  res.seed = setup.seed;
  res.config = setup.describe();

  struct Point {
    NoiseKind kind;
    double value;
  };
  std::vector<Point> points;
  for (double s : snr_db) points.push_back({NoiseKind::gaussian, s});
  for (double r : ratios) points.push_back({NoiseKind::flip, r});
  for (const auto& p : points)
    if (p.kind == NoiseKind::flip) flip_count(p.value, setup.m);

  std::vector<Accumulator> acc1(points.size()), acc2(points.size());
  for (std::size_t draw = 0; draw < setup.phi_draws; ++draw) {
    const DataSplit split = make_split(setup, draw);
    std::vector<std::vector<double>> db1(points.size()), db2(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
      const Point& p = points[i];
      const MeasurementBatch noisy = apply_noise(
          split.test.measurements, channel(p.kind, p.value, noise_seed(setup.seed, p.kind, p.value, draw)));
      const Matrix t1 = fpc_nmse_table(split.test.phi, noisy, split.test.signals, setup.fpc_l1);
      const Matrix t2 = fpc_nmse_table(split.test.phi, noisy, split.test.signals, setup.fpc_l2);
      for (std::size_t l = 0; l < t1.rows(); ++l) {
        db1[i].push_back(t1(l, t1.cols() - 1));
        db2[i].push_back(t2(l, t2.cols() - 1));
      }
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
      acc1[i].add(db1[i], 0);
      acc2[i].add(db2[i], 0);
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string param = points[i].kind == NoiseKind::gaussian ? "snr_db" : "flip_ratio";
    res.rows.push_back(make_row("FPC-l1", param, points[i].value, acc1[i].db));
    res.rows.push_back(make_row("FPC-l2", param, points[i].value, acc2[i].db));
  }
  return res;
}

}  // namespace dfpc
