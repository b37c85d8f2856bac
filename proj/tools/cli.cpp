#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfpc/config.hpp"
#include "dfpc/dataset_io.hpp"
#include "dfpc/error.hpp"
#include "dfpc/experiments.hpp"
#include "dfpc/fpc.hpp"
#include "dfpc/kernels.hpp"
#include "dfpc/model_io.hpp"
#include "dfpc/parallel.hpp"
#include "dfpc/rng.hpp"

namespace dfpc::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kVariants{"l1", "l2"};
const std::vector<std::string> kReadouts{"final_only", "all_layers"};
const std::vector<std::string> kSignGradients{"zero", "straight_through"};

struct Runtime {
  unsigned threads = 0;
  std::string kernels = "auto";
  std::string config;
};

void add_runtime(CLI::App* sub, Runtime& rt) {
  sub->add_option("--threads", rt.threads,
                  "Worker threads; 0 reads DFPC_THREADS and falls back to 1");
  sub->add_option("--kernels", rt.kernels, "Kernel variant")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  sub->add_option("--config", rt.config,
                  "key=value file of flag values; command-line flags take precedence");
}

unsigned resolve_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DFPC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

void apply_runtime(const Runtime& rt) {
  set_worker_count(resolve_threads(rt.threads));
  kernels::select(rt.kernels);
}

// Every long option of `sub` with its effective value.
KeyValues snapshot(const CLI::App& sub) {
  KeyValues kv;
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "config") continue;
    std::string value;
    if (opt->get_expected_max() == 0)
      value = opt->count() > 0 && opt->as<bool>() ? "1" : "0";
    else
      value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
    // Unset optional values fall back to their computed defaults on replay.
    if (!value.empty()) kv[names.front()] = value;
  }
  kv["threads"] = std::to_string(worker_count());
  kv["kernels"] = kernels::active().name;
  return kv;
}

void write_run_config(const fs::path& path, const CLI::App& sub) {
  write_config_file(path, snapshot(sub),
                    {"dfpc run-config",
                     "command=" + sub.get_name(),
                     "replay: dfpc " + sub.get_name() + " --config " + path.filename().string()});
}

fs::path sibling(const fs::path& file, const std::string& suffix) {
  return fs::path(file.string() + suffix);
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// Problem, FPC and training flags shared by the experiment subcommands.
struct SetupFlags {
  ExperimentSetup setup;
  double tau_l1 = setup.fpc_l1.tau(), nu_l1 = setup.fpc_l1.nu();
  double tau_l2 = setup.fpc_l2.tau(), nu_l2 = setup.fpc_l2.nu();
  std::size_t fpc_iters = setup.fpc_l2.max_iters();
  std::string readout;
  std::string sign_gradient = "zero";
  std::size_t log_every = 0;

  ExperimentSetup resolve(bool sweep) {
    ExperimentSetup s = setup;
    s.fpc_l1 = FpcConfig::from_tau_nu(Variant::l1, tau_l1, nu_l1, fpc_iters);
    s.fpc_l2 = FpcConfig::from_tau_nu(Variant::l2, tau_l2, nu_l2, fpc_iters);
    const ReadoutLoss r = readout == "all_layers" ? ReadoutLoss::all_layers : ReadoutLoss::final_only;
    (sweep ? s.sweep_readout : s.table_readout) = r;
    s.train.backward.sign_gradient =
        sign_gradient == "zero" ? SignGradient::zero : SignGradient::straight_through;
    return s;
  }

  TrainObserver observer() const {
    if (log_every == 0) return {};
    const std::size_t every = log_every;
    return [every](const TrainRecord& r) {
      if (r.epoch % every == 0)
        std::cerr << "epoch " << r.epoch << " step " << r.step << " lr " << r.effective_lr
                  << " loss " << r.train_loss << " val_nmse_db " << r.val_nmse_db << "\n";
    };
  }
};

void add_problem(CLI::App* sub, SetupFlags& f) {
  auto& s = f.setup;
  sub->add_option("--n", s.n, "Signal dimension")->check(CLI::PositiveNumber);
  sub->add_option("--m", s.m, "Number of measurements")->check(CLI::PositiveNumber);
  sub->add_option("--k", s.k, "Sparsity")->check(CLI::PositiveNumber);
  sub->add_option("--test-pairs", s.test_pairs, "Test signals")->check(CLI::PositiveNumber);
  sub->add_option("--seed", s.seed, "Root seed");
  sub->add_option("--phi-draws", s.phi_draws, "Independent sensing matrices, results pooled")
      ->check(CLI::PositiveNumber);
}

void add_fpc(CLI::App* sub, SetupFlags& f) {
  sub->add_option("--tau-l1", f.tau_l1, "FPC-l1 step size (also DeepFPC-l1 init)");
  sub->add_option("--nu-l1", f.nu_l1, "FPC-l1 threshold tau/lambda");
  sub->add_option("--tau-l2", f.tau_l2, "FPC-l2 step size (also DeepFPC-l2 init)");
  sub->add_option("--nu-l2", f.nu_l2, "FPC-l2 threshold tau/lambda");
  sub->add_option("--fpc-iters", f.fpc_iters, "FPC iterations")->check(CLI::PositiveNumber);
}

void add_training(CLI::App* sub, SetupFlags& f, const std::string& readout_default) {
  auto& s = f.setup;
  f.readout = readout_default;
  sub->add_option("--train-pairs", s.train_pairs, "Training-set pairs (includes validation)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--layers", s.layers, "Network depth R")->check(CLI::PositiveNumber);
  sub->add_flag("--tied", s.tied, "Share one parameter set across layers");
  sub->add_option("--epochs", s.train.epochs, "Training epochs");
  sub->add_option("--batch", s.train.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  sub->add_option("--lr0", s.adam.lr0, "Initial ADAM learning rate");
  sub->add_option("--decay", s.adam.decay_rate, "Learning-rate decay rate");
  sub->add_option("--decay-every", s.adam.decay_every, "Decay period in steps")
      ->check(CLI::PositiveNumber);
  sub->add_option("--validation-fraction", s.train.validation_fraction,
                  "Share of training pairs held out for validation")
      ->check(CLI::Range(0.0, 0.99));
  sub->add_option("--resample", s.train.resample_each_epoch,
                  "Draw fresh training signals every epoch (0 cycles over the stored pairs)");
  sub->add_option("--train-size", s.train.train_size, "Fresh signals per epoch")
      ->check(CLI::PositiveNumber);
  sub->add_option("--readout", f.readout, "Training objective")->check(CLI::IsMember(kReadouts));
  sub->add_option("--sign-gradient", f.sign_gradient, "Derivative used for sign() in l1 layers")
      ->check(CLI::IsMember(kSignGradients));
  sub->add_option("--log-every", f.log_every, "Print training progress every N epochs (0: quiet)");
}

void print_summary(const ExperimentResult& r) {
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& row : r.rows) {
    std::cout << row.method << " " << row.sweep_param << "=" << format_double(row.sweep_value)
              << " mean_nmse_db=" << row.mean_db;
    if (row.zero_outputs) std::cout << " zero_outputs=" << row.zero_outputs;
    std::cout << "\n";
  }
  std::cout.unsetf(std::ios::floatfield);
}

void write_result(const fs::path& dir, const ExperimentResult& r) {
  write_samples_csv(dir / "samples.csv", r);
  write_summary_csv(dir / "summary.csv", r);
}

// Applies the optional Gaussian and flip channels, in that order.
MeasurementBatch noisy_measurements(const MeasurementBatch& clean, double snr_db, double ratio,
                                    std::uint64_t seed) {
  MeasurementBatch out = clean;
  if (snr_db != std::numeric_limits<double>::infinity())
    out = add_gaussian_noise(out, snr_db, noise_seed(seed, NoiseKind::gaussian, snr_db, 0));
  if (ratio > 0.0) out = flip_signs(out, ratio, noise_seed(seed, NoiseKind::flip, ratio, 0));
  return out;
}

// Inserts the values of a --config file ahead of the command-line flags.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path || args.size() < 2) return args;
  std::vector<std::string> out{args[0], args[1]};
  for (const auto& [k, v] : read_config_file(*path))
    if (k != "config") out.push_back("--" + k + "=" + v);
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"1-bit compressed sensing with FPC and deep-unfolded FPC networks", "dfpc"};
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::map<std::string, std::function<void(const CLI::App&)>> actions;

  // gen-data
  Runtime gd_rt;
  struct {
    std::size_t n = 100, m = 300, k = 10, l = 100, draw = 0;
    std::uint64_t seed = 7;
    std::string role = "train", out;
  } gd;
  auto* gen = app.add_subcommand("gen-data", "Generate a DFPC-DATA file");
  gen->add_option("--n", gd.n, "Signal dimension")->check(CLI::PositiveNumber);
  gen->add_option("--m", gd.m, "Number of measurements")->check(CLI::PositiveNumber);
  gen->add_option("--k", gd.k, "Sparsity")->check(CLI::PositiveNumber);
  gen->add_option("--l", gd.l, "Number of signals")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gd.seed, "Root seed");
  gen->add_option("--role", gd.role, "Signal stream; train matches the experiments' training set")
      ->check(CLI::IsMember({"train", "test", "validation"}));
  gen->add_option("--draw", gd.draw, "Sensing-matrix draw index");
  gen->add_option("--out", gd.out, "Output file")->required();
  add_runtime(gen, gd_rt);
  actions["gen-data"] = [&](const CLI::App& sub) {
    apply_runtime(gd_rt);
    const Stream stream = gd.role == "train"  ? Stream::train_signals
                          : gd.role == "test" ? Stream::test_signals
                                              : Stream::validation_signals;
    const Matrix phi = generate_sensing_matrix(gd.m, gd.n, derive_seed(gd.seed, Stream::sensing, gd.draw));
    const ProblemInstance inst = make_instance(
        phi, generate_signals(gd.n, gd.k, gd.l, derive_seed(gd.seed, stream, gd.draw)), gd.seed);
    write_dataset(gd.out, inst);
    write_run_config(sibling(gd.out, ".run-config"), sub);
    std::cout << "wrote " << gd.out << " (n=" << gd.n << " m=" << gd.m << " k=" << gd.k
              << " l=" << gd.l << ")\n";
  };

  // fpc-run
  Runtime fr_rt;
  struct {
    std::string variant = "l2", data, out;
    std::size_t iters = 150;
    std::optional<double> tau, nu;
    double snr = std::numeric_limits<double>::infinity(), flip = 0.0;
    std::uint64_t seed = 7;
    bool per_iteration = false;
  } fr;
  auto* fpc = app.add_subcommand("fpc-run", "Run FPC-l1 or FPC-l2 on a dataset");
  fpc->add_option("--variant", fr.variant, "Consistency penalty")->check(CLI::IsMember(kVariants));
  fpc->add_option("--iters", fr.iters, "Iterations")->check(CLI::PositiveNumber);
  fpc->add_option("--tau", fr.tau, "Step size (default: calibrated value of the variant)");
  fpc->add_option("--nu", fr.nu, "Threshold tau/lambda (default: calibrated value of the variant)");
  fpc->add_option("--data", fr.data, "DFPC-DATA file")->required()->check(CLI::ExistingFile);
  fpc->add_option("--out", fr.out, "Per-sample CSV; the summary goes to <out>.summary.csv")
      ->required();
  fpc->add_option("--snr", fr.snr, "Gaussian noise SNR in dB before quantization");
  fpc->add_option("--flip-ratio", fr.flip, "Share of flipped signs")->check(CLI::Range(0.0, 1.0));
  fpc->add_option("--seed", fr.seed, "Noise seed");
  fpc->add_flag("--per-iteration", fr.per_iteration, "Emit rows for every iteration");
  add_runtime(fpc, fr_rt);
  actions["fpc-run"] = [&](const CLI::App& sub) {
    apply_runtime(fr_rt);
    const Variant v = parse_variant(fr.variant);
    const FpcConfig def = FpcConfig::defaults(v);
    const FpcConfig cfg =
        FpcConfig::from_tau_nu(v, fr.tau.value_or(def.tau()), fr.nu.value_or(def.nu()), fr.iters);
    const ProblemInstance data = read_dataset(fr.data);
    const MeasurementBatch meas = noisy_measurements(data.measurements, fr.snr, fr.flip, fr.seed);
    const Matrix table = fpc_nmse_table(data.phi, meas, data.signals, cfg);
    ExperimentResult res{"fpc-run", fr.seed, snapshot(sub), {}};
    const std::string method = "FPC-" + fr.variant;
    for (std::size_t it = fr.per_iteration ? 1 : fr.iters; it <= fr.iters; ++it) {
      std::vector<double> db(table.rows());
      for (std::size_t l = 0; l < table.rows(); ++l) db[l] = table(l, it - 1);
      res.rows.push_back(make_row(method, "iterations", static_cast<double>(it), std::move(db)));
    }
    write_samples_csv(fr.out, res);
    write_summary_csv(sibling(fr.out, ".summary.csv"), res);
    write_run_config(sibling(fr.out, ".run-config"), sub);
    std::cout << method << " iterations=" << fr.iters << " mean_nmse_db=" << std::fixed
              << std::setprecision(2) << res.rows.back().mean_db << "\n";
  };

  // train
  Runtime tr_rt;
  struct {
    std::string variant = "l2", data, out, history, readout = "final_only",
                sign_gradient = "zero";
    std::size_t layers = 20, log_every = 0;
    std::optional<double> tau, nu;
    bool tied = false;
    TrainConfig train;
    AdamConfig adam;
  } tr;
  tr.train.readout = ReadoutLoss::final_only;
  auto* trn = app.add_subcommand("train", "Train a DeepFPC network on a dataset");
  trn->add_option("--variant", tr.variant, "l1 or l2")->check(CLI::IsMember(kVariants));
  trn->add_option("--layers", tr.layers, "Network depth R")->check(CLI::PositiveNumber);
  trn->add_option("--data", tr.data, "DFPC-DATA training file")->required()->check(CLI::ExistingFile);
  trn->add_option("--epochs", tr.train.epochs, "Training epochs");
  trn->add_option("--lr0", tr.adam.lr0, "Initial ADAM learning rate");
  trn->add_option("--decay", tr.adam.decay_rate, "Learning-rate decay rate");
  trn->add_option("--decay-every", tr.adam.decay_every, "Decay period in steps")
      ->check(CLI::PositiveNumber);
  trn->add_option("--batch", tr.train.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  trn->add_option("--seed", tr.train.seed, "Seed for shuffling and fresh training signals");
  trn->add_option("--tau", tr.tau, "Initial step size (default: calibrated value of the variant)");
  trn->add_option("--nu", tr.nu, "Initial threshold (default: calibrated value of the variant)");
  trn->add_flag("--tied", tr.tied, "Share one parameter set across layers");
  trn->add_option("--validation-fraction", tr.train.validation_fraction,
                  "Trailing share of the dataset held out for validation")
      ->check(CLI::Range(0.0, 0.99));
  trn->add_option("--resample", tr.train.resample_each_epoch,
                  "Draw fresh training signals every epoch (0 cycles over the dataset)");
  trn->add_option("--train-size", tr.train.train_size, "Fresh signals per epoch")
      ->check(CLI::PositiveNumber);
  trn->add_option("--readout", tr.readout, "Training objective")->check(CLI::IsMember(kReadouts));
  trn->add_option("--sign-gradient", tr.sign_gradient, "Derivative used for sign() in l1 layers")
      ->check(CLI::IsMember(kSignGradients));
  trn->add_option("--out", tr.out, "DFPC-MODEL output file")->required();
  trn->add_option("--history", tr.history, "Loss history CSV, appended (default: <out>.history.csv)");
  trn->add_option("--log-every", tr.log_every, "Print progress every N epochs (0: quiet)");
  add_runtime(trn, tr_rt);
  actions["train"] = [&](const CLI::App& sub) {
    apply_runtime(tr_rt);
    const Variant v = parse_variant(tr.variant);
    const FpcConfig def = FpcConfig::defaults(v);
    const ProblemInstance data = read_dataset(tr.data);
    UnfoldedModel model = UnfoldedModel::init(data.phi, v, tr.layers, tr.tau.value_or(def.tau()),
                                              tr.nu.value_or(def.nu()), tr.tied);
    TrainConfig cfg = tr.train;
    cfg.readout = tr.readout == "all_layers" ? ReadoutLoss::all_layers : ReadoutLoss::final_only;
    cfg.backward.sign_gradient =
        tr.sign_gradient == "zero" ? SignGradient::zero : SignGradient::straight_through;
    AdamState adam(model, tr.adam);
    const std::size_t every = tr.log_every;
    TrainResult res = train(std::move(model), data, cfg, std::move(adam),
                            [every](const TrainRecord& r) {
                              if (every && r.epoch % every == 0)
                                std::cerr << "epoch " << r.epoch << " loss " << r.train_loss
                                          << " val_nmse_db " << r.val_nmse_db << "\n";
                            });
    write_model(tr.out, res.model);
    write_history_csv(tr.history.empty() ? sibling(tr.out, ".history.csv") : fs::path(tr.history),
                      res.history, true);
    write_run_config(sibling(tr.out, ".run-config"), sub);
    std::cout << "wrote " << tr.out;
    if (!res.history.empty())
      std::cout << " (final val_nmse_db=" << std::fixed << std::setprecision(2)
                << res.history.back().val_nmse_db << ")";
    std::cout << "\n";
  };

  // eval
  Runtime ev_rt;
  struct {
    std::string model, data, out;
    double snr = std::numeric_limits<double>::infinity(), flip = 0.0;
    std::uint64_t seed = 7;
    bool all_depths = false;
  } ev;
  auto* evl = app.add_subcommand("eval", "Evaluate a trained model on a dataset");
  evl->add_option("--model", ev.model, "DFPC-MODEL file")->required()->check(CLI::ExistingFile);
  evl->add_option("--data", ev.data, "DFPC-DATA file")->required()->check(CLI::ExistingFile);
  evl->add_option("--out", ev.out, "Per-sample CSV; the summary goes to <out>.summary.csv")
      ->required();
  evl->add_option("--snr", ev.snr, "Gaussian noise SNR in dB before quantization");
  evl->add_option("--flip-ratio", ev.flip, "Share of flipped signs")->check(CLI::Range(0.0, 1.0));
  evl->add_option("--seed", ev.seed, "Noise seed");
  evl->add_flag("--all-depths", ev.all_depths, "Report the readout after every layer");
  add_runtime(evl, ev_rt);
  actions["eval"] = [&](const CLI::App& sub) {
    apply_runtime(ev_rt);
    const UnfoldedModel model = read_model(ev.model);
    const ProblemInstance data = read_dataset(ev.data);
    const MeasurementBatch meas = noisy_measurements(data.measurements, ev.snr, ev.flip, ev.seed);
    const ModelEvaluation e = evaluate_model(model, data.phi, meas, data.signals, ev.all_depths);
    ExperimentResult res{"eval", ev.seed, snapshot(sub), {}};
    const std::string method = "DeepFPC-" + std::string(to_string(model.variant()));
    const std::size_t first = ev.all_depths ? 1 : model.depth();
    for (std::size_t d = first; d <= model.depth(); ++d)
      res.rows.push_back(make_row(method, "layers", static_cast<double>(d),
                                  e.per_depth_db[d - first], e.zero_outputs[d - first]));
    write_samples_csv(ev.out, res);
    write_summary_csv(sibling(ev.out, ".summary.csv"), res);
    write_run_config(sibling(ev.out, ".run-config"), sub);
    print_summary(res);
  };

  // table1
  Runtime t1_rt;
  SetupFlags t1;
  std::string t1_out;
  auto* tab = app.add_subcommand("table1", "FPC-l2 per iteration against DeepFPC-l2 per layer");
  add_problem(tab, t1);
  add_fpc(tab, t1);
  add_training(tab, t1, "all_layers");
  tab->add_flag("--retrain-per-depth", t1.setup.retrain_per_depth,
                "Train a separate network for every depth");
  tab->add_option("--out", t1_out, "Output directory")->required();
  add_runtime(tab, t1_rt);
  actions["table1"] = [&](const CLI::App& sub) {
    apply_runtime(t1_rt);
    const ExperimentSetup setup = t1.resolve(false);
    const fs::path dir = prepare_dir(t1_out);
    const Table1Output out = run_table1(setup, t1.observer());
    write_table1_csv(dir / "table1.csv", out.result);
    write_result(dir, out.result);
    write_history_csv(dir / "history.csv", out.history);
    if (out.models.size() == 1) {
      write_model(dir / "deepfpc_l2.model", out.models.front());
    } else {
      for (const auto& m : out.models)
        write_model(dir / ("deepfpc_l2_R" + std::to_string(m.depth()) + ".model"), m);
    }
    write_run_config(dir / "run-config", sub);
    print_summary(out.result);
  };

  // sweep-snr and sweep-flip
  struct SweepCmd {
    Runtime rt;
    SetupFlags flags;
    std::string grid, out, model_l1, model_l2;
  };
  SweepCmd ss, sf;
  auto add_sweep = [&](const std::string& name, const std::string& help, SweepCmd& c,
                       const std::string& grid_flag, const std::string& grid_help,
                       std::vector<double> grid, bool gaussian) {
    auto* sub = app.add_subcommand(name, help);
    add_problem(sub, c.flags);
    add_fpc(sub, c.flags);
    add_training(sub, c.flags, "final_only");
    std::string def;
    for (double v : grid) def += (def.empty() ? "" : ",") + format_double(v);
    c.grid = def;
    sub->add_option(grid_flag, c.grid, grid_help);
    auto* m1 = sub->add_option("--model-l1", c.model_l1, "Pre-trained DeepFPC-l1 model")
                   ->check(CLI::ExistingFile);
    auto* m2 = sub->add_option("--model-l2", c.model_l2, "Pre-trained DeepFPC-l2 model")
                   ->check(CLI::ExistingFile);
    m1->needs(m2);
    m2->needs(m1);
    sub->add_option("--out", c.out, "Output directory")->required();
    add_runtime(sub, c.rt);
    actions[name] = [&c, gaussian](const CLI::App& s) {
      apply_runtime(c.rt);
      const ExperimentSetup setup = c.flags.resolve(true);
      const std::vector<double> grid = parse_double_list(c.grid);
      const fs::path dir = prepare_dir(c.out);
      std::optional<TrainedPair> pair;
      if (!c.model_l1.empty()) {
        pair = TrainedPair{read_model(fs::path(c.model_l1)), read_model(fs::path(c.model_l2))};
        if (pair->l1.variant() != Variant::l1 || pair->l2.variant() != Variant::l2)
          throw InvalidArgument("--model-l1/--model-l2 hold the wrong variants");
      } else if (setup.phi_draws == 1) {
        pair = train_pair(setup, make_split(setup, 0), c.flags.observer());
        write_model(dir / "deepfpc_l1.model", pair->l1);
        write_model(dir / "deepfpc_l2.model", pair->l2);
      }
      const ExperimentResult res = gaussian ? run_snr_sweep(setup, grid, pair, c.flags.observer())
                                            : run_flip_sweep(setup, grid, pair, c.flags.observer());
      write_result(dir, res);
      write_run_config(dir / "run-config", s);
      print_summary(res);
    };
  };
  add_sweep("sweep-snr", "DeepFPC-l1 and DeepFPC-l2 under Gaussian pre-quantization noise", ss,
            "--snr", "Comma-separated SNR grid in dB", default_snr_grid(), true);
  add_sweep("sweep-flip", "DeepFPC-l1 and DeepFPC-l2 under random sign flips", sf, "--ratios",
            "Comma-separated flip-ratio grid", default_flip_grid(), false);

  // compare-fpc
  Runtime cf_rt;
  SetupFlags cf;
  std::string cf_snr = "inf,20,25,30,35,40", cf_ratios, cf_out;
  for (double v : default_flip_grid()) cf_ratios += (cf_ratios.empty() ? "" : ",") + format_double(v);
  auto* cmp = app.add_subcommand("compare-fpc", "Classical FPC-l1 against FPC-l2 under both channels");
  add_problem(cmp, cf);
  add_fpc(cmp, cf);
  cmp->add_option("--snr", cf_snr, "Comma-separated SNR grid in dB");
  cmp->add_option("--ratios", cf_ratios, "Comma-separated flip-ratio grid");
  cmp->add_option("--out", cf_out, "Output directory")->required();
  add_runtime(cmp, cf_rt);
  actions["compare-fpc"] = [&](const CLI::App& sub) {
    apply_runtime(cf_rt);
    const ExperimentSetup setup = cf.resolve(true);
    const fs::path dir = prepare_dir(cf_out);
    const ExperimentResult res = run_algorithm_noise_comparison(
        setup, parse_double_list(cf_snr), parse_double_list(cf_ratios));
    write_result(dir, res);
    write_run_config(dir / "run-config", sub);
    print_summary(res);
  };

  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    try {
      actions.at(sub->get_name())(*sub);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace dfpc::cli
