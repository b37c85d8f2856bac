// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dfpc/experiments.hpp"
#include "dfpc/fpc.hpp"
#include "dfpc/parallel.hpp"
#include "dfpc/unfolded.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace dfpc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double column_mean(const Matrix& table, std::size_t col) {
  std::vector<double> v(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) v[r] = table(r, col);
  return mean_db(v);
}

void fpc_baseline(const ExperimentSetup& setup, double& fpc150) {
  const auto t0 = Clock::now();
  const DataSplit split = make_split(setup);
  FpcConfig cfg = setup.fpc_l2;
  cfg.with_iters(150);
  const Matrix table =
      fpc_nmse_table(split.test.phi, split.test.measurements, split.test.signals, cfg);
  const double secs = seconds_since(t0);
  fpc150 = column_mean(table, 149);
  std::ostringstream d1;
  d1 << "FPC-l2@150 " << fmt("%.2f", fpc150) << " dB (target -14.39 +-2), " << fmt("%.2f", secs)
     << " s";
  report(1, std::abs(fpc150 - -14.39) <= 2.0 && secs < 30.0, d1.str());

  const double it1 = column_mean(table, 0);
  const double it20 = column_mean(table, 19);
  bool monotone = true;
  for (std::size_t i = 1; i < 20; ++i)
    if (column_mean(table, i) > column_mean(table, i - 1) + 0.2) monotone = false;
  std::ostringstream d2;
  d2 << "iter1 " << fmt("%.2f", it1) << " (-4.53 +-2), iter20 " << fmt("%.2f", it20)
     << " (-7.55 +-2), decreasing within 0.2 dB: " << (monotone ? "yes" : "no");
  report(2, std::abs(it1 - -4.53) <= 2.0 && std::abs(it20 - -7.55) <= 2.0 && monotone, d2.str());
}

void table1_claims(const ExperimentSetup& setup, double fpc150) {
  const auto t0 = Clock::now();
  const Table1Output out = run_table1(setup);
  const double secs = seconds_since(t0);
  const double deep20 = out.result.find("DeepFPC-l2", 20).mean_db;
  std::ostringstream d3;
  d3 << "DeepFPC-l2@20 " << fmt("%.2f", deep20) << " dB, FPC-l2@150 " << fmt("%.2f", fpc150)
     << " dB, margin " << fmt("%.2f", fpc150 - deep20) << " dB, train+eval " << fmt("%.1f", secs)
     << " s";
  report(3, deep20 <= -14.5 && fpc150 - deep20 >= 1.0 && secs < 600.0, d3.str());

  std::size_t reached = 0;
  for (std::size_t r = 1; r <= setup.layers; ++r)
    if (out.result.find("DeepFPC-l2", static_cast<double>(r)).mean_db <= fpc150) {
      reached = r;
      break;
    }
  std::ostringstream d4;
  if (reached == 0)
    d4 << "FPC-l2@150 level never reached";
  else
    d4 << "FPC-l2@150 level reached at layer " << reached << " ("
       << fmt("%.2f", out.result.find("DeepFPC-l2", static_cast<double>(reached)).mean_db)
       << " dB)";
  report(4, reached != 0 && reached <= 10, d4.str());
}

void robustness(const ExperimentSetup& setup) {
  const DataSplit split = make_split(setup);
  const TrainedPair pair = train_pair(setup, split);

  const std::vector<double> ratios{0.05, 0.10, 0.20, 0.30};
  const ExperimentResult flips = run_flip_sweep(setup, ratios, pair);
  bool ok5 = true;
  std::ostringstream d5;
  for (double r : ratios) {
    const double l1 = flips.find("DeepFPC-l1", r).mean_db;
    const double l2 = flips.find("DeepFPC-l2", r).mean_db;
    ok5 = ok5 && l2 <= l1;
    d5 << "ratio " << r << ": l2 " << fmt("%.2f", l2) << " vs l1 " << fmt("%.2f", l1) << "; ";
  }
  report(5, ok5, d5.str());

  const std::vector<double> snrs = default_snr_grid();
  const ExperimentResult snr = run_snr_sweep(setup, snrs, pair);
  bool ok6 = true;
  std::ostringstream d6;
  for (double s : snrs) {
    const double l1 = snr.find("DeepFPC-l1", s).mean_db;
    const double l2 = snr.find("DeepFPC-l2", s).mean_db;
    ok6 = ok6 && l2 <= l1;
    d6 << s << " dB: l2 " << fmt("%.2f", l2) << " vs l1 " << fmt("%.2f", l1) << "; ";
  }
  report(6, ok6, d6.str());
}

void batched_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240607);
  std::uniform_int_distribution<std::size_t> pick_n(5, 40), pick_ratio(2, 4), pick_depth(1, 6),
      pick_batch(10, 40);
  std::size_t instances = 0;
  double worst = 0.0;
  while (instances < 1000) {
    const std::size_t n = pick_n(rng), m = n * pick_ratio(rng), depth = pick_depth(rng);
    const std::size_t batch = std::min<std::size_t>(pick_batch(rng), 1000 - instances);
    const Variant v = rng() % 2 ? Variant::l2 : Variant::l1;
    const bool tied = rng() % 4 == 0;
    const Matrix phi = generate_sensing_matrix(m, n, rng());
    UnfoldedModel model = UnfoldedModel::init(phi, v, depth, v == Variant::l2 ? 0.5 : 0.05,
                                              0.0015, tied);
    oracle::perturb(model, rng, 0.01, 0.002);
    const ProblemInstance inst =
        make_instance(phi, generate_signals(n, std::max<std::size_t>(1, n / 10), batch, rng()), 0);
    const Matrix x0 = backprojection_batch(phi, inst.measurements.signs);
    Matrix out;
    try {
      out = forward_batched(model, inst.measurements.signs, x0);
    } catch (const ZeroOutput&) {
      continue;
    }
    for (std::size_t l = 0; l < batch; ++l) {
      const SingleForward s = forward_single(model, inst.measurements.signs.row(l), x0.row(l));
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(s.xstar[i] - out(l, i)));
    }
    instances += batch;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << instances << " instances, max |batched - single| " << fmt("%.3g", worst) << ", "
    << fmt("%.2f", secs) << " s";
  report(7, worst <= 1e-10 && secs < 10.0, d.str());
}

void gradient_suite() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (Variant v : {Variant::l2, Variant::l1})
    for (std::size_t depth = 1; depth <= 3; ++depth) {
      const gradcheck::Report rep =
          gradcheck::check_fd(v, depth, ReadoutLoss::final_only, 120, 1000 + depth);
      ok = ok && rep.ok() && rep.checked >= 100;
      d << to_string(v) << " R=" << depth << ": " << rep.mismatches.size() << "/" << rep.checked
        << " mismatches, margin " << fmt("%.1e", rep.margin) << "; ";
    }
  const double secs = seconds_since(t0);
  d << fmt("%.2f", secs) << " s";
  report(8, ok && secs < 60.0, d.str());
}

void untrained_equivalence(const ExperimentSetup& setup) {
  const DataSplit split = make_split(setup);
  FpcConfig cfg = setup.fpc_l2;
  cfg.with_iters(20);
  cfg.renormalize_each_iter = false;
  const UnfoldedModel model =
      UnfoldedModel::init(split.test.phi, Variant::l2, 20, cfg.tau(), cfg.nu(), false);
  const Matrix& signs = split.test.measurements.signs;
  const Matrix x0 = backprojection_batch(split.test.phi, signs);
  const Matrix net = forward_batched(model, signs, x0);
  double worst = 0.0;
  for (std::size_t l = 0; l < signs.rows(); ++l) {
    const FpcTrace t = fpc_solve(split.test.phi, signs.row(l), cfg);
    for (std::size_t i = 0; i < net.cols(); ++i)
      worst = std::max(worst, std::abs(t.final_estimate()[i] - net(l, i)));
  }
  std::ostringstream d;
  d << signs.rows() << " instances, max |network - FPC| " << fmt("%.3g", worst);
  report(9, signs.rows() >= 100 && worst <= 1e-10, d.str());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("dfpc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool ok = true;
  std::ostringstream d;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + DFPC_CLI_PATH +
                            "\" table1 --threads 1 --seed 7 --epochs 30 --out \"" +
                            (root / run).string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      ok = false;
      d << "run " << run << " exited with " << rc << "; ";
    }
  }
  for (const char* f : {"table1.csv", "samples.csv", "summary.csv", "history.csv"}) {
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    d << f << (same ? " identical" : " DIFFERS") << "; ";
  }
  fs::remove_all(root);
  report(10, ok, d.str());
}

}  // namespace

int main() {
  set_worker_count(1);
  const ExperimentSetup setup;
  double fpc150 = 0.0;
  fpc_baseline(setup, fpc150);
  table1_claims(setup, fpc150);
  robustness(setup);
  batched_oracle();
  gradient_suite();
  untrained_equivalence(setup);
  cli_determinism();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
