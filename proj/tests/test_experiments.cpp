#include <doctest.h>

#include <limits>
#include <set>

#include "dfpc/error.hpp"
#include "dfpc/experiments.hpp"
#include "dfpc/parallel.hpp"

using namespace dfpc;

namespace {

ExperimentSetup tiny() {
  ExperimentSetup s;
  s.n = 20;
  s.m = 60;
  s.k = 3;
  s.train_pairs = 20;
  s.test_pairs = 12;
  s.layers = 3;
  s.train.epochs = 4;
  s.train.batch_size = 5;
  s.train.train_size = 20;
  s.fpc_l1.with_iters(30);
  s.fpc_l2.with_iters(30);
  return s;
}

void check_same(const ExperimentResult& a, const ExperimentResult& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].method == b.rows[i].method);
    CHECK(a.rows[i].sweep_value == b.rows[i].sweep_value);
    CHECK(a.rows[i].per_sample_db == b.rows[i].per_sample_db);
  }
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("split: shared Phi, disjoint signals") {
    const DataSplit s = make_split(tiny());
    CHECK(s.train.phi == s.test.phi);
    std::set<std::vector<double>> train;
    for (std::size_t l = 0; l < s.train.signals.count(); ++l) {
      const auto r = s.train.signals.signal(l);
      train.emplace(r.begin(), r.end());
    }
    for (std::size_t l = 0; l < s.test.signals.count(); ++l) {
      const auto r = s.test.signals.signal(l);
      CHECK(train.count(std::vector<double>(r.begin(), r.end())) == 0);
    }
    CHECK(make_split(tiny(), 1).train.phi != s.train.phi);
  }

  TEST_CASE("zero network output counts as the zero estimate") {
    const DataSplit s = make_split(tiny());
    UnfoldedModel m = UnfoldedModel::init(s.test.phi, Variant::l2, 2, 0.5, 100.0, false);
    const ModelEvaluation ev = evaluate_model(m, s.test.phi, s.test.measurements, s.test.signals, true);
    REQUIRE(ev.per_depth_db.size() == 2);
    CHECK(ev.zero_outputs[1] == s.test.signals.count());
    for (double db : ev.per_depth_db[1]) CHECK(db == 0.0);
  }

  TEST_CASE("table1: rows, dB means, determinism") {
    const ExperimentSetup s = tiny();
    const Table1Output a = run_table1(s);
    const Table1Output b = run_table1(s);
    check_same(a.result, b.result);
    // Iterations 1..3 plus the final iteration, and layers 1..3.
    CHECK(a.result.rows.size() == 3 + 1 + 3);
    for (const auto& row : a.result.rows) {
      CHECK(row.per_sample_db.size() == s.test_pairs);
      CHECK(row.mean_db == mean_db(row.per_sample_db));
    }
    CHECK(a.result.find("FPC-l2", 30.0).sweep_param == "iterations");
    CHECK(a.result.find("DeepFPC-l2", 2.0).sweep_param == "layers");
    CHECK_THROWS_AS(a.result.find("DeepFPC-l2", 9.0), InvalidArgument);
    CHECK(a.history.size() == s.train.epochs);
    CHECK(a.result.config.at("nmse_aggregation") == "db_mean");

    ExperimentSetup per_depth = s;
    per_depth.retrain_per_depth = true;
    const Table1Output c = run_table1(per_depth);
    CHECK(c.models.size() == 3);
    CHECK(c.models[1].depth() == 2);
  }

  TEST_CASE("sweeps: clean limits equal the noiseless evaluation; worker count is irrelevant") {
    const ExperimentSetup s = tiny();
    const DataSplit split = make_split(s);
    const TrainedPair pair = train_pair(s, split);
    const double inf = std::numeric_limits<double>::infinity();
    const ExperimentResult snr = run_snr_sweep(s, {inf, 25.0}, pair);
    const ExperimentResult flip = run_flip_sweep(s, {0.0, 0.1}, pair);
    const ModelEvaluation c1 = evaluate_model(pair.l1, split.test.phi, split.test.measurements, split.test.signals);
    const ModelEvaluation c2 = evaluate_model(pair.l2, split.test.phi, split.test.measurements, split.test.signals);
    CHECK(snr.find("DeepFPC-l1", inf).per_sample_db == c1.per_depth_db.back());
    CHECK(snr.find("DeepFPC-l2", inf).per_sample_db == c2.per_depth_db.back());
    CHECK(flip.find("DeepFPC-l1", 0.0).per_sample_db == c1.per_depth_db.back());
    CHECK(flip.find("DeepFPC-l2", 0.0).per_sample_db == c2.per_depth_db.back());

    set_worker_count(3);
    const ExperimentResult flip3 = run_flip_sweep(s, {0.0, 0.1}, pair);
    set_worker_count(1);
    check_same(flip, flip3);

    // Without models the sweep trains its own pair from the same seed.
    check_same(run_flip_sweep(s, {0.0, 0.1}), flip);

    ExperimentSetup draws = s;
    draws.phi_draws = 2;
    CHECK(run_flip_sweep(draws, {0.1}).rows.front().per_sample_db.size() == 2 * s.test_pairs);
    CHECK_THROWS_AS(run_flip_sweep(draws, {0.1}, pair), InvalidArgument);
    CHECK_THROWS_AS(run_flip_sweep(s, {1.5}, pair), InvalidArgument);
  }

  TEST_CASE("classical FPC comparison: clean channels coincide and both recover") {
    const ExperimentSetup s;  // reference setup
    const double inf = std::numeric_limits<double>::infinity();
    const ExperimentResult r = run_algorithm_noise_comparison(s, {inf}, {0.0});
    for (const char* m : {"FPC-l1", "FPC-l2"}) {
      const auto& g = r.rows[std::string(m) == "FPC-l1" ? 0 : 1];
      const auto& f = r.rows[std::string(m) == "FPC-l1" ? 2 : 3];
      CHECK(g.method == m);
      CHECK(f.method == m);
      CHECK(g.sweep_param == "snr_db");
      CHECK(f.sweep_param == "flip_ratio");
      CHECK(g.per_sample_db == f.per_sample_db);
      CHECK(g.mean_db <= -10.0);
    }
  }

  // Recorded rather than required: with the calibrated per-variant step sizes
  // FPC-l1 ends below FPC-l2 on this setup, and with identical step sizes
  // FPC-l1 does not recover at all.
  TEST_CASE("classical FPC comparison: l2 at or below l1 under moderate noise" *
            doctest::may_fail()) {
    const ExperimentSetup s;
    const ExperimentResult r = run_algorithm_noise_comparison(s, {25.0}, {0.05});
    for (double v : {25.0, 0.05}) {
      CAPTURE(v);
      MESSAGE("FPC-l1 " << r.find("FPC-l1", v).mean_db << " dB, FPC-l2 "
                        << r.find("FPC-l2", v).mean_db << " dB");
      CHECK(r.find("FPC-l2", v).mean_db <= r.find("FPC-l1", v).mean_db);
    }
  }
}
