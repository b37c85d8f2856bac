#pragma once

// Reproduction harness: iteration/depth table, SNR and flip-ratio sweeps,
// and the classical FPC noise comparison.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfpc/config.hpp"
#include "dfpc/fpc.hpp"
#include "dfpc/model_core.hpp"
#include "dfpc/training.hpp"
#include "dfpc/unfolded.hpp"

namespace dfpc {

struct ExperimentSetup {
  std::size_t n = 100;
  std::size_t m = 300;
  std::size_t k = 10;
  std::size_t train_pairs = 100;
  std::size_t test_pairs = 100;
  std::uint64_t seed = 7;
  std::size_t phi_draws = 1;

  FpcConfig fpc_l1 = FpcConfig::defaults(Variant::l1);
  FpcConfig fpc_l2 = FpcConfig::defaults(Variant::l2);

  std::size_t layers = 20;
  bool tied = false;
  TrainConfig train;
  AdamConfig adam;
  // Readout objective for the depth table and for the noise sweeps.
  ReadoutLoss table_readout = ReadoutLoss::all_layers;
  ReadoutLoss sweep_readout = ReadoutLoss::final_only;
  bool retrain_per_depth = false;

  KeyValues describe() const;
};

/// Train/test instances sharing one sensing matrix, from disjoint streams.
struct DataSplit {
  ProblemInstance train;
  ProblemInstance test;
};
DataSplit make_split(const ExperimentSetup& setup, std::size_t draw = 0);

struct ResultRow {
  std::string method;
  std::string sweep_param;
  double sweep_value = 0.0;
  std::vector<double> per_sample_db;
  double mean_db = 0.0;
  std::size_t zero_outputs = 0;
};

struct ExperimentResult {
  std::string experiment;
  std::uint64_t seed = 0;
  KeyValues config;
  std::vector<ResultRow> rows;

  const ResultRow& find(const std::string& method, double sweep_value) const;
};

ResultRow make_row(std::string method, std::string sweep_param, double sweep_value,
                   std::vector<double> per_sample_db, std::size_t zero_outputs = 0);

/// Per-sample NMSE of a model's normalized readout. A zero output counts as
/// the all-zero estimate (0 dB) and is tallied in zero_outputs.
struct ModelEvaluation {
  std::vector<std::vector<double>> per_depth_db;  // [depth-1][sample]
  std::vector<std::size_t> zero_outputs;          // per depth
};
ModelEvaluation evaluate_model(const UnfoldedModel& model, const Matrix& phi,
                               const MeasurementBatch& measurements, const SignalBatch& truth,
                               bool all_depths = false);

struct Table1Output {
  ExperimentResult result;
  std::vector<UnfoldedModel> models;  // one, or one per depth with retrain_per_depth
  std::vector<TrainRecord> history;   // of the deepest model
};

Table1Output run_table1(const ExperimentSetup& setup, const TrainObserver& observer = {});

struct TrainedPair {
  UnfoldedModel l1;
  UnfoldedModel l2;
};

// Trains DeepFPC-l1 and DeepFPC-l2 on clean data with the sweep objective.
TrainedPair train_pair(const ExperimentSetup& setup, const DataSplit& split,
                       const TrainObserver& observer = {});

UnfoldedModel train_network(const ExperimentSetup& setup, const DataSplit& split, Variant variant,
                            std::size_t depth, ReadoutLoss readout,
                            const TrainObserver& observer = {},
                            std::vector<TrainRecord>* history = nullptr);

ExperimentResult run_snr_sweep(const ExperimentSetup& setup, const std::vector<double>& snr_db,
                               const std::optional<TrainedPair>& models = std::nullopt,
                               const TrainObserver& observer = {});
ExperimentResult run_flip_sweep(const ExperimentSetup& setup, const std::vector<double>& ratios,
                                const std::optional<TrainedPair>& models = std::nullopt,
                                const TrainObserver& observer = {});

ExperimentResult run_algorithm_noise_comparison(const ExperimentSetup& setup,
                                                const std::vector<double>& snr_db,
                                                const std::vector<double>& ratios);

// Noise seed for a given channel and grid value; shared by every method.
std::uint64_t noise_seed(std::uint64_t seed, NoiseKind kind, double value, std::size_t draw);

std::vector<double> default_snr_grid();
std::vector<double> default_flip_grid();

// CSV output. Samples: experiment,method,sweep_param,sweep_value,seed,sample_index,nmse_db.
// Summary: experiment,method,sweep_param,sweep_value,seed,mean_nmse_db,n_samples.
void write_samples_csv(const std::filesystem::path& path, const ExperimentResult& r);
void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& r);
// depth,fpc_l2_nmse_db,deepfpc_l2_nmse_db
void write_table1_csv(const std::filesystem::path& path, const ExperimentResult& r);
// step,epoch,effective_lr,train_loss,val_nmse_db
void write_history_csv(const std::filesystem::path& path, const std::vector<TrainRecord>& h,
                       bool append = false);

}  // namespace dfpc
