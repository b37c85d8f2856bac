#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dfpc/model_core.hpp"
#include "dfpc/unfolded.hpp"

namespace dfpc {

enum class SignGradient { zero, straight_through };

struct BackwardOptions {
  // Derivative used for sign(.) in the l1 layer. straight_through passes the
  // gradient where |B x| <= 1.
  SignGradient sign_gradient = SignGradient::zero;
};

/// Gradients shaped like a model's parameter sets.
struct Gradients {
  std::vector<LayerParams> sets;

  static Gradients zeros_like(const UnfoldedModel& model);
  bool all_zero() const;
};

/// Upstream gradient with respect to the normalized readout after `depth` layers.
struct ReadoutGradient {
  std::size_t depth;
  Matrix grad;  // L x n
};

// Reverse-mode gradients of the parameters given upstream gradients at one
// or more normalized readouts. Kinks take a zero subgradient.
Gradients backward(const UnfoldedModel& model, const ForwardCache& cache,
                   std::span<const ReadoutGradient> upstream, const BackwardOptions& opts = {});

// Single readout after the last layer.
Gradients backward(const UnfoldedModel& model, const ForwardCache& cache, const Matrix& upstream,
                   const BackwardOptions& opts = {});

// |xstar - truth|^2; equals the linear NMSE for unit-norm truth.
double loss(std::span<const double> xstar, std::span<const double> truth);

struct AdamConfig {
  double lr0 = 1e-3;
  double decay_rate = 0.9;
  std::size_t decay_every = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(const UnfoldedModel& model, AdamConfig cfg);

  std::size_t step() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  // lr0 * decay_rate^(step / decay_every), continuous in step.
  double effective_lr() const;

  // One update; clamps every nu to >= 0 afterwards.
  void apply(UnfoldedModel& model, const Gradients& grads);

 private:
  AdamConfig cfg_;
  std::size_t step_ = 0;
  std::vector<LayerParams> first_;
  std::vector<LayerParams> second_;
};

enum class ReadoutLoss {
  final_only,  // loss on the output of the last layer
  all_layers,  // mean loss over the normalized readouts of every depth
};

struct TrainConfig {
  std::size_t epochs = 600;
  std::size_t batch_size = 25;
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
  // Draw train_size fresh signals (through the dataset's Phi) every epoch
  // instead of cycling over the dataset's own pairs.
  bool resample_each_epoch = true;
  std::size_t train_size = 100;
  ReadoutLoss readout = ReadoutLoss::all_layers;
  BackwardOptions backward;
};

struct TrainRecord {
  std::size_t step;
  std::size_t epoch;
  double effective_lr;
  double train_loss;
  double val_nmse_db;
};

struct TrainResult {
  UnfoldedModel model;
  std::vector<TrainRecord> history;
};

using TrainObserver = std::function<void(const TrainRecord&)>;

TrainResult train(UnfoldedModel model, const ProblemInstance& dataset, const TrainConfig& cfg,
                  AdamState adam, const TrainObserver& observer = {});

// Mean batch loss of the configured readout objective; exposed for gradient checks.
double objective(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0,
                 const Matrix& truth, ReadoutLoss readout);

}  // namespace dfpc
