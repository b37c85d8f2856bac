#pragma once

// Deep-unfolded FPC networks. Layer r maps x to
//
//   l2:  S_nu_r( x + A_r (y .* relu(y .* (Bbar_r x))) )
//   l1:  S_nu_r( x + A_r (y - sign(B_r x)) )
//
// with a shortcut from x into every layer and a single normalization after
// the last layer. Batches hold one sample per row.

#include <cstddef>
#include <span>
#include <vector>

#include "dfpc/fpc.hpp"
#include "dfpc/matrix.hpp"

namespace dfpc {

struct LayerParams {
  Matrix a;     // n x m, initialized to tau Phi^T
  Matrix bbar;  // m x n, -Phi for l2, Phi for l1
  double nu = 0.0;
};

class UnfoldedModel {
 public:
  UnfoldedModel(Variant variant, std::size_t depth, bool tied, std::vector<LayerParams> params);

  // Every layer starts from the algorithm's matrices, so the untrained
  // network is the truncated iteration without intermediate renormalization.
  static UnfoldedModel init(const Matrix& phi, Variant variant, std::size_t depth, double tau,
                            double nu0, bool tied);

  Variant variant() const noexcept { return variant_; }
  std::size_t depth() const noexcept { return depth_; }
  bool tied() const noexcept { return tied_; }
  std::size_t n() const noexcept { return params_.front().a.rows(); }
  std::size_t m() const noexcept { return params_.front().a.cols(); }

  // Parameters used by layer r (0-based). Tied models alias one set.
  const LayerParams& layer(std::size_t r) const { return params_[tied_ ? 0 : r]; }
  LayerParams& layer(std::size_t r) { return params_[tied_ ? 0 : r]; }

  std::span<const LayerParams> parameter_sets() const noexcept { return params_; }
  std::span<LayerParams> parameter_sets() noexcept { return params_; }

  // First `depth` layers as a standalone (untied-if-untied) model.
  UnfoldedModel truncated(std::size_t depth) const;

 private:
  Variant variant_;
  std::size_t depth_;
  bool tied_;
  std::vector<LayerParams> params_;
};

/// Per-layer activations of a batched forward pass, kept for backprop.
struct ForwardCache {
  Matrix signs;                   // L x m
  std::vector<Matrix> inputs;     // x^(r), r = 0..R-1, L x n
  std::vector<Matrix> pre_act;    // Bbar_r x^(r), L x m
  std::vector<Matrix> corrections;  // l2: y .* relu(y .* pre_act); l1: y - sign(pre_act)
  std::vector<Matrix> pre_shrink;   // x^(r) + A_r correction, L x n
  Matrix output;                  // x^(R), unnormalized

  std::size_t depth() const noexcept { return inputs.size(); }
  std::size_t batch() const noexcept { return signs.rows(); }
  // Unnormalized x^(r) for r in 1..R.
  const Matrix& layer_output(std::size_t r) const;
};

// Batched pass that never throws on a zero output; zero rows stay zero.
ForwardCache forward_cache(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0);

// Normalized readout after `depth` layers (1..R). Zero rows are left at zero
// and, when `zero_rows` is given, their indices are appended to it.
Matrix readout(const ForwardCache& cache, std::size_t depth,
               std::vector<std::size_t>* zero_rows = nullptr);

struct SingleForward {
  Vector xstar;
  ForwardCache cache;
};

// One sample through the network using per-sample matrix-vector products.
SingleForward forward_single(const UnfoldedModel& model, std::span<const double> y,
                             std::span<const double> x0);

// All columns at once. Throws ZeroOutput naming the first zero column.
Matrix forward_batched(const UnfoldedModel& model, const Matrix& signs, const Matrix& x0);

// Reference path that materializes diag(y_l) for every sample. Used only to
// benchmark the batched pass.
Matrix forward_serial_diagonal(const UnfoldedModel& model, const Matrix& signs,
                               const Matrix& x0);

// Backprojection start for every row of a sign batch.
Matrix backprojection_batch(const Matrix& phi, const Matrix& signs);

/// Explicitly replicated operands of the batched layer.
///
/// Y_ex ((m*L) x n): row l*m + i is constant y_li.
/// B_ex ((m*L) x n): Bbar stacked L times.
/// X_ex (n x (m*L)): column l*m + i is x_l.
struct ExtendedBatch {
  Matrix y_ex;
  Matrix b_ex;
  Matrix x_ex;
  std::size_t m = 0;
  std::size_t batch = 0;
};

ExtendedBatch build_extended(const Matrix& signs, const Matrix& bbar, const Matrix& x);

// Y_ex (.) B_ex: the stacked blocks diag(y_l) Bbar.
Matrix extended_hadamard(const ExtendedBatch& ext);

// Rows of (Y_ex (.) B_ex) summed against X_ex and reshaped to L x m, i.e.
// y_l .* (Bbar x_l) for every l.
Matrix extended_products(const ExtendedBatch& ext);

}  // namespace dfpc
