#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfpc {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidState : std::logic_error {
  using std::logic_error::logic_error;
};

// Every entry of u vanished after shrinkage, so renormalization is undefined.
struct ShrinkageCollapse : std::runtime_error {
  explicit ShrinkageCollapse(std::size_t iteration)
      : std::runtime_error("shrinkage-collapse at iteration " + std::to_string(iteration) +
                           " (threshold nu too large)"),
        iteration(iteration) {}
  std::size_t iteration;
};

struct ZeroOutput : std::runtime_error {
  explicit ZeroOutput(std::size_t column)
      : std::runtime_error("zero-output in column " + std::to_string(column) +
                           " (final normalization undefined)"),
        column(column) {}
  std::size_t column;
};

struct Divergence : std::runtime_error {
  Divergence(std::size_t step, double effective_lr)
      : std::runtime_error("divergence: non-finite loss at step " + std::to_string(step) +
                           " (effective lr " + std::to_string(effective_lr) + ")"),
        step(step),
        effective_lr(effective_lr) {}
  std::size_t step;
  double effective_lr;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dfpc
