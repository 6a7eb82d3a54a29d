#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tgclstm/matrix.hpp"

namespace tgclstm {

/// RMSProp hyperparameters. Defaults are the published training recipe.
struct OptimizerConfig {
  double learning_rate = 1e-5;
  double alpha = 0.99;
  double epsilon = 1e-8;

  void validate() const;
};

/// A trainable matrix with its gradient accumulator, RMSProp state and an
/// optional {0,1} support mask. Off-support values are kept at exactly zero.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Matrix value);
  Parameter(std::string name, Matrix value, Matrix mask);

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix rms;
  std::optional<Matrix> mask;

  std::size_t rows() const noexcept { return value.rows(); }
  std::size_t cols() const noexcept { return value.cols(); }

  void zero_grad();
  /// value ← value ⊙ mask.
  void apply_mask();
};

using Rng = std::mt19937_64;

/// Uniform in [−1/√fan_in, 1/√fan_in] with fan_in = cols, then masked.
void init_uniform_fan_in(Parameter& p, Rng& rng);

/// s ← α s + (1−α) g²;  value ← value − lr g / (√s + ε);  re-mask;  grad ← 0.
void rmsprop_step(Parameter& p, const OptimizerConfig& cfg);

double global_grad_norm(std::span<Parameter* const> params);
/// Rescales all gradients so that their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping. A nonpositive max_norm disables clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace tgclstm
