#pragma once

#include <functional>
#include <span>
#include <string>

#include "tgclstm/parameter.hpp"

namespace tgclstm {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares each Parameter's `grad` (already filled in by the caller) against
/// fourth-order central differences of `loss` over every coordinate of `value`.
/// Relative error is |a − n| / max(|a|, |n|, 1e-8). Masked-out coordinates are
/// skipped: they are not free variables of the model.
/// Throws NumericError if `loss` returns a non-finite value.
GradCheckResult fd_gradient_check(const std::function<double()>& loss,
                                  std::span<Parameter* const> params, double step = 1e-3);

}  // namespace tgclstm
