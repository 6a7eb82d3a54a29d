#include "tgclstm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tgclstm/errors.hpp"

namespace tgclstm {

namespace {

double finite_loss(const std::function<double()>& loss) {
  const double v = loss();
  if (!std::isfinite(v)) throw NumericError("fd_gradient_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckResult fd_gradient_check(const std::function<double()>& loss,
                                  std::span<Parameter* const> params, double step) {
  GradCheckResult result;
  finite_loss(loss);
  for (Parameter* p : params) {
    auto values = p->value.values();
    auto grads = p->grad.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (p->mask && p->mask->values()[i] == 0.0) continue;
      const double saved = values[i];
      auto at = [&](double offset) {
        values[i] = saved + offset;
        const double v = finite_loss(loss);
        values[i] = saved;
        return v;
      };
      const double numeric =
          (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
      const double analytic = grads[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.coordinates;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = p->name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace tgclstm
