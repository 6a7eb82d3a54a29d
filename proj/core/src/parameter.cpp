#include "tgclstm/parameter.hpp"

#include <algorithm>
#include <cmath>

#include "tgclstm/errors.hpp"

namespace tgclstm {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");
}

Parameter::Parameter(std::string name_, Matrix value_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(value.rows(), value.cols()),
      rms(value.rows(), value.cols()) {}

Parameter::Parameter(std::string name_, Matrix value_, Matrix mask_)
    : Parameter(std::move(name_), std::move(value_)) {
  if (!mask_.same_shape(value)) {
    throw ShapeError("Parameter " + name + ": mask " + shape_string(mask_) +
                     " does not match value " + shape_string(value));
  }
  mask = std::move(mask_);
  apply_mask();
}

void Parameter::zero_grad() { grad.fill(0.0); }

void Parameter::apply_mask() {
  if (!mask) return;
  auto v = value.values();
  auto m = mask->values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i] == 0.0) v[i] = 0.0;
  }
}

void init_uniform_fan_in(Parameter& p, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(p.cols(), 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : p.value.values()) v = dist(rng);
  p.apply_mask();
}

void rmsprop_step(Parameter& p, const OptimizerConfig& cfg) {
  auto v = p.value.values();
  auto g = p.grad.values();
  auto s = p.rms.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = cfg.alpha * s[i] + (1.0 - cfg.alpha) * g[i] * g[i];
    if (g[i] != 0.0) v[i] -= cfg.learning_rate * g[i] / (std::sqrt(s[i]) + cfg.epsilon);
  }
  p.apply_mask();
  p.zero_grad();
}

double global_grad_norm(std::span<Parameter* const> params) {
  double acc = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.values()) acc += g * g;
  return std::sqrt(acc);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad.values()) g *= factor;
  }
  return norm;
}

}  // namespace tgclstm
