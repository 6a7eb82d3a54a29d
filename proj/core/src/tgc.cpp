#include "tgclstm/tgc.hpp"

#include <cmath>
#include <string>

#include "tgclstm/errors.hpp"

namespace tgclstm {

TGCLayer::TGCLayer(std::span<const SupportMask> masks) {
  for (const auto& m : masks) {
    if (m.order != static_cast<int>(weights_.size()) + 1) {
      throw ValidationError("TGCLayer: masks must be ordered by hop starting at 1");
    }
    weights_.emplace_back("tgc.w" + std::to_string(m.order), m.values, m.values);
  }
}

TGCLayer::TGCLayer(std::span<const Matrix> masks) {
  for (std::size_t k = 0; k < masks.size(); ++k) {
    weights_.emplace_back("tgc.w" + std::to_string(k + 1), masks[k], masks[k]);
  }
}

TGCFeatures tgc_forward(const TGCLayer& layer, std::span<const double> x) {
  const std::size_t n = layer.nodes();
  if (x.size() != n) {
    throw ShapeError("tgc_forward: input length " + std::to_string(x.size()) + " but layer has " +
                     std::to_string(n) + " nodes");
  }
  TGCFeatures features{n, layer.order(), Vector(n * static_cast<std::size_t>(layer.order()), 0.0)};
  for (int k = 1; k <= layer.order(); ++k) {
    masked_linear_accumulate(layer.weight(k).value, layer.mask(k), x, features.hop(k));
  }
  return features;
}

Vector tgc_backward(TGCLayer& layer, std::span<const double> x,
                    std::span<const double> upstream) {
  const std::size_t n = layer.nodes();
  if (x.size() != n || upstream.size() != n * static_cast<std::size_t>(layer.order())) {
    throw ShapeError("tgc_backward: input or upstream gradient has the wrong length");
  }
  Vector dx(n, 0.0);
  for (int k = 1; k <= layer.order(); ++k) {
    Parameter& w = layer.weight(k);
    masked_linear_backward_accumulate(w.value, *w.mask, x,
                                      upstream.subspan(static_cast<std::size_t>(k - 1) * n, n),
                                      w.grad, dx);
  }
  return dx;
}

double reg_weight_l1(const TGCLayer& layer) {
  double total = 0.0;
  for (const Parameter& w : layer.weights()) {
    auto v = w.value.values();
    auto m = w.mask->values();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (m[i] != 0.0) total += std::abs(v[i]);
  }
  return total;
}

void reg_weight_l1_backward(TGCLayer& layer, double scale) {
  for (Parameter& w : layer.weights()) {
    auto v = w.value.values();
    auto m = w.mask->values();
    auto g = w.grad.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (m[i] == 0.0 || v[i] == 0.0) continue;
      g[i] += v[i] > 0.0 ? scale : -scale;
    }
  }
}

FeaturePenalty reg_feature_l2(const TGCFeatures& features) {
  const std::size_t n = features.nodes;
  FeaturePenalty out{0.0, Vector(features.flat.size(), 0.0)};
  if (features.order < 2) return out;
  double sum_sq = 0.0;
  for (int k = 1; k < features.order; ++k) {
    auto a = features.hop(k);
    auto b = features.hop(k + 1);
    for (std::size_t i = 0; i < n; ++i) sum_sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  out.value = std::sqrt(sum_sq);
  if (out.value == 0.0) return out;
  for (int k = 1; k < features.order; ++k) {
    auto a = features.hop(k);
    auto b = features.hop(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (a[i] - b[i]) / out.value;
      out.grad[static_cast<std::size_t>(k - 1) * n + i] += d;
      out.grad[static_cast<std::size_t>(k) * n + i] -= d;
    }
  }
  return out;
}

}  // namespace tgclstm
