#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tgclstm/graph.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

/// Per-hop graph convolution features, stored flat in hop-major order:
/// flat[(k − 1) · N + i] = GC^k_i.
struct TGCFeatures {
  std::size_t nodes = 0;
  int order = 0;
  Vector flat;

  std::span<const double> hop(int k) const {
    return {flat.data() + static_cast<std::size_t>(k - 1) * nodes, nodes};
  }
  std::span<double> hop(int k) { return {flat.data() + static_cast<std::size_t>(k - 1) * nodes, nodes}; }
};

/// One traffic graph convolution layer: K masked N×N weights, hop k masked
/// by Ã^k ⊙ FFR.
class TGCLayer {
 public:
  TGCLayer() = default;
  /// Weights start at all-ones on each mask's support.
  explicit TGCLayer(std::span<const SupportMask> masks);
  explicit TGCLayer(std::span<const Matrix> masks);

  int order() const noexcept { return static_cast<int>(weights_.size()); }
  std::size_t nodes() const noexcept { return weights_.empty() ? 0 : weights_.front().rows(); }

  Parameter& weight(int k) { return weights_.at(static_cast<std::size_t>(k - 1)); }
  const Parameter& weight(int k) const { return weights_.at(static_cast<std::size_t>(k - 1)); }
  const Matrix& mask(int k) const { return *weight(k).mask; }

  std::vector<Parameter>& weights() noexcept { return weights_; }
  const std::vector<Parameter>& weights() const noexcept { return weights_; }

 private:
  std::vector<Parameter> weights_;
};

/// GC^k = (W_k ⊙ Ã^k ⊙ FFR) x for k = 1..K.
TGCFeatures tgc_forward(const TGCLayer& layer, std::span<const double> x);

/// Accumulates ∂L/∂W_k = (g_k x^T) ⊙ mask_k into the layer's gradients and
/// returns ∂L/∂x = Σ_k (W_k ⊙ mask_k)^T g_k.
Vector tgc_backward(TGCLayer& layer, std::span<const double> x,
                    std::span<const double> upstream);

/// Σ_k Σ |W_k| over mask support.
double reg_weight_l1(const TGCLayer& layer);
/// Adds scale · sign(W_k) ⊙ mask_k to the weight gradients (sign(0) = 0).
void reg_weight_l1_backward(TGCLayer& layer, double scale);

struct FeaturePenalty {
  double value = 0.0;
  Vector grad;  // same layout as TGCFeatures::flat
};

/// sqrt(Σ_{k<K} ||GC^k − GC^{k+1}||²); zero (with zero gradient) for K = 1
/// or when all hops coincide.
FeaturePenalty reg_feature_l2(const TGCFeatures& features);

}  // namespace tgclstm
