#pragma once

#include <span>

#include "tgclstm/tgc.hpp"

namespace tgclstm {

/// Regularised objective MSE(h_T, x_{T+1}) + λ₁ R¹ + λ₂ R².
struct TotalLoss {
  double value = 0.0;
  double mse = 0.0;
  double weight_l1 = 0.0;   // R¹ (unscaled)
  double feature_l2 = 0.0;  // R² (unscaled)
  Vector d_prediction;
  Vector d_features;  // empty when no features were given
};

/// `layer` and `features` may be null (baselines, or when the weight term is
/// accumulated once per batch elsewhere). The λ₁ subgradient is not applied
/// here; see reg_weight_l1_backward.
TotalLoss total_loss(std::span<const double> prediction, std::span<const double> target,
                     const TGCLayer* layer, const TGCFeatures* features, double lambda1,
                     double lambda2);

}  // namespace tgclstm
