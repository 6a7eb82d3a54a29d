#include "tgclstm/loss.hpp"

#include "tgclstm/errors.hpp"

namespace tgclstm {

TotalLoss total_loss(std::span<const double> prediction, std::span<const double> target,
                     const TGCLayer* layer, const TGCFeatures* features, double lambda1,
                     double lambda2) {
  if (prediction.size() != target.size()) {
    throw ShapeError("total_loss: prediction has " + std::to_string(prediction.size()) +
                     " entries, target " + std::to_string(target.size()));
  }
  TotalLoss out;
  out.mse = mean_squared_error(prediction, target);
  out.d_prediction = mean_squared_error_grad(prediction, target);
  out.value = out.mse;
  if (layer != nullptr) {
    out.weight_l1 = reg_weight_l1(*layer);
    out.value += lambda1 * out.weight_l1;
  }
  if (features != nullptr) {
    FeaturePenalty r2 = reg_feature_l2(*features);
    out.feature_l2 = r2.value;
    out.value += lambda2 * r2.value;
    for (double& g : r2.grad) g *= lambda2;
    out.d_features = std::move(r2.grad);
  }
  return out;
}

}  // namespace tgclstm
