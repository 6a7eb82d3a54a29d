#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "tgclstm/graph.hpp"
#include "tgclstm/lsgc.hpp"
#include "tgclstm/lstm.hpp"
#include "tgclstm/tgc_lstm.hpp"

namespace tgclstm {

enum class ModelKind : std::uint32_t { kTgcLstm = 0, kLstm = 1, kLsgcLstm = 2 };

std::string_view model_kind_name(ModelKind kind);
/// Accepts "tgc-lstm", "lstm", "lsgc-lstm".
ModelKind parse_model_kind(std::string_view name);

/// The non-trainable part of a model: enough to rebuild it from a checkpoint.
struct ModelStructure {
  ModelKind kind = ModelKind::kTgcLstm;
  std::size_t nodes = 0;
  int order = 0;                   // TGC hops K, or LSGC polynomial order
  std::vector<Matrix> hop_masks;   // Ã^k ⊙ FFR, k = 1..K (TGC-LSTM)
  Matrix laplacian;                // LSGC-LSTM

  void validate() const;
};

ModelStructure make_structure(ModelKind kind, const GraphMatrices& graph, int order);

struct SampleLoss {
  double mse = 0.0;
  double feature_penalty = 0.0;  // R² at the final step, unscaled
};

/// Common surface the trainer, checkpointing and CLI work against.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual const ModelStructure& structure() const = 0;
  ModelKind kind() const { return structure().kind; }
  std::size_t nodes() const { return structure().nodes; }

  /// h_T for a T × N window.
  virtual Vector predict(const Matrix& window) const = 0;

  /// Forward + BPTT of MSE + λ₂ R² for one window; gradients are multiplied by
  /// `scale` and added to the parameter accumulators.
  virtual SampleLoss accumulate_sample(const Matrix& window, std::span<const double> target,
                                       double lambda2, double scale) = 0;

  /// R¹ over the graph-convolution weights; 0 for models without them.
  virtual double weight_penalty() const { return 0.0; }
  /// Adds λ₁ times the R¹ subgradient. Returns R¹.
  virtual double accumulate_weight_penalty(double /*lambda1*/) { return 0.0; }
  /// R² of the final-step features for a window; 0 for models without them.
  virtual double feature_penalty(const Matrix& /*window*/) const { return 0.0; }

  virtual std::vector<Parameter*> parameters() = 0;
  std::vector<const Parameter*> parameters() const;
  void zero_grad();
};

class TGCLSTMForecaster final : public Forecaster {
 public:
  TGCLSTMForecaster(ModelStructure structure, std::uint64_t seed);

  const ModelStructure& structure() const override { return structure_; }
  Vector predict(const Matrix& window) const override;
  SampleLoss accumulate_sample(const Matrix& window, std::span<const double> target,
                               double lambda2, double scale) override;
  double weight_penalty() const override;
  double accumulate_weight_penalty(double lambda1) override;
  double feature_penalty(const Matrix& window) const override;
  std::vector<Parameter*> parameters() override;

  TGCLSTMCell& cell() noexcept { return cell_; }
  const TGCLSTMCell& cell() const noexcept { return cell_; }

 private:
  ModelStructure structure_;
  TGCLSTMCell cell_;
};

class LSTMForecaster final : public Forecaster {
 public:
  LSTMForecaster(ModelStructure structure, std::uint64_t seed);

  const ModelStructure& structure() const override { return structure_; }
  Vector predict(const Matrix& window) const override;
  SampleLoss accumulate_sample(const Matrix& window, std::span<const double> target,
                               double lambda2, double scale) override;
  std::vector<Parameter*> parameters() override;

  GateParams& gates() noexcept { return gates_; }
  const GateParams& gates() const noexcept { return gates_; }

 private:
  ModelStructure structure_;
  GateParams gates_;
};

class LSGCLSTMForecaster final : public Forecaster {
 public:
  LSGCLSTMForecaster(ModelStructure structure, std::uint64_t seed);

  const ModelStructure& structure() const override { return structure_; }
  Vector predict(const Matrix& window) const override;
  SampleLoss accumulate_sample(const Matrix& window, std::span<const double> target,
                               double lambda2, double scale) override;
  std::vector<Parameter*> parameters() override;

  LSGCLSTM& model() noexcept { return model_; }
  const LSGCLSTM& model() const noexcept { return model_; }

 private:
  ModelStructure structure_;
  LSGCLSTM model_;
};

std::unique_ptr<Forecaster> make_forecaster(ModelStructure structure, std::uint64_t seed);

}  // namespace tgclstm
