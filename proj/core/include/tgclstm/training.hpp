#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "tgclstm/dataset.hpp"
#include "tgclstm/forecaster.hpp"
#include "tgclstm/loss.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double seconds = 0.0;
};

struct TrainConfig {
  std::size_t batch_size = 10;
  double lambda1 = 0.01;
  double lambda2 = 0.01;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  bool early_stopped = false;
};

/// Copy of every parameter value and RMSProp state.
struct ParameterSnapshot {
  std::vector<Matrix> values;
  std::vector<Matrix> rms;
};
ParameterSnapshot snapshot(const Forecaster& model);
void restore(Forecaster& model, const ParameterSnapshot& snap);

/// Mean over windows of MSE(h_T, x_{T+1}), normalised units.
double mean_squared_error(const Forecaster& model, std::span<const WindowedSample> samples);

/// One optimiser step on a batch: gradients averaged over the batch, plus
/// λ₁ R¹ once, clipped, then RMSProp. Returns the batch objective.
double train_batch(Forecaster& model, std::span<const WindowedSample* const> batch,
                   const TrainConfig& cfg);

/// Mini-batch RMSProp with per-epoch seeded shuffling of the training windows
/// and early stopping on validation MSE. On return `model` holds the
/// parameters of the best validation epoch. Throws NumericError naming the
/// epoch and batch if the objective becomes non-finite.
TrainReport train(Forecaster& model, const WindowSplits& data, const TrainConfig& cfg);

void write_train_report(const std::filesystem::path& path, const TrainReport& report);

}  // namespace tgclstm
