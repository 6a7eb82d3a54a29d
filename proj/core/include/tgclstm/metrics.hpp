#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tgclstm/forecaster.hpp"

namespace tgclstm {

/// Observed speeds at or below this many mph are left out of the MAPE mean.
inline constexpr double kMapeFloorMph = 1.0;

struct MetricsResult {
  double mae = 0.0;   // mph
  double mape = 0.0;  // percent
  double rmse = 0.0;  // mph
  std::size_t samples = 0;
  std::size_t cells = 0;
  std::size_t mape_excluded = 0;
  Vector per_node_mae;
};

/// MAE, MAPE and RMSE over every (sample, node) cell. Both inputs in mph.
MetricsResult evaluate(std::span<const Vector> predictions, std::span<const Vector> targets,
                       double mape_floor = kMapeFloorMph);

/// (1/K) Σ_k W_k ⊙ Ã^k ⊙ FFR of a TGC layer.
Matrix averaged_tgc_weights(const TGCLayer& layer);
/// Throws ValidationError for models without a TGC layer.
Matrix export_avg_weights(const Forecaster& model);
/// CSV with node ids as header and row labels.
void write_avg_weights(const std::filesystem::path& path, const Matrix& weights,
                       std::span<const std::string> node_ids);

struct MetricsRow {
  std::string model;
  MetricsResult metrics;
};
void print_metrics_table(std::ostream& os, std::span<const MetricsRow> rows);
void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows, bool header = true);

}  // namespace tgclstm
