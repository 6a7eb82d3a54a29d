#include "tgclstm/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "tgclstm/csv.hpp"
#include "tgclstm/errors.hpp"

namespace tgclstm {

MetricsResult evaluate(std::span<const Vector> predictions, std::span<const Vector> targets,
                       double mape_floor) {
  if (predictions.empty()) throw ValidationError("evaluate: no samples");
  if (predictions.size() != targets.size()) {
    throw ShapeError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const std::size_t n = targets.front().size();
  MetricsResult r;
  r.samples = predictions.size();
  r.per_node_mae.assign(n, 0.0);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double pct_sum = 0.0;
  std::size_t pct_cells = 0;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    if (predictions[s].size() != n || targets[s].size() != n) {
      throw ShapeError("evaluate: sample " + std::to_string(s) + " has the wrong width");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double err = targets[s][i] - predictions[s][i];
      abs_sum += std::abs(err);
      sq_sum += err * err;
      r.per_node_mae[i] += std::abs(err);
      if (targets[s][i] > mape_floor) {
        pct_sum += std::abs(err / targets[s][i]);
        ++pct_cells;
      } else {
        ++r.mape_excluded;
      }
    }
  }
  r.cells = predictions.size() * n;
  const double cells = static_cast<double>(r.cells);
  r.mae = abs_sum / cells;
  r.rmse = std::sqrt(sq_sum / cells);
  r.mape = pct_cells == 0 ? 0.0 : 100.0 * pct_sum / static_cast<double>(pct_cells);
  for (double& v : r.per_node_mae) v /= static_cast<double>(predictions.size());
  return r;
}

Matrix averaged_tgc_weights(const TGCLayer& layer) {
  const std::size_t n = layer.nodes();
  Matrix avg(n, n);
  for (int k = 1; k <= layer.order(); ++k) {
    const Matrix masked = hadamard(layer.weight(k).value, layer.mask(k));
    auto a = avg.values();
    auto m = masked.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += m[i];
  }
  for (double& v : avg.values()) v /= static_cast<double>(layer.order());
  return avg;
}

Matrix export_avg_weights(const Forecaster& model) {
  const auto* tgc = dynamic_cast<const TGCLSTMForecaster*>(&model);
  if (tgc == nullptr) {
    throw ValidationError("export_avg_weights: " + std::string(model_kind_name(model.kind())) +
                          " has no traffic graph convolution weights");
  }
  return averaged_tgc_weights(tgc->cell().tgc);
}

void write_avg_weights(const std::filesystem::path& path, const Matrix& weights,
                       std::span<const std::string> node_ids) {
  csv::write_matrix(path, weights, node_ids, node_ids, "node");
}

void print_metrics_table(std::ostream& os, std::span<const MetricsRow> rows) {
  os << std::left << std::setw(12) << "model" << std::right << std::setw(10) << "MAE"
     << std::setw(10) << "MAPE%" << std::setw(10) << "RMSE" << std::setw(10) << "samples" << '\n';
  for (const auto& row : rows) {
    os << std::left << std::setw(12) << row.model << std::right << std::fixed
       << std::setprecision(4) << std::setw(10) << row.metrics.mae << std::setw(10)
       << row.metrics.mape << std::setw(10) << row.metrics.rmse << std::setw(10)
       << row.metrics.samples << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows, bool header) {
  if (header) os << "model,mae_mph,mape_percent,rmse_mph,samples,mape_excluded_cells\n";
  for (const auto& row : rows) {
    os << row.model << ',' << csv::format_double(row.metrics.mae) << ','
       << csv::format_double(row.metrics.mape) << ',' << csv::format_double(row.metrics.rmse)
       << ',' << row.metrics.samples << ',' << row.metrics.mape_excluded << '\n';
  }
}

}  // namespace tgclstm
