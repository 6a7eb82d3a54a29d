#include "tgclstm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tgclstm/csv.hpp"
#include "tgclstm/errors.hpp"

namespace tgclstm {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ValidationError("lambda1/lambda2 must be >= 0");
  optimizer.validate();
}

ParameterSnapshot snapshot(const Forecaster& model) {
  ParameterSnapshot snap;
  for (const Parameter* p : model.parameters()) {
    snap.values.push_back(p->value);
    snap.rms.push_back(p->rms);
  }
  return snap;
}

void restore(Forecaster& model, const ParameterSnapshot& snap) {
  auto params = model.parameters();
  if (params.size() != snap.values.size()) throw ShapeError("restore: snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = snap.values[i];
    params[i]->rms = snap.rms[i];
  }
}

double mean_squared_error(const Forecaster& model, std::span<const WindowedSample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += mean_squared_error(model.predict(s.input), s.target);
  return total / static_cast<double>(samples.size());
}

double train_batch(Forecaster& model, std::span<const WindowedSample* const> batch,
                   const TrainConfig& cfg) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double objective = 0.0;
  for (const WindowedSample* s : batch) {
    const SampleLoss loss = model.accumulate_sample(s->input, s->target, cfg.lambda2, scale);
    objective += scale * (loss.mse + cfg.lambda2 * loss.feature_penalty);
  }
  objective += cfg.lambda1 * model.accumulate_weight_penalty(cfg.lambda1);
  if (!std::isfinite(objective)) return objective;

  auto params = model.parameters();
  clip_grad_norm(params, cfg.clip_norm);
  for (Parameter* p : params) rmsprop_step(*p, cfg.optimizer);
  return objective;
}

TrainReport train(Forecaster& model, const WindowSplits& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.train.empty()) throw ValidationError("train: training split is empty");
  if (data.validation.empty()) throw ValidationError("train: validation split is empty");

  Rng rng(cfg.seed);
  std::vector<const WindowedSample*> order(data.train.size());
  std::transform(data.train.begin(), data.train.end(), order.begin(),
                 [](const WindowedSample& s) { return &s; });

  TrainReport report;
  report.best_validation_loss = std::numeric_limits<double>::infinity();
  ParameterSnapshot best = snapshot(model);
  std::size_t since_improvement = 0;
  model.zero_grad();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const auto where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches);
      double loss = 0.0;
      try {
        loss = train_batch(model, std::span(order).subspan(begin, end - begin), cfg);
      } catch (const NumericError& e) {
        throw NumericError("train: " + where + ": " + e.what());
      }
      if (!std::isfinite(loss)) throw NumericError("train: non-finite loss at " + where);
      loss_sum += loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.validation_loss = mean_squared_error(model, data.validation);
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);

    if (rec.validation_loss < report.best_validation_loss) {
      report.best_validation_loss = rec.validation_loss;
      report.best_epoch = epoch;
      best = snapshot(model);
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      report.early_stopped = true;
      break;
    }
  }
  restore(model, best);
  return report;
}

void write_train_report(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "epoch,train_loss,validation_loss,seconds,best\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << csv::format_double(e.train_loss) << ','
        << csv::format_double(e.validation_loss) << ',' << csv::format_double(e.seconds) << ','
        << (e.epoch == report.best_epoch ? 1 : 0) << '\n';
  }
}

}  // namespace tgclstm
