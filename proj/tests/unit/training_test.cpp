#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/loss.hpp"
#include "tgclstm/synthetic.hpp"
#include "tgclstm/training.hpp"

namespace tgclstm {
namespace {

struct Prepared {
  GraphMatrices graph;
  WindowSplits windows;
};

Prepared synthetic_windows(std::size_t steps, std::uint64_t seed) {
  SyntheticOptions opts;
  opts.steps = steps;
  opts.seed = seed;
  const auto data = generate_synthetic(opts);
  Prepared p;
  p.graph = build_graph_matrices(data.graph, GraphOptions{3, 3, 5.0});
  const SplitFractions split;
  p.windows = make_windows(normalize(data.dataset, split), 10, split);
  return p;
}

std::unique_ptr<Forecaster> tgc_model(const GraphMatrices& g, std::uint64_t seed) {
  return make_forecaster(make_structure(ModelKind::kTgcLstm, g, 3), seed);
}

TrainConfig quick_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.optimizer.learning_rate = 1e-3;
  return cfg;
}

TEST(TotalLoss, PerfectPredictionWithZeroWeights) {
  std::vector<Matrix> masks{Matrix::identity(2)};
  TGCLayer layer(masks);
  layer.weight(1).value.fill(0.0);
  const TGCFeatures features{2, 1, {0.0, 0.0}};
  const auto l = total_loss(std::vector<double>{0.3, 0.4}, std::vector<double>{0.3, 0.4}, &layer,
                            &features, 0.01, 0.01);
  EXPECT_EQ(l.value, 0.0);
}

TEST(TotalLoss, MeanSquaredErrorExample) {
  const auto l = total_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.7}, nullptr,
                            nullptr, 0.0, 0.0);
  EXPECT_NEAR(l.value, 0.02, 1e-15);
  EXPECT_EQ(l.value, l.mse);
}

TEST(TotalLoss, ZeroLambdasGiveExactMse) {
  std::mt19937_64 rng(1);
  std::vector<Matrix> masks{Matrix(4, 4, 1.0), Matrix(4, 4, 1.0)};
  TGCLayer layer(masks);
  const auto x = oracle::random_vector(4, rng);
  const auto f = tgc_forward(layer, x);
  const auto p = oracle::random_vector(4, rng), t = oracle::random_vector(4, rng);
  const auto l = total_loss(p, t, &layer, &f, 0.0, 0.0);
  EXPECT_EQ(l.value, mean_squared_error(p, t));
}

TEST(TotalLoss, AddsWeightedPenalties) {
  std::vector<Matrix> masks{Matrix(2, 2, 1.0), Matrix(2, 2, 1.0)};
  TGCLayer layer(masks);
  layer.weight(1).value = Matrix{{1, -2}, {0, 3}};
  layer.weight(2).value = Matrix(2, 2);
  const TGCFeatures f{2, 2, {1, 2, 1, 0}};
  const auto l = total_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.7}, &layer,
                            &f, 0.1, 0.5);
  EXPECT_NEAR(l.value, 0.02 + 0.1 * 6.0 + 0.5 * 2.0, 1e-14);
  EXPECT_EQ(l.weight_l1, 6.0);
  EXPECT_EQ(l.feature_l2, 2.0);
  EXPECT_THROW(total_loss(std::vector<double>{0.5}, std::vector<double>{0.5, 0.7}, nullptr,
                          nullptr, 0.0, 0.0),
               ShapeError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.batch_size, 10u);
  EXPECT_EQ(cfg.lambda1, 0.01);
  EXPECT_EQ(cfg.lambda2, 0.01);
  EXPECT_EQ(cfg.patience, 10u);
  EXPECT_EQ(cfg.optimizer.learning_rate, 1e-5);
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.patience = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.lambda1 = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Train, LossDecreasesOverFirstEpochsForMostSeeds) {
  int monotone = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto p = synthetic_windows(5000, seed);
    auto model = tgc_model(p.graph, seed);
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = 5;
    cfg.patience = 5;
    const auto report = train(*model, p.windows, cfg);
    ASSERT_EQ(report.epochs.size(), 5u);
    bool ok = true;
    for (std::size_t e = 1; e < 5; ++e)
      ok &= report.epochs[e].train_loss < report.epochs[e - 1].train_loss;
    monotone += ok;
  }
  EXPECT_GE(monotone, 2);
}

TEST(Train, HugeWeightPenaltyShrinksGraphWeights) {
  auto p = synthetic_windows(600, 3);
  auto model = tgc_model(p.graph, 3);
  auto cfg = quick_config(3);
  cfg.lambda1 = 1e6;
  cfg.lambda2 = 0.0;
  cfg.optimizer.learning_rate = 5e-4;
  cfg.max_epochs = 50;
  cfg.patience = 50;
  train(*model, p.windows, cfg);
  auto& cell = dynamic_cast<TGCLSTMForecaster&>(*model).cell();
  for (const auto& w : cell.tgc.weights())
    for (double v : w.value.values()) EXPECT_LT(std::abs(v), 1e-3);
}

TEST(Train, PatienceOneStopsAfterFirstNonImprovingEpoch) {
  auto p = synthetic_windows(400, 4);
  WindowSplits same{p.windows.train, p.windows.train, {}};
  auto model = tgc_model(p.graph, 4);
  auto cfg = quick_config(4);
  cfg.patience = 1;
  cfg.max_epochs = 200;
  cfg.optimizer.learning_rate = 5e-2;
  const auto report = train(*model, same, cfg);
  std::size_t first_bad = report.epochs.size();
  double best = INFINITY;
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    if (report.epochs[e].validation_loss >= best) {
      first_bad = e + 1;
      break;
    }
    best = report.epochs[e].validation_loss;
  }
  if (report.early_stopped) EXPECT_EQ(report.epochs.size(), first_bad);
  EXPECT_GE(report.epochs.size(), std::min<std::size_t>(first_bad, cfg.max_epochs));
}

TEST(Train, RestoresBestValidationEpoch) {
  auto p = synthetic_windows(400, 5);
  auto model = tgc_model(p.graph, 5);
  auto cfg = quick_config(5);
  cfg.optimizer.learning_rate = 2e-2;
  cfg.max_epochs = 12;
  cfg.patience = 12;
  const auto report = train(*model, p.windows, cfg);
  double best = INFINITY;
  std::size_t best_epoch = 0;
  for (const auto& r : report.epochs)
    if (r.validation_loss < best) {
      best = r.validation_loss;
      best_epoch = r.epoch;
    }
  EXPECT_EQ(report.best_epoch, best_epoch);
  EXPECT_EQ(report.best_validation_loss, best);
  EXPECT_EQ(mean_squared_error(*model, p.windows.validation), best);
}

TEST(Train, FullBatchEpochEqualsOneHandStep) {
  for (auto kind : {ModelKind::kTgcLstm, ModelKind::kLstm, ModelKind::kLsgcLstm}) {
    auto p = synthetic_windows(200, 6);
    WindowSplits three;
    three.train.assign(p.windows.train.begin(), p.windows.train.begin() + 3);
    three.validation = three.train;
    const auto structure = make_structure(kind, p.graph, 3);
    auto model = make_forecaster(structure, 6);
    auto reference = make_forecaster(structure, 6);

    TrainConfig cfg = quick_config(6);
    cfg.batch_size = 3;
    cfg.lambda1 = cfg.lambda2 = 0.0;
    cfg.clip_norm = 0.0;
    cfg.max_epochs = 1;
    train(*model, three, cfg);

    for (const auto& s : three.train) reference->accumulate_sample(s.input, s.target, 0.0, 1.0 / 3.0);
    for (Parameter* q : reference->parameters()) rmsprop_step(*q, cfg.optimizer);

    const auto a = model->parameters();
    const auto b = reference->parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i]->value.size(); ++j)
        ASSERT_NEAR(a[i]->value.values()[j], b[i]->value.values()[j], 1e-12)
            << model_kind_name(kind) << " " << a[i]->name;
  }
}

TEST(Train, EmptySplitsAreRejected) {
  auto p = synthetic_windows(200, 7);
  auto model = tgc_model(p.graph, 7);
  WindowSplits no_train{{}, p.windows.validation, {}};
  WindowSplits no_val{p.windows.train, {}, {}};
  EXPECT_THROW(train(*model, no_train, quick_config(7)), ValidationError);
  EXPECT_THROW(train(*model, no_val, quick_config(7)), ValidationError);
}

TEST(Train, NonFiniteLossNamesBatch) {
  auto p = synthetic_windows(200, 8);
  auto model = tgc_model(p.graph, 8);
  auto cfg = quick_config(8);
  cfg.lambda1 = INFINITY;
  cfg.max_epochs = 1;
  try {
    train(*model, p.windows, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 0"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace tgclstm
