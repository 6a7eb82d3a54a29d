#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "tgclstm/checkpoint.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/training.hpp"

namespace tgclstm {
namespace {

using Checkpoint = testing::TempDirTest;

GraphMatrices ring_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return build_graph_matrices(TrafficGraph(n, edges), GraphOptions{2, 2, 5.0});
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

// A few optimiser steps so values and RMS state are all non-trivial.
void perturb(Forecaster& model, std::mt19937_64& rng) {
  for (int step = 0; step < 3; ++step) {
    for (Parameter* p : model.parameters()) p->grad = oracle::random_matrix(p->rows(), p->cols(), rng);
    for (Parameter* p : model.parameters()) rmsprop_step(*p, OptimizerConfig{1e-2, 0.9, 1e-8});
  }
}

TEST_F(Checkpoint, RoundTripIsBitExactForEveryKind) {
  const auto g = ring_graph(6);
  std::mt19937_64 rng(1);
  const Matrix window = oracle::random_matrix(10, 6, rng, 0.0, 1.0);
  for (auto kind : {ModelKind::kTgcLstm, ModelKind::kLstm, ModelKind::kLsgcLstm}) {
    auto model = make_forecaster(make_structure(kind, g, 2), 3);
    perturb(*model, rng);
    const CheckpointMetadata meta{{"model", std::string(model_kind_name(kind))}, {"window", "10"}};
    save_checkpoint(path("m.ckpt"), *model, meta);
    const auto loaded = load_checkpoint(path("m.ckpt"));
    EXPECT_EQ(loaded.metadata, meta);
    EXPECT_EQ(loaded.model->kind(), kind);
    const auto a = model->parameters();
    const auto b = loaded.model->parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i]->name, b[i]->name);
      EXPECT_EQ(a[i]->value, b[i]->value);
      EXPECT_EQ(a[i]->rms, b[i]->rms);
    }
    EXPECT_EQ(model->predict(window), loaded.model->predict(window));
  }
}

TEST_F(Checkpoint, LoadIntoExistingModel) {
  const auto g = ring_graph(5);
  std::mt19937_64 rng(2);
  auto model = make_forecaster(make_structure(ModelKind::kTgcLstm, g, 2), 1);
  perturb(*model, rng);
  save_checkpoint(path("m.ckpt"), *model);
  auto other = make_forecaster(make_structure(ModelKind::kTgcLstm, g, 2), 99);
  load_checkpoint_into(path("m.ckpt"), *other);
  const Matrix window = oracle::random_matrix(4, 5, rng);
  EXPECT_EQ(model->predict(window), other->predict(window));
}

TEST_F(Checkpoint, WrongNodeCountIsShapeError) {
  auto model = make_forecaster(make_structure(ModelKind::kTgcLstm, ring_graph(5), 2), 1);
  save_checkpoint(path("m.ckpt"), *model);
  auto bigger = make_forecaster(make_structure(ModelKind::kTgcLstm, ring_graph(6), 2), 1);
  const auto before = snapshot(*bigger);
  EXPECT_THROW(load_checkpoint_into(path("m.ckpt"), *bigger), ShapeError);
  const auto after = snapshot(*bigger);
  EXPECT_EQ(before.values, after.values);

  auto lstm = make_forecaster(make_structure(ModelKind::kLstm, ring_graph(5), 2), 1);
  EXPECT_THROW(load_checkpoint_into(path("m.ckpt"), *lstm), ShapeError);
}

TEST_F(Checkpoint, TruncatedFileIsFormatError) {
  auto model = make_forecaster(make_structure(ModelKind::kTgcLstm, ring_graph(5), 2), 1);
  save_checkpoint(path("m.ckpt"), *model);
  const std::string bytes = read_bytes(path("m.ckpt"));
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    write_bytes(path("cut.ckpt"), bytes.substr(0, keep));
    EXPECT_THROW(load_checkpoint(path("cut.ckpt")), FormatError) << keep;
  }
}

TEST_F(Checkpoint, CorruptPayloadIsFormatError) {
  auto model = make_forecaster(make_structure(ModelKind::kLstm, ring_graph(4), 2), 1);
  save_checkpoint(path("m.ckpt"), *model);
  std::string bytes = read_bytes(path("m.ckpt"));
  bytes[bytes.size() / 2] ^= 0x40;
  write_bytes(path("bad.ckpt"), bytes);
  EXPECT_THROW(load_checkpoint(path("bad.ckpt")), FormatError);
}

TEST_F(Checkpoint, VersionMismatchIsFormatError) {
  auto model = make_forecaster(make_structure(ModelKind::kLstm, ring_graph(4), 2), 1);
  save_checkpoint(path("m.ckpt"), *model);
  std::string bytes = read_bytes(path("m.ckpt"));
  bytes[8] = static_cast<char>(kCheckpointVersion + 1);
  write_bytes(path("v.ckpt"), bytes);
  try {
    load_checkpoint(path("v.ckpt"));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
}

TEST_F(Checkpoint, MissingFileIsFormatError) {
  EXPECT_THROW(load_checkpoint(path("absent.ckpt")), FormatError);
}

TEST(MaskedParameters, OffSupportStaysZeroThroughTraining) {
  const auto g = ring_graph(7);
  auto model = make_forecaster(make_structure(ModelKind::kTgcLstm, g, 2), 4);
  std::mt19937_64 rng(4);
  for (int step = 0; step < 100; ++step) {
    const Matrix window = oracle::random_matrix(3, 7, rng, 0.0, 1.0);
    model->accumulate_sample(window, oracle::random_vector(7, rng, 0.0, 1.0), 0.5, 1.0);
    model->accumulate_weight_penalty(0.5);
    for (Parameter* p : model->parameters()) rmsprop_step(*p, OptimizerConfig{1e-2, 0.99, 1e-8});
    for (const Parameter* p : model->parameters())
      if (p->mask)
        for (std::size_t i = 0; i < p->value.size(); ++i)
          if (p->mask->values()[i] == 0.0) ASSERT_EQ(p->value.values()[i], 0.0) << p->name;
  }
}

}  // namespace
}  // namespace tgclstm
