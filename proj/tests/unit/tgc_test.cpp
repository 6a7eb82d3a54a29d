#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/gradcheck.hpp"
#include "tgclstm/tgc.hpp"

namespace tgclstm {
namespace {

std::vector<Matrix> path_masks(std::size_t n, int k_hops) {
  const auto a = build_adjacency(oracle::path_graph(n));
  const FFRMatrix ffr{Matrix(n, n, 1.0), 1, 5.0};
  std::vector<Matrix> masks;
  for (int k = 1; k <= k_hops; ++k) masks.push_back(support_mask(khop_neighborhood(a, k), ffr).values);
  return masks;
}

std::vector<Matrix> random_masks(std::size_t n, int k_hops, std::mt19937_64& rng) {
  const auto g = oracle::random_graph(n, 0.35, rng);
  const auto a = build_adjacency(g);
  const auto ffr = oracle::random_ffr(n, 0.6, rng);
  std::vector<Matrix> masks;
  for (int k = 1; k <= k_hops; ++k) masks.push_back(support_mask(khop_neighborhood(a, k), ffr).values);
  return masks;
}

void randomize(TGCLayer& layer, std::mt19937_64& rng) {
  for (auto& w : layer.weights()) {
    w.value = oracle::random_matrix(w.rows(), w.cols(), rng);
    w.apply_mask();
  }
}

TEST(TgcForward, PathGraphOneHopSums) {
  const auto masks = path_masks(4, 1);
  const TGCLayer layer(masks);
  const auto f = tgc_forward(layer, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(f.order, 1);
  EXPECT_EQ(f.flat, (Vector{3, 6, 9, 7}));
}

TEST(TgcForward, ZeroInputGivesZeroFeatures) {
  std::mt19937_64 rng(1);
  TGCLayer layer(random_masks(6, 3, rng));
  randomize(layer, rng);
  const auto f = tgc_forward(layer, std::vector<double>(6, 0.0));
  for (double v : f.flat) EXPECT_EQ(v, 0.0);
}

TEST(TgcForward, DiagonalWeightsCopyInput) {
  const auto masks = path_masks(5, 3);
  TGCLayer layer(masks);
  for (auto& w : layer.weights()) w.value = Matrix::identity(5);
  const Vector x{0.3, -1.0, 2.5, 4.0, 0.1};
  const auto f = tgc_forward(layer, x);
  for (int k = 1; k <= 3; ++k) {
    const auto hop = f.hop(k);
    EXPECT_EQ(Vector(hop.begin(), hop.end()), x);
  }
}

TEST(TgcForward, HopMajorLayout) {
  const auto masks = path_masks(3, 2);
  TGCLayer layer(masks);
  const auto f = tgc_forward(layer, std::vector<double>{1, 10, 100});
  ASSERT_EQ(f.flat.size(), 6u);
  EXPECT_EQ(f.flat[0], 11.0);
  EXPECT_EQ(f.flat[3], 111.0);
}

TEST(TgcForward, RejectsWrongLength) {
  const auto masks = path_masks(4, 1);
  const TGCLayer layer(masks);
  EXPECT_THROW(tgc_forward(layer, std::vector<double>{1, 2}), ShapeError);
}

TEST(TgcForward, MatchesNaiveReference) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const int k = 1 + trial % 3;
    TGCLayer layer(random_masks(n, k, rng));
    randomize(layer, rng);
    const auto x = oracle::random_vector(n, rng);
    std::vector<Matrix> w, m;
    for (int h = 1; h <= k; ++h) {
      w.push_back(layer.weight(h).value);
      m.push_back(layer.mask(h));
    }
    EXPECT_EQ(tgc_forward(layer, x).flat, oracle::naive_tgc(w, m, x));
  }
}

TEST(TgcForward, Linear) {
  std::mt19937_64 rng(3);
  TGCLayer layer(random_masks(8, 3, rng));
  randomize(layer, rng);
  const auto x = oracle::random_vector(8, rng);
  const auto y = oracle::random_vector(8, rng);
  Vector xy(8);
  for (std::size_t i = 0; i < 8; ++i) xy[i] = x[i] + y[i];
  const auto fx = tgc_forward(layer, x), fy = tgc_forward(layer, y), fxy = tgc_forward(layer, xy);
  for (std::size_t i = 0; i < fxy.flat.size(); ++i)
    EXPECT_NEAR(fxy.flat[i], fx.flat[i] + fy.flat[i], 1e-12);
}

TEST(TgcForward, FarNodeDoesNotAffectFeature) {
  const std::size_t n = 8;
  for (int k = 1; k <= 3; ++k) {
    std::mt19937_64 rng(k);
    TGCLayer layer(path_masks(n, k));
    randomize(layer, rng);
    auto x = oracle::random_vector(n, rng);
    const auto before = tgc_forward(layer, x);
    x[k + 1] += 5.0;  // node k+1 is k+1 hops from node 0
    const auto after = tgc_forward(layer, x);
    for (int h = 1; h <= k; ++h) EXPECT_EQ(before.hop(h)[0], after.hop(h)[0]);
    EXPECT_NE(before.hop(k)[k], after.hop(k)[k]);
  }
}

TEST(TgcBackward, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    TGCLayer layer(random_masks(6, 3, rng));
    randomize(layer, rng);
    const auto x = oracle::random_vector(6, rng);
    const auto readout = oracle::random_vector(18, rng);
    auto loss = [&] {
      const auto f = tgc_forward(layer, x);
      double s = 0;
      for (std::size_t i = 0; i < 18; ++i) s += readout[i] * f.flat[i];
      return s;
    };
    const auto dx = tgc_backward(layer, x, readout);
    std::vector<Parameter*> ps;
    for (auto& w : layer.weights()) ps.push_back(&w);
    EXPECT_LT(fd_gradient_check(loss, ps).max_relative_error, 1e-4);

    // Input gradient against the same stencil.
    const double h = 1e-3;
    for (std::size_t j = 0; j < 6; ++j) {
      auto at = [&](double off) {
        auto xp = x;
        xp[j] += off;
        const auto f = tgc_forward(layer, xp);
        double s = 0;
        for (std::size_t i = 0; i < 18; ++i) s += readout[i] * f.flat[i];
        return s;
      };
      const double num = (at(h) - at(-h)) / (2 * h);
      EXPECT_NEAR(dx[j], num, 1e-9 * std::max(1.0, std::abs(num)));
    }
  }
}

TEST(TgcBackward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(5);
  TGCLayer layer(random_masks(5, 2, rng));
  randomize(layer, rng);
  const auto dx = tgc_backward(layer, oracle::random_vector(5, rng), Vector(10, 0.0));
  for (double v : dx) EXPECT_EQ(v, 0.0);
  for (const auto& w : layer.weights())
    for (double g : w.grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(TgcBackward, OffSupportGradientsExactlyZero) {
  std::mt19937_64 rng(6);
  TGCLayer layer(random_masks(7, 3, rng));
  randomize(layer, rng);
  tgc_backward(layer, oracle::random_vector(7, rng), oracle::random_vector(21, rng));
  for (const auto& w : layer.weights())
    for (std::size_t i = 0; i < w.grad.size(); ++i)
      if (w.mask->values()[i] == 0.0) EXPECT_EQ(w.grad.values()[i], 0.0);
}

TEST(WeightL1, Examples) {
  std::vector<Matrix> masks{Matrix(2, 2, 1.0)};
  TGCLayer layer(masks);
  layer.weight(1).value = Matrix{{1, -2}, {0, 3}};
  EXPECT_DOUBLE_EQ(reg_weight_l1(layer), 6.0);

  layer.weight(1).value = Matrix{{2, -4}, {0, 6}};
  EXPECT_DOUBLE_EQ(reg_weight_l1(layer), 12.0);

  layer.weight(1).value = Matrix(2, 2);
  EXPECT_EQ(reg_weight_l1(layer), 0.0);
}

TEST(WeightL1, SubgradientIsSignOnSupport) {
  std::vector<Matrix> masks{Matrix{{1, 1}, {0, 1}}};
  TGCLayer layer(masks);
  layer.weight(1).value = Matrix{{-0.5, 0.0}, {0.0, 2.0}};
  reg_weight_l1_backward(layer, 0.5);
  EXPECT_EQ(layer.weight(1).grad, (Matrix{{-0.5, 0.0}, {0.0, 0.5}}));
}

TEST(FeatureL2, Examples) {
  TGCFeatures f{2, 2, {1, 2, 1, 0}};
  const auto p = reg_feature_l2(f);
  EXPECT_DOUBLE_EQ(p.value, 2.0);

  TGCFeatures same{3, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3}};
  const auto z = reg_feature_l2(same);
  EXPECT_EQ(z.value, 0.0);
  for (double g : z.grad) EXPECT_EQ(g, 0.0);

  TGCFeatures one{2, 1, {4, 5}};
  EXPECT_EQ(reg_feature_l2(one).value, 0.0);
}

TEST(FeatureL2, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  TGCFeatures f{4, 3, oracle::random_vector(12, rng)};
  const auto p = reg_feature_l2(f);
  ASSERT_GT(p.value, 0.0);
  const double h = 1e-5;
  for (std::size_t i = 0; i < 12; ++i) {
    auto fp = f, fm = f;
    fp.flat[i] += h;
    fm.flat[i] -= h;
    const double num = (reg_feature_l2(fp).value - reg_feature_l2(fm).value) / (2 * h);
    EXPECT_LT(std::abs(p.grad[i] - num) / std::max({std::abs(num), std::abs(p.grad[i]), 1e-8}),
              1e-4);
  }
}

TEST(TgcLayer, RejectsMisorderedMasks) {
  std::vector<SupportMask> masks{{2, Matrix::identity(3)}, {1, Matrix::identity(3)}};
  EXPECT_THROW(TGCLayer{std::span<const SupportMask>(masks)}, ValidationError);
}

}  // namespace
}  // namespace tgclstm
