#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/gradcheck.hpp"
#include "tgclstm/lsgc.hpp"
#include "tgclstm/lstm.hpp"
#include "tgclstm/tgc_lstm.hpp"

namespace tgclstm {
namespace {

void randomize(std::vector<Parameter*>& ps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.05, 0.6);
  std::bernoulli_distribution sign(0.5);
  for (Parameter* p : ps) {
    for (double& v : p->value.values()) v = sign(rng) ? mag(rng) : -mag(rng);
    p->apply_mask();
  }
}

TEST(Laplacian, PathThree) {
  const auto l = laplacian(build_adjacency(oracle::path_graph(3)));
  EXPECT_EQ(l, (Matrix{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}}));
}

TEST(Laplacian, ZeroAdjacency) {
  EXPECT_EQ(laplacian(AdjacencyMatrix{Matrix(4, 4)}), Matrix(4, 4));
}

TEST(Laplacian, SymmetricWithZeroRowSums) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto l = laplacian(build_adjacency(oracle::random_graph(3 + trial % 8, 0.4, rng)));
    for (std::size_t i = 0; i < l.rows(); ++i) {
      double sum = 0;
      for (std::size_t j = 0; j < l.cols(); ++j) {
        sum += l(i, j);
        EXPECT_EQ(l(i, j), l(j, i));
      }
      EXPECT_EQ(sum, 0.0);
    }
  }
}

TEST(Lsgc, FirstCoefficientOnlyIsIdentity) {
  std::mt19937_64 rng(2);
  LSGCLayer layer(laplacian(build_adjacency(oracle::random_graph(6, 0.4, rng))), 3);
  layer.theta.value = Matrix{{1}, {0}, {0}};
  const auto x = oracle::random_vector(6, rng);
  EXPECT_EQ(lsgc_forward(layer, x), x);
}

TEST(Lsgc, LaplacianTimesUnitVector) {
  LSGCLayer layer(laplacian(build_adjacency(oracle::path_graph(3))), 2);
  layer.theta.value = Matrix{{0}, {1}};
  EXPECT_EQ(lsgc_forward(layer, std::vector<double>{1, 0, 0}), (Vector{1, -1, 0}));
}

TEST(Lsgc, PowersStartAtIdentity) {
  LSGCLayer layer(laplacian(build_adjacency(oracle::path_graph(4))), 3);
  EXPECT_EQ(layer.power(0), Matrix::identity(4));
  EXPECT_EQ(layer.power(2), oracle::naive_matmul(layer.power(1), layer.power(1)));
}

TEST(Lsgc, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  LSGCLayer layer(laplacian(build_adjacency(oracle::random_graph(6, 0.4, rng))), 3);
  layer.theta.value = oracle::random_matrix(3, 1, rng);
  const auto x = oracle::random_vector(6, rng);
  const auto g = oracle::random_vector(6, rng);
  auto loss = [&](std::span<const double> xv) {
    const auto y = lsgc_forward(layer, xv);
    double s = 0;
    for (std::size_t i = 0; i < 6; ++i) s += g[i] * y[i];
    return s;
  };
  layer.theta.zero_grad();
  const auto dx = lsgc_backward(layer, x, g);
  Parameter* ps[] = {&layer.theta};
  EXPECT_LT(fd_gradient_check([&] { return loss(x); }, ps).max_relative_error, 1e-4);
  for (std::size_t j = 0; j < 6; ++j) {
    auto xp = x, xm = x;
    xp[j] += 1e-4;
    xm[j] -= 1e-4;
    EXPECT_NEAR(dx[j], (loss(xp) - loss(xm)) / 2e-4, 1e-8);
  }
}

TEST(Lsgc, LocalToOrderMinusOneHops) {
  const std::size_t n = 9;
  const auto l = laplacian(build_adjacency(oracle::path_graph(n)));
  for (int order = 1; order <= 4; ++order) {
    LSGCLayer layer(l, order);
    std::mt19937_64 rng(order);
    layer.theta.value = oracle::random_matrix(order, 1, rng, 0.1, 1.0);
    auto x = oracle::random_vector(n, rng);
    const double before = lsgc_forward(layer, x)[0];
    x[order] += 2.0;  // order hops away from node 0
    EXPECT_EQ(lsgc_forward(layer, x)[0], before) << "order " << order;
    x[order - 1] += 2.0;
    if (order > 1) EXPECT_NE(lsgc_forward(layer, x)[0], before) << "order " << order;
  }
}

TEST(VanillaLstm, ZeroWeightsPredictZero) {
  GateParams params("lstm", 4, 4);
  std::mt19937_64 rng(4);
  EXPECT_EQ(vanilla_lstm_forward_sequence(params, oracle::random_matrix(5, 4, rng)).prediction(),
            Vector(4, 0.0));
}

TEST(VanillaLstm, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    GateParams params("lstm", 5, 5);
    std::vector<Parameter*> ps;
    params.collect(ps);
    randomize(ps, rng);
    const Matrix x = oracle::random_matrix(3, 5, rng);
    auto loss = [&] {
      double s = 0;
      const auto t = vanilla_lstm_forward_sequence(params, x);
      for (double h : t.prediction()) s += h * h;
      return s;
    };
    auto tape = vanilla_lstm_forward_sequence(params, x);
    Vector d_h(5);
    for (std::size_t i = 0; i < 5; ++i) d_h[i] = 2.0 * tape.prediction()[i];
    vanilla_lstm_backward_sequence(params, tape, d_h);
    EXPECT_LT(fd_gradient_check(loss, ps).max_relative_error, 1e-4) << "seed " << seed;
    EXPECT_THROW(vanilla_lstm_backward_sequence(params, tape, d_h), std::logic_error);
  }
}

TEST(Reduction, TgcLstmWithIdentityStructureEqualsLstm) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 6;
    GateParams lstm("lstm", n, n);
    std::vector<Parameter*> ps;
    lstm.collect(ps);
    randomize(ps, rng);

    std::vector<Matrix> masks{Matrix::identity(n)};
    TGCLSTMCell cell(masks);
    cell.tgc.weight(1).value = Matrix::identity(n);
    cell.neighbor.value = Matrix::identity(n);
    for (std::size_t g = 0; g < 4; ++g) {
      cell.gates.input[g].value = lstm.input[g].value;
      cell.gates.recurrent[g].value = lstm.recurrent[g].value;
      cell.gates.bias[g].value = lstm.bias[g].value;
    }
    const Matrix x = oracle::random_matrix(10, n, rng);
    const auto a = forward_sequence(cell, x).prediction();
    const auto b = vanilla_lstm_forward_sequence(lstm, x).prediction();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(LsgcLstm, FirstCoefficientOnlyEqualsLstm) {
  std::mt19937_64 rng(6);
  LSGCLSTM model{LSGCLayer(laplacian(build_adjacency(oracle::random_graph(5, 0.5, rng))), 3),
                 GateParams("lsgc", 5, 5)};
  std::vector<Parameter*> ps;
  model.gates.collect(ps);
  randomize(ps, rng);
  model.conv.theta.value = Matrix{{1}, {0}, {0}};
  const Matrix x = oracle::random_matrix(10, 5, rng);
  EXPECT_EQ(lsgc_lstm_forward(model, x).prediction(),
            vanilla_lstm_forward_sequence(model.gates, x).prediction());
}

TEST(LsgcLstm, ZeroWeightsPredictZero) {
  std::mt19937_64 rng(7);
  LSGCLSTM model{LSGCLayer(laplacian(build_adjacency(oracle::path_graph(4))), 3),
                 GateParams("lsgc", 4, 4)};
  model.conv.theta.value.fill(0.0);
  EXPECT_EQ(lsgc_lstm_forward(model, oracle::random_matrix(4, 4, rng)).prediction(), Vector(4, 0.0));
}

TEST(LsgcLstm, EndToEndGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    LSGCLSTM model{LSGCLayer(laplacian(build_adjacency(oracle::random_graph(5, 0.5, rng))), 3),
                   GateParams("lsgc", 5, 5)};
    std::vector<Parameter*> ps{&model.conv.theta};
    model.gates.collect(ps);
    randomize(ps, rng);
    const Matrix x = oracle::random_matrix(3, 5, rng);
    auto loss = [&] {
      double s = 0;
      const auto t = lsgc_lstm_forward(model, x);
      for (double h : t.prediction()) s += h * h;
      return s;
    };
    auto tape = lsgc_lstm_forward(model, x);
    Vector d_h(5);
    for (std::size_t i = 0; i < 5; ++i) d_h[i] = 2.0 * tape.prediction()[i];
    lsgc_lstm_backward(model, tape, d_h);
    EXPECT_LT(fd_gradient_check(loss, ps).max_relative_error, 1e-4) << "seed " << seed;
  }
}

}  // namespace
}  // namespace tgclstm
