#include "tgclstm/gradient_suite.hpp"

#include <algorithm>
#include <random>

#include "tgclstm/errors.hpp"
#include "tgclstm/forecaster.hpp"
#include "tgclstm/loss.hpp"
#include "tgclstm/lsgc.hpp"
#include "tgclstm/tgc.hpp"
#include "tgclstm/tgc_lstm.hpp"

namespace tgclstm {

double GradientSuiteResult::max_relative_error() const {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, c.result.max_relative_error);
  return worst;
}

TrafficGraph random_connected_graph(std::size_t nodes, Rng& rng) {
  std::uniform_real_distribution<double> length(0.5, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  std::vector<std::size_t> order(nodes);
  for (std::size_t i = 0; i < nodes; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  // random spanning tree, then a few chords
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    edges.push_back({order[pick(rng)], order[i], length(rng)});
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      const bool exists = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
        return (e.from == i && e.to == j) || (e.from == j && e.to == i);
      });
      if (!exists && unit(rng) < 0.15) edges.push_back({i, j, length(rng)});
    }
  }
  return TrafficGraph(nodes, std::move(edges), 60.0);
}

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = d(rng);
  return m;
}

Vector random_vector(std::size_t n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void randomize(std::span<Parameter* const> params, Rng& rng) {
  std::uniform_real_distribution<double> magnitude(0.05, 0.8);
  std::bernoulli_distribution negative(0.5);
  for (Parameter* p : params) {
    for (double& v : p->value.values()) v = negative(rng) ? -magnitude(rng) : magnitude(rng);
    p->apply_mask();
    p->zero_grad();
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradientSuiteResult run_gradient_suite(const GradientSuiteOptions& o) {
  if (o.nodes < 2) throw ValidationError("gradient suite needs at least 2 nodes");
  if (o.order < 1) throw ValidationError("gradient suite needs K >= 1");
  if (o.steps < 1) throw ValidationError("gradient suite needs T >= 1");

  Rng rng(o.seed);
  const TrafficGraph graph = random_connected_graph(o.nodes, rng);
  GraphOptions gopt;
  gopt.k_hops = o.order;
  gopt.horizon_steps = 2;
  gopt.time_quantum_min = 1.5;
  const GraphMatrices gm = build_graph_matrices(graph, gopt);
  const std::size_t n = o.nodes;

  const Matrix window = random_matrix(o.steps, n, rng, 0.0, 1.0);
  const Vector target = random_vector(n, rng, 0.0, 1.0);
  GradientSuiteResult out;

  // Graph convolution alone, probed through a random linear readout.
  {
    TGCLayer layer(gm.masks);
    std::vector<Parameter*> params;
    for (auto& w : layer.weights()) params.push_back(&w);
    randomize(params, rng);
    const Vector x = random_vector(n, rng, 0.0, 1.0);
    const Vector readout = random_vector(n * static_cast<std::size_t>(o.order), rng, -1.0, 1.0);
    tgc_backward(layer, x, readout);
    auto loss = [&] { return dot(tgc_forward(layer, x).flat, readout); };
    out.cases.push_back({"tgc", fd_gradient_check(loss, params)});

    for (Parameter* p : params) p->zero_grad();
    reg_weight_l1_backward(layer, 1.0);
    out.cases.push_back(
        {"weight-l1", fd_gradient_check([&] { return reg_weight_l1(layer); }, params)});

    for (Parameter* p : params) p->zero_grad();
    const TGCFeatures f = tgc_forward(layer, x);
    tgc_backward(layer, x, reg_feature_l2(f).grad);
    out.cases.push_back({"feature-l2", fd_gradient_check(
                                           [&] {
                                             return reg_feature_l2(tgc_forward(layer, x)).value;
                                           },
                                           params)});
  }

  // Each forecaster: MSE only, then the full objective where it applies.
  const ModelKind kinds[] = {ModelKind::kTgcLstm, ModelKind::kLstm, ModelKind::kLsgcLstm};
  for (ModelKind kind : kinds) {
    auto model = make_forecaster(make_structure(kind, gm, o.order), rng());
    auto params = model->parameters();
    randomize(params, rng);
    model->accumulate_sample(window, target, 0.0, 1.0);
    auto mse = [&] { return mean_squared_error(model->predict(window), target); };
    out.cases.push_back({std::string(model_kind_name(kind)), fd_gradient_check(mse, params)});
  }

  {
    auto model = make_forecaster(make_structure(ModelKind::kTgcLstm, gm, o.order), rng());
    auto params = model->parameters();
    randomize(params, rng);
    model->accumulate_sample(window, target, o.lambda2, 1.0);
    model->accumulate_weight_penalty(o.lambda1);
    auto total = [&] {
      return mean_squared_error(model->predict(window), target) +
             o.lambda1 * model->weight_penalty() + o.lambda2 * model->feature_penalty(window);
    };
    out.cases.push_back({"total-loss", fd_gradient_check(total, params)});
  }

  {
    LSGCLayer layer(laplacian(gm.adjacency), o.order);
    Parameter* params[] = {&layer.theta};
    randomize(params, rng);
    const Vector x = random_vector(n, rng, 0.0, 1.0);
    const Vector readout = random_vector(n, rng, -1.0, 1.0);
    lsgc_backward(layer, x, readout);
    auto loss = [&] { return dot(lsgc_forward(layer, x), readout); };
    out.cases.push_back({"lsgc", fd_gradient_check(loss, params)});
  }
  return out;
}

}  // namespace tgclstm
