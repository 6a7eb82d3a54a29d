#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgclstm/gradcheck.hpp"
#include "tgclstm/graph.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

struct GradientSuiteOptions {
  std::size_t nodes = 5;
  int order = 2;          // K
  std::size_t steps = 3;  // T
  std::uint64_t seed = 1;
  double lambda1 = 0.3;
  double lambda2 = 0.3;
  double tolerance = 1e-4;
};

struct GradientCase {
  std::string component;
  GradCheckResult result;
};

struct GradientSuiteResult {
  std::vector<GradientCase> cases;
  double max_relative_error() const;
  bool passed(double tolerance) const { return max_relative_error() < tolerance; }
};

/// Connected random graph on `nodes` vertices with random edge lengths and a
/// free-flow horizon short enough that some k-hop pairs are unreachable.
TrafficGraph random_connected_graph(std::size_t nodes, Rng& rng);

/// Finite-difference checks of every differentiable component: the graph
/// convolution, both regularizers, the TGC-LSTM sequence (cell-state gate
/// included), the LSGC layer and LSGC-LSTM, the vanilla LSTM and the full
/// regularized objective.
GradientSuiteResult run_gradient_suite(const GradientSuiteOptions& options);

}  // namespace tgclstm
