#include <gtest/gtest.h>

#include <set>

#include "tgclstm/gradient_suite.hpp"

namespace tgclstm {
namespace {

TEST(GradientSuite, CoversEveryComponent) {
  const auto r = run_gradient_suite(GradientSuiteOptions{});
  std::set<std::string> names;
  for (const auto& c : r.cases) {
    names.insert(c.component);
    EXPECT_GT(c.result.coordinates, 0u) << c.component;
  }
  for (const char* want :
       {"tgc", "weight-l1", "feature-l2", "tgc-lstm", "lstm", "lsgc", "lsgc-lstm", "total-loss"})
    EXPECT_TRUE(names.count(want)) << want;
}

TEST(GradientSuite, PassesOnTenSeeds) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GradientSuiteOptions o;
    o.seed = seed;
    const auto r = run_gradient_suite(o);
    EXPECT_TRUE(r.passed(1e-4)) << "seed " << seed << " max " << r.max_relative_error();
  }
}

TEST(GradientSuite, RandomGraphIsConnected) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_connected_graph(3 + i % 8, rng);
    for (const auto& row : hop_distances(build_adjacency(g)))
      for (int d : row) EXPECT_GE(d, 0);
  }
}

}  // namespace
}  // namespace tgclstm
