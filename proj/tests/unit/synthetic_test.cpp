#include <gtest/gtest.h>

#include "tgclstm/errors.hpp"
#include "tgclstm/synthetic.hpp"

namespace tgclstm {
namespace {

SyntheticOptions quiet(std::size_t nodes = 20, std::size_t steps = 200) {
  SyntheticOptions o;
  o.nodes = nodes;
  o.steps = steps;
  o.event_rate = 0.0;
  o.noise_mph = 0.0;
  return o;
}

TEST(Synthetic, NoEventsNoNoiseIsConstantFreeFlow) {
  const auto d = generate_synthetic(quiet());
  EXPECT_EQ(d.dataset.speeds, Matrix(200, 20, 60.0));
  EXPECT_EQ(d.dataset.nodes(), 20u);
  EXPECT_EQ(d.dataset.node_ids.front(), "S000");
  EXPECT_EQ(d.dataset.timestamps[1] - d.dataset.timestamps[0], 300);
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  SyntheticOptions o;
  o.steps = 500;
  o.seed = 9;
  const auto a = generate_synthetic(o), b = generate_synthetic(o);
  EXPECT_EQ(a.dataset.speeds, b.dataset.speeds);
  o.seed = 10;
  EXPECT_NE(generate_synthetic(o).dataset.speeds, a.dataset.speeds);
}

TEST(Synthetic, EventReachesUpstreamNeighbourOneStepLater) {
  for (auto topology : {Topology::kRing, Topology::kPath}) {
    auto o = quiet(10, 120);
    o.topology = topology;
    const std::size_t j = 5, t = 50;
    o.scripted_events = {{j, t, 30.0}};
    const auto s = generate_synthetic(o).dataset.speeds;
    EXPECT_EQ(s(t, j), 30.0);
    EXPECT_EQ(s(t - 1, j), 60.0);
    EXPECT_EQ(s(t, j - 1), 60.0);
    EXPECT_LT(s(t + 1, j - 1), 60.0);
    EXPECT_EQ(s(t + 1, j + 1), 60.0);
    EXPECT_EQ(s(t + 1, j - 2), 60.0);
    EXPECT_LT(s(t + 2, j - 2), 60.0);
  }
}

TEST(Synthetic, SpeedsStayWithinNoiseBounds) {
  SyntheticOptions o;
  o.steps = 3000;
  o.event_rate = 0.02;
  o.seed = 4;
  const auto s = generate_synthetic(o).dataset.speeds;
  for (double v : s.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 60.0 + o.noise_mph);
  }
}

TEST(Synthetic, GraphUsesOneMileEdges) {
  const auto d = generate_synthetic(quiet(6));
  EXPECT_EQ(d.graph.edges().size(), 6u);
  for (const auto& e : d.graph.edges()) EXPECT_EQ(e.length_miles, 1.0);
  EXPECT_EQ(d.graph.network_free_flow_mph(), 60.0);
  auto g = quiet(9);
  g.topology = Topology::kGrid;
  EXPECT_EQ(generate_synthetic(g).graph.edges().size(), 12u);
}

TEST(Synthetic, Errors) {
  EXPECT_THROW(generate_synthetic(quiet(2)), ValidationError);
  EXPECT_THROW(generate_synthetic(quiet(5, 99)), ValidationError);
  EXPECT_THROW(parse_topology("star"), std::invalid_argument);
}

}  // namespace
}  // namespace tgclstm
