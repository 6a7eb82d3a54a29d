#include "tgclstm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "tgclstm/errors.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

namespace {

std::size_t grid_width(std::size_t nodes) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(nodes))));
}

}  // namespace

Topology parse_topology(std::string_view name) {
  if (name == "ring") return Topology::kRing;
  if (name == "path") return Topology::kPath;
  if (name == "grid") return Topology::kGrid;
  throw std::invalid_argument("unknown topology '" + std::string(name) +
                              "' (expected ring, path or grid)");
}

std::vector<std::vector<std::size_t>> downstream_neighbors(Topology topology, std::size_t nodes) {
  std::vector<std::vector<std::size_t>> down(nodes);
  switch (topology) {
    case Topology::kRing:
      for (std::size_t i = 0; i < nodes; ++i) down[i].push_back((i + 1) % nodes);
      break;
    case Topology::kPath:
      for (std::size_t i = 0; i + 1 < nodes; ++i) down[i].push_back(i + 1);
      break;
    case Topology::kGrid: {
      const std::size_t w = grid_width(nodes);
      for (std::size_t i = 0; i < nodes; ++i) {
        if ((i % w) + 1 < w && i + 1 < nodes) down[i].push_back(i + 1);
        if (i + w < nodes) down[i].push_back(i + w);
      }
      break;
    }
  }
  return down;
}

SyntheticData generate_synthetic(const SyntheticOptions& o) {
  if (o.nodes < 3) throw ValidationError("generate_synthetic: need at least 3 nodes");
  if (o.steps < 100) throw ValidationError("generate_synthetic: need at least 100 steps");
  if (!(o.free_flow_mph > 0.0) || !(o.edge_miles > 0.0) || o.noise_mph < 0.0 ||
      o.event_rate < 0.0 || o.event_rate > 1.0 || o.min_drop_mph > o.max_drop_mph) {
    throw ValidationError("generate_synthetic: invalid options");
  }

  const auto down = downstream_neighbors(o.topology, o.nodes);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < o.nodes; ++i)
    for (std::size_t j : down[i]) edges.push_back({i, j, o.edge_miles});
  TrafficGraph graph(o.nodes, std::move(edges), o.free_flow_mph);

  SpeedDataset ds;
  ds.step_seconds = kDefaultStepSeconds;
  for (std::size_t i = 0; i < o.nodes; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "S%03zu", i);
    ds.node_ids.emplace_back(id);
  }
  ds.speeds = Matrix(o.steps, o.nodes);
  ds.timestamps.resize(o.steps);

  Rng rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> drop(o.min_drop_mph, o.max_drop_mph);
  std::uniform_real_distribution<double> noise(-o.noise_mph, o.noise_mph);

  Vector deficit(o.nodes, 0.0);
  Vector next(o.nodes, 0.0);
  for (std::size_t t = 0; t < o.steps; ++t) {
    ds.timestamps[t] = o.start_timestamp + static_cast<std::int64_t>(t) * ds.step_seconds;
    for (std::size_t i = 0; i < o.nodes; ++i) {
      double d = o.recovery * deficit[i];
      for (std::size_t j : down[i]) d = std::max(d, o.propagation * deficit[j]);
      next[i] = t == 0 ? 0.0 : d;
    }
    if (o.event_rate > 0.0) {
      for (std::size_t i = 0; i < o.nodes; ++i) {
        if (unit(rng) < o.event_rate) next[i] = std::max(next[i], drop(rng));
      }
    }
    for (const auto& e : o.scripted_events) {
      if (e.step == t && e.node < o.nodes) next[e.node] = std::max(next[e.node], e.drop_mph);
    }
    for (std::size_t i = 0; i < o.nodes; ++i) {
      next[i] = std::min(next[i], o.free_flow_mph);
      const double eps = o.noise_mph > 0.0 ? noise(rng) : 0.0;
      ds.speeds(t, i) = std::max(0.0, o.free_flow_mph - next[i] + eps);
    }
    std::swap(deficit, next);
  }
  return {std::move(graph), std::move(ds)};
}

}  // namespace tgclstm
