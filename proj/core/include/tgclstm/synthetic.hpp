#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tgclstm/dataset.hpp"
#include "tgclstm/graph.hpp"

namespace tgclstm {

enum class Topology { kRing, kPath, kGrid };
Topology parse_topology(std::string_view name);

/// A congestion event injected at a fixed place and time.
struct CongestionEvent {
  std::size_t node = 0;
  std::size_t step = 0;
  double drop_mph = 30.0;
};

/// Congestion-wave generator. Traffic flows toward increasing node index
/// (and, on a grid, toward increasing row/column), so a node's upstream
/// neighbours are the ones with smaller index. Each node carries a speed
/// deficit d below free flow:
///
///   d_i(t+1) = max(recovery · d_i(t), propagation · max_{j downstream of i} d_j(t))
///
/// then random and scripted events raise d to at least their drop, and the
/// observed speed is free_flow − d plus uniform noise in ±noise_mph, clamped at 0.
struct SyntheticOptions {
  std::size_t nodes = 20;
  Topology topology = Topology::kRing;
  std::size_t steps = 5000;
  std::uint64_t seed = 0;

  double free_flow_mph = 60.0;
  double edge_miles = 1.0;
  double event_rate = 0.004;  // per node per step
  double min_drop_mph = 20.0;
  double max_drop_mph = 40.0;
  double recovery = 0.9;
  double propagation = 0.85;
  double noise_mph = 2.0;
  std::vector<CongestionEvent> scripted_events;
  std::int64_t start_timestamp = 1420070400;  // 2015-01-01T00:00:00Z
};

struct SyntheticData {
  TrafficGraph graph;
  SpeedDataset dataset;
};

/// Throws ValidationError for fewer than 3 nodes or fewer than 100 steps.
SyntheticData generate_synthetic(const SyntheticOptions& options);

/// Downstream neighbours of each node for the given layout.
std::vector<std::vector<std::size_t>> downstream_neighbors(Topology topology, std::size_t nodes);

}  // namespace tgclstm
