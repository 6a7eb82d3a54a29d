#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tgclstm/matrix.hpp"

namespace tgclstm {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double length_miles = 0.0;
};

/// Undirected road network. Nodes are sensing locations, edges the road
/// segments between them. Free-flow speed is a network-wide scalar unless
/// per-node speeds are supplied.
class TrafficGraph {
 public:
  TrafficGraph(std::size_t node_count, std::vector<Edge> edges, double free_flow_mph = 60.0,
               std::vector<double> node_free_flow_mph = {});

  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  double network_free_flow_mph() const noexcept { return free_flow_mph_; }
  bool has_node_free_flow() const noexcept { return !node_free_flow_mph_.empty(); }
  double node_free_flow_mph(std::size_t node) const;

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  double free_flow_mph_;
  std::vector<double> node_free_flow_mph_;
};

/// Symmetric {0,1}, zero diagonal.
struct AdjacencyMatrix {
  Matrix values;
  std::size_t size() const noexcept { return values.rows(); }
};

/// min((A + I)^k, 1): symmetric {0,1}, ones on the diagonal.
struct KHopNeighborhood {
  int order = 1;
  Matrix values;
};

/// Shortest road distance in miles; +inf between disconnected nodes.
struct DistanceMatrix {
  Matrix values;
};

/// Pairs reachable within `horizon_steps` time quanta at free-flow speed.
struct FFRMatrix {
  Matrix values;
  int horizon_steps = 1;
  double time_quantum_min = 5.0;
};

/// Ã^k ⊙ FFR, the receptive field of a k-hop traffic graph convolution.
struct SupportMask {
  int order = 1;
  Matrix values;
};

AdjacencyMatrix build_adjacency(const TrafficGraph& graph);
KHopNeighborhood khop_neighborhood(const AdjacencyMatrix& adjacency, int k);
DistanceMatrix shortest_path_distances(const TrafficGraph& graph);

/// Pairwise free-flow speed S_ij: harmonic mean of the per-node speeds along
/// the shortest path from i to j, or the network scalar when no per-node
/// speeds exist. Disconnected pairs get the network scalar.
Matrix pairwise_free_flow_speeds(const TrafficGraph& graph);

/// FFR_ij = 1 iff S_ij · m · Δt / 60 ≥ Dist_ij (mph, minutes, miles). Diagonal is 1.
FFRMatrix free_flow_reachable(const DistanceMatrix& dist, const Matrix& pair_speeds_mph,
                              int horizon_steps, double time_quantum_min);
FFRMatrix free_flow_reachable(const DistanceMatrix& dist, double speed_mph, int horizon_steps,
                              double time_quantum_min);

SupportMask support_mask(const KHopNeighborhood& khop, const FFRMatrix& ffr);

/// Smallest k after which Ã^k ⊙ FFR no longer changes. For FFR supported inside
/// connected components this is the k where the mask equals FFR.
int compute_k_max(const AdjacencyMatrix& adjacency, const FFRMatrix& ffr);

/// Minimum edge count between every pair (BFS); -1 when unreachable.
std::vector<std::vector<int>> hop_distances(const AdjacencyMatrix& adjacency);

struct GraphOptions {
  int k_hops = 3;
  int horizon_steps = 3;
  double time_quantum_min = 5.0;
};

/// Everything the models need from a graph, built in one pass.
struct GraphMatrices {
  AdjacencyMatrix adjacency;
  std::vector<KHopNeighborhood> khop;  // orders 1..K
  DistanceMatrix distance;
  FFRMatrix ffr;
  std::vector<SupportMask> masks;  // orders 1..K
  int k_max = 1;
};

GraphMatrices build_graph_matrices(const TrafficGraph& graph, const GraphOptions& options);

// File formats.

/// One identifier per line; the line number is the node index.
std::vector<std::string> load_node_ids(const std::filesystem::path& path);
void save_node_ids(const std::filesystem::path& path, std::span<const std::string> ids);

/// Reads `node_i,node_j,length_miles` lines. Endpoints are resolved against
/// `node_ids` first, then as integer indices. `speed_limits` (optional) holds
/// `node_id,free_flow_mph` lines; nodes it omits use `free_flow_mph`.
TrafficGraph load_topology(const std::filesystem::path& topology,
                           std::span<const std::string> node_ids, double free_flow_mph = 60.0,
                           const std::filesystem::path& speed_limits = {});
void save_topology(const std::filesystem::path& path, const TrafficGraph& graph,
                   std::span<const std::string> node_ids);

}  // namespace tgclstm
