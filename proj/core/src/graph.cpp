#include "tgclstm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tgclstm/csv.hpp"
#include "tgclstm/errors.hpp"

namespace tgclstm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Absorbs rounding in summed edge lengths, e.g. 0.1 + 0.2 vs a 0.3-mile reach.
constexpr double kReachSlackMiles = 1e-9;

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(what) + " must be square");
}

// Single-source Dijkstra over the undirected edge list.
struct ShortestPathTree {
  std::vector<double> dist;
  std::vector<std::size_t> parent;
};

using AdjacencyList = std::vector<std::vector<std::pair<std::size_t, double>>>;

AdjacencyList adjacency_list(const TrafficGraph& graph) {
  AdjacencyList adj(graph.node_count());
  for (const Edge& e : graph.edges()) {
    adj[e.from].emplace_back(e.to, e.length_miles);
    adj[e.to].emplace_back(e.from, e.length_miles);
  }
  return adj;
}

ShortestPathTree dijkstra(const AdjacencyList& adj, std::size_t source) {
  const std::size_t n = adj.size();
  ShortestPathTree tree{std::vector<double>(n, kInf), std::vector<std::size_t>(n, n)};
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  tree.dist[source] = 0.0;
  tree.parent[source] = source;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > tree.dist[u]) continue;
    for (auto [v, len] : adj[u]) {
      const double nd = d + len;
      if (nd < tree.dist[v]) {
        tree.dist[v] = nd;
        tree.parent[v] = u;
        queue.emplace(nd, v);
      }
    }
  }
  return tree;
}

Matrix boolean_product(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (a(i, k) == 0.0) continue;
      auto brow = b.row(k);
      auto orow = out.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (brow[j] != 0.0) orow[j] = 1.0;
      }
    }
  }
  return out;
}

}  // namespace

TrafficGraph::TrafficGraph(std::size_t node_count, std::vector<Edge> edges, double free_flow_mph,
                           std::vector<double> node_free_flow_mph)
    : node_count_(node_count),
      edges_(std::move(edges)),
      free_flow_mph_(free_flow_mph),
      node_free_flow_mph_(std::move(node_free_flow_mph)) {
  if (node_count_ == 0) throw ValidationError("TrafficGraph: node_count must be positive");
  if (!(free_flow_mph_ > 0.0) || !std::isfinite(free_flow_mph_)) {
    throw ValidationError("TrafficGraph: free-flow speed must be positive");
  }
  if (!node_free_flow_mph_.empty()) {
    if (node_free_flow_mph_.size() != node_count_) {
      throw ValidationError("TrafficGraph: per-node free-flow speeds must cover every node");
    }
    for (std::size_t i = 0; i < node_count_; ++i) {
      if (!(node_free_flow_mph_[i] > 0.0) || !std::isfinite(node_free_flow_mph_[i])) {
        throw ValidationError("TrafficGraph: free-flow speed of node " + std::to_string(i) +
                              " must be positive");
      }
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Edge& e : edges_) {
    const std::string label = "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ")";
    if (e.from >= node_count_ || e.to >= node_count_) {
      throw ValidationError("TrafficGraph: " + label + " references a node outside [0, " +
                            std::to_string(node_count_) + ")");
    }
    if (e.from == e.to) throw ValidationError("TrafficGraph: self-loop " + label);
    if (!(e.length_miles > 0.0) || !std::isfinite(e.length_miles)) {
      throw ValidationError("TrafficGraph: " + label + " must have positive length");
    }
    const auto key = std::minmax(e.from, e.to);
    if (!seen.insert(key).second) throw ValidationError("TrafficGraph: duplicate " + label);
  }
}

double TrafficGraph::node_free_flow_mph(std::size_t node) const {
  if (node >= node_count_) throw std::out_of_range("TrafficGraph: node index out of range");
  return node_free_flow_mph_.empty() ? free_flow_mph_ : node_free_flow_mph_[node];
}

AdjacencyMatrix build_adjacency(const TrafficGraph& graph) {
  const std::size_t n = graph.node_count();
  AdjacencyMatrix a{Matrix(n, n)};
  for (const Edge& e : graph.edges()) {
    a.values(e.from, e.to) = 1.0;
    a.values(e.to, e.from) = 1.0;
  }
  return a;
}

KHopNeighborhood khop_neighborhood(const AdjacencyMatrix& adjacency, int k) {
  if (k < 1) throw std::invalid_argument("khop_neighborhood: k must be >= 1, got " + std::to_string(k));
  require_square(adjacency.values, "adjacency");
  const std::size_t n = adjacency.size();
  Matrix neighborhood = adjacency.values;
  for (std::size_t i = 0; i < n; ++i) neighborhood(i, i) = 1.0;
  // Clipping after every product keeps entries in {0,1} and yields the same
  // support as clipping (A + I)^k once at the end.
  Matrix power = neighborhood;
  for (int step = 1; step < k; ++step) power = boolean_product(power, neighborhood);
  return {k, std::move(power)};
}

DistanceMatrix shortest_path_distances(const TrafficGraph& graph) {
  const std::size_t n = graph.node_count();
  const auto adj = adjacency_list(graph);
  DistanceMatrix dist{Matrix(n, n)};
  for (std::size_t s = 0; s < n; ++s) {
    const auto tree = dijkstra(adj, s);
    for (std::size_t t = 0; t < n; ++t) dist.values(s, t) = tree.dist[t];
  }
  // Enforce exact symmetry; summation order can differ between directions.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(dist.values(i, j), dist.values(j, i));
      dist.values(i, j) = dist.values(j, i) = d;
    }
  return dist;
}

Matrix pairwise_free_flow_speeds(const TrafficGraph& graph) {
  const std::size_t n = graph.node_count();
  Matrix speeds(n, n, graph.network_free_flow_mph());
  if (!graph.has_node_free_flow()) return speeds;
  const auto adj = adjacency_list(graph);
  for (std::size_t s = 0; s < n; ++s) {
    speeds(s, s) = graph.node_free_flow_mph(s);
    const auto tree = dijkstra(adj, s);
    for (std::size_t t = s + 1; t < n; ++t) {
      if (!std::isfinite(tree.dist[t])) continue;
      double inverse_sum = 0.0;
      std::size_t count = 0;
      for (std::size_t v = t;; v = tree.parent[v]) {
        inverse_sum += 1.0 / graph.node_free_flow_mph(v);
        ++count;
        if (v == s) break;
      }
      speeds(s, t) = speeds(t, s) = static_cast<double>(count) / inverse_sum;
    }
  }
  return speeds;
}

FFRMatrix free_flow_reachable(const DistanceMatrix& dist, const Matrix& pair_speeds_mph,
                              int horizon_steps, double time_quantum_min) {
  require_square(dist.values, "distance matrix");
  if (!dist.values.same_shape(pair_speeds_mph)) {
    throw ShapeError("free_flow_reachable: speed matrix " + shape_string(pair_speeds_mph) +
                     " does not match distance matrix " + shape_string(dist.values));
  }
  if (horizon_steps < 1) throw std::invalid_argument("free_flow_reachable: m must be >= 1");
  if (!(time_quantum_min > 0.0)) {
    throw std::invalid_argument("free_flow_reachable: time quantum must be positive");
  }
  for (double s : pair_speeds_mph.values()) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("free_flow_reachable: free-flow speeds must be positive");
    }
  }
  const std::size_t n = dist.values.rows();
  FFRMatrix ffr{Matrix(n, n), horizon_steps, time_quantum_min};
  const double hours = static_cast<double>(horizon_steps) * time_quantum_min / 60.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double reach = pair_speeds_mph(i, j) * hours;
      const double d = dist.values(i, j);
      ffr.values(i, j) = (i == j || reach - d + kReachSlackMiles >= 0.0) ? 1.0 : 0.0;
    }
  }
  return ffr;
}

FFRMatrix free_flow_reachable(const DistanceMatrix& dist, double speed_mph, int horizon_steps,
                              double time_quantum_min) {
  return free_flow_reachable(dist, Matrix(dist.values.rows(), dist.values.cols(), speed_mph),
                             horizon_steps, time_quantum_min);
}

SupportMask support_mask(const KHopNeighborhood& khop, const FFRMatrix& ffr) {
  if (!khop.values.same_shape(ffr.values)) {
    throw ShapeError("support_mask: k-hop " + shape_string(khop.values) + " vs FFR " +
                     shape_string(ffr.values));
  }
  return {khop.order, hadamard(khop.values, ffr.values)};
}

std::vector<std::vector<int>> hop_distances(const AdjacencyMatrix& adjacency) {
  require_square(adjacency.values, "adjacency");
  const std::size_t n = adjacency.size();
  std::vector<std::vector<int>> hops(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<std::size_t> frontier;
    hops[s][s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v = 0; v < n; ++v) {
        if (adjacency.values(u, v) != 0.0 && hops[s][v] < 0) {
          hops[s][v] = hops[s][u] + 1;
          frontier.push(v);
        }
      }
    }
  }
  return hops;
}

int compute_k_max(const AdjacencyMatrix& adjacency, const FFRMatrix& ffr) {
  if (!adjacency.values.same_shape(ffr.values)) {
    throw ShapeError("compute_k_max: adjacency and FFR shapes differ");
  }
  // Ã^k ⊙ FFR keeps FFR pairs within k hops, so the mask stops changing once k
  // covers the farthest reachable FFR pair.
  const auto hops = hop_distances(adjacency);
  int k_max = 1;
  for (std::size_t i = 0; i < hops.size(); ++i)
    for (std::size_t j = 0; j < hops.size(); ++j)
      if (ffr.values(i, j) != 0.0 && hops[i][j] > k_max) k_max = hops[i][j];
  return k_max;
}

GraphMatrices build_graph_matrices(const TrafficGraph& graph, const GraphOptions& options) {
  if (options.k_hops < 1) throw std::invalid_argument("k_hops must be >= 1");
  GraphMatrices gm;
  gm.adjacency = build_adjacency(graph);
  gm.distance = shortest_path_distances(graph);
  gm.ffr = free_flow_reachable(gm.distance, pairwise_free_flow_speeds(graph),
                               options.horizon_steps, options.time_quantum_min);
  for (int k = 1; k <= options.k_hops; ++k) {
    gm.khop.push_back(khop_neighborhood(gm.adjacency, k));
    gm.masks.push_back(support_mask(gm.khop.back(), gm.ffr));
  }
  gm.k_max = compute_k_max(gm.adjacency, gm.ffr);
  return gm;
}

std::vector<std::string> load_node_ids(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& line : csv::read_lines(path)) {
    std::string id(csv::trim(line));
    if (!index.emplace(id, ids.size()).second) {
      throw ValidationError(path.string() + ": duplicate node id '" + id + "'");
    }
    ids.push_back(std::move(id));
  }
  if (ids.empty()) throw ValidationError(path.string() + ": no node ids");
  return ids;
}

void save_node_ids(const std::filesystem::path& path, std::span<const std::string> ids) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

TrafficGraph load_topology(const std::filesystem::path& topology,
                           std::span<const std::string> node_ids, double free_flow_mph,
                           const std::filesystem::path& speed_limits) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);

  const auto resolve = [&](const std::string& token, std::size_t line) -> std::size_t {
    if (auto it = index.find(token); it != index.end()) return it->second;
    const auto context = topology.string() + ":" + std::to_string(line);
    long long idx = 0;
    try {
      idx = csv::parse_int(token, context);
    } catch (const FormatError&) {
      throw ValidationError(context + ": unknown node '" + token + "'");
    }
    if (idx < 0 || (!node_ids.empty() && static_cast<std::size_t>(idx) >= node_ids.size())) {
      throw ValidationError(context + ": node index " + token + " out of range");
    }
    return static_cast<std::size_t>(idx);
  };

  std::vector<Edge> edges;
  std::size_t max_index = 0;
  const auto lines = csv::read_lines(topology);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (csv::trim(lines[l]).front() == '#') continue;
    const auto fields = csv::split(lines[l]);
    if (fields.size() != 3) {
      throw FormatError(topology.string() + ":" + std::to_string(l + 1) +
                        ": expected node_i,node_j,length_miles");
    }
    Edge e{resolve(fields[0], l + 1), resolve(fields[1], l + 1),
           csv::parse_double(fields[2], topology.string() + ":" + std::to_string(l + 1))};
    max_index = std::max({max_index, e.from, e.to});
    edges.push_back(e);
  }
  const std::size_t n = node_ids.empty() ? (edges.empty() ? 0 : max_index + 1) : node_ids.size();

  std::vector<double> node_speeds;
  if (!speed_limits.empty()) {
    node_speeds.assign(n, free_flow_mph);
    for (const auto& line : csv::read_lines(speed_limits)) {
      const auto fields = csv::split(line);
      if (fields.size() != 2) {
        throw FormatError(speed_limits.string() + ": expected node_id,free_flow_mph");
      }
      const auto it = index.find(fields[0]);
      if (it == index.end()) {
        throw ValidationError(speed_limits.string() + ": unknown node '" + fields[0] + "'");
      }
      node_speeds[it->second] = csv::parse_double(fields[1], speed_limits.string());
    }
  }
  return TrafficGraph(n, std::move(edges), free_flow_mph, std::move(node_speeds));
}

void save_topology(const std::filesystem::path& path, const TrafficGraph& graph,
                   std::span<const std::string> node_ids) {
  if (node_ids.size() != graph.node_count()) {
    throw ShapeError("save_topology: node id count does not match graph");
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const Edge& e : graph.edges()) {
    out << node_ids[e.from] << ',' << node_ids[e.to] << ',' << csv::format_double(e.length_miles)
        << '\n';
  }
}

}  // namespace tgclstm
