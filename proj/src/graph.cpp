#include "netlasso/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

namespace netlasso {

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

TripGraph::TripGraph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)), adjacency_(static_cast<std::size_t>(node_count)) {
  if (node_count < 0) throw std::invalid_argument("graph: negative node count");
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.j < 0 || edge.k >= node_count || edge.j >= edge.k) {
      throw std::invalid_argument("graph: edge endpoints must satisfy 0 <= j < k < m");
    }
    if (!std::isfinite(edge.weight) || edge.weight <= 0.0) throw std::invalid_argument("graph: weights must be finite and > 0");
    if (!seen.emplace(edge.j, edge.k).second) throw std::invalid_argument("graph: duplicate edge");
    adjacency_[static_cast<std::size_t>(edge.j)].push_back({edge.k, static_cast<int>(e)});
    adjacency_[static_cast<std::size_t>(edge.k)].push_back({edge.j, static_cast<int>(e)});
  }
}

TripGraph TripGraph::scaled_weights(double factor) const {
  auto edges = edges_;
  for (auto& e : edges) e.weight *= factor;
  return TripGraph(node_count_, std::move(edges));
}

std::vector<int> nearest_indices(const GeoPoint& query, std::span<const GeoPoint> points, int k, int exclude) {
  std::vector<std::pair<double, int>> cand;
  cand.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(i) == exclude) continue;
    cand.emplace_back(haversine_km(query, points[i]), static_cast<int>(i));
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), cand.size());
  // pair ordering: distance, then lower index
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
  std::vector<int> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(cand[i].second);
  return out;
}

TripGraph build_knn_graph(std::span<const NodeProblem> nodes, int k, double weight_scale_km) {
  const int m = static_cast<int>(nodes.size());
  if (k < 1) throw std::invalid_argument("knn graph: k must be >= 1");
  if (k >= m) throw std::invalid_argument("knn graph: k must be smaller than the node count");
  if (!(weight_scale_km > 0.0)) throw std::invalid_argument("knn graph: weight scale must be > 0");

  std::vector<GeoPoint> points;
  points.reserve(nodes.size());
  for (const auto& n : nodes) points.push_back(pickup_point(n));

  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i) {
    for (int nb : nearest_indices(points[static_cast<std::size_t>(i)], points, k, i)) {
      pairs.emplace(std::min(i, nb), std::max(i, nb));
    }
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [j, kk] : pairs) {
    const double d = haversine_km(points[static_cast<std::size_t>(j)], points[static_cast<std::size_t>(kk)]);
    edges.push_back({j, kk, d, std::exp(-d / weight_scale_km)});
  }
  return TripGraph(m, std::move(edges));
}

DenseMatrix distance_matrix(std::span<const NodeProblem> nodes) {
  if (nodes.empty()) throw std::invalid_argument("distance_matrix: no nodes");
  const auto m = static_cast<Eigen::Index>(nodes.size());
  DenseMatrix d = DenseMatrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      d(a, b) = d(b, a) = haversine_km(pickup_point(nodes[static_cast<std::size_t>(a)]),
                                       pickup_point(nodes[static_cast<std::size_t>(b)]));
    }
  }
  return d;
}

Table distance_table(std::span<const NodeProblem> nodes) {
  const DenseMatrix d = distance_matrix(nodes);
  Table t;
  t.header.push_back("node_id");
  for (const auto& n : nodes) t.header.push_back(std::to_string(n.node_id));
  for (Eigen::Index a = 0; a < d.rows(); ++a) {
    std::vector<std::string> row = {std::to_string(nodes[static_cast<std::size_t>(a)].node_id)};
    for (Eigen::Index b = 0; b < d.cols(); ++b) row.push_back(format_double(d(a, b)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[static_cast<std::size_t>(v)] != v) {
    parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    v = parent[static_cast<std::size_t>(v)];
  }
  return v;
}

}  // namespace

std::vector<int> connected_components(int node_count, const std::vector<Edge>& kept) {
  std::vector<int> parent(static_cast<std::size_t>(node_count));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& e : kept) {
    const int a = find_root(parent, e.j);
    const int b = find_root(parent, e.k);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<int> label(static_cast<std::size_t>(node_count), -1);
  std::vector<int> root_label(static_cast<std::size_t>(node_count), -1);
  int next = 0;
  for (int v = 0; v < node_count; ++v) {
    const int r = find_root(parent, v);
    if (root_label[static_cast<std::size_t>(r)] < 0) root_label[static_cast<std::size_t>(r)] = next++;
    label[static_cast<std::size_t>(v)] = root_label[static_cast<std::size_t>(r)];
  }
  return label;
}

int component_count(const std::vector<int>& labels) {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return mx + 1;
}

std::vector<int> spatial_components(const TripGraph& graph, double cut_km) {
  if (!(cut_km >= 0.0)) throw std::invalid_argument("spatial_components: cut must be >= 0");
  std::vector<Edge> kept;
  for (const auto& e : graph.edges()) {
    if (e.distance_km <= cut_km) kept.push_back(e);
  }
  return connected_components(graph.node_count(), kept);
}

Table component_table(std::span<const NodeProblem> nodes, const std::vector<int>& labels) {
  if (labels.size() != nodes.size()) throw std::invalid_argument("component_table: size mismatch");
  Table t;
  t.header = {"node_id", "component_id"};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    t.rows.push_back({std::to_string(nodes[i].node_id), std::to_string(labels[i])});
  }
  return t;
}

Table edge_table(const TripGraph& graph, std::span<const NodeProblem> nodes) {
  if (static_cast<int>(nodes.size()) != graph.node_count()) throw std::invalid_argument("edge_table: size mismatch");
  Table t;
  t.header = {"j", "k", "distance_km", "weight"};
  for (const auto& e : graph.edges()) {
    t.rows.push_back({std::to_string(nodes[static_cast<std::size_t>(e.j)].node_id),
                      std::to_string(nodes[static_cast<std::size_t>(e.k)].node_id), format_double(e.distance_km),
                      format_double(e.weight)});
  }
  return t;
}

}  // namespace netlasso
