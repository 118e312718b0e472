#pragma once

#include "netlasso/csv.hpp"
#include "netlasso/numerics.hpp"
#include "netlasso/trip_data.hpp"

#include <span>
#include <vector>

namespace netlasso {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

inline GeoPoint pickup_point(const NodeProblem& n) { return {n.pickup_lat, n.pickup_lon}; }

struct Edge {
  int j = 0;  // j < k
  int k = 0;
  double distance_km = 0.0;
  double weight = 1.0;
};

struct Neighbor {
  int node = 0;
  int edge = 0;  // index into TripGraph::edges()
};

/// Simple weighted undirected graph on nodes 0..m-1 (positions in the node
/// sequence it was built from). Immutable once built.
class TripGraph {
 public:
  TripGraph() = default;
  /// Validates: j < k < m, finite positive weights, no duplicates.
  TripGraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int node) const { return adjacency_[static_cast<std::size_t>(node)]; }
  int degree(int node) const { return static_cast<int>(neighbors(node).size()); }

  /// Same topology with every weight multiplied by `factor`.
  TripGraph scaled_weights(double factor) const;

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Links every node to its k nearest pickups (ties to the lower index);
/// mutual picks collapse into one edge. Weight = exp(-distance / scale).
TripGraph build_knn_graph(std::span<const NodeProblem> nodes, int k, double weight_scale_km = 2.0);

/// Indices of the k nearest points to `query` among `points`, nearest first,
/// ties broken by lower index. `exclude` (if >= 0) is skipped.
std::vector<int> nearest_indices(const GeoPoint& query, std::span<const GeoPoint> points, int k, int exclude = -1);

DenseMatrix distance_matrix(std::span<const NodeProblem> nodes);
/// Square CSV labelled by node_id.
Table distance_table(std::span<const NodeProblem> nodes);

/// Connected components labelled 0, 1, ... in order of their lowest member.
std::vector<int> connected_components(int node_count, const std::vector<Edge>& kept);
int component_count(const std::vector<int>& labels);

/// Components after removing edges longer than cut_km.
std::vector<int> spatial_components(const TripGraph& graph, double cut_km);
Table component_table(std::span<const NodeProblem> nodes, const std::vector<int>& labels);

/// `j,k,distance_km,weight` with endpoints written as node ids.
Table edge_table(const TripGraph& graph, std::span<const NodeProblem> nodes);

}  // namespace netlasso
