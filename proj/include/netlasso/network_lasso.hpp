#pragma once

#include "netlasso/csv.hpp"
#include "netlasso/graph.hpp"
#include "netlasso/lasso_admm.hpp"
#include "netlasso/numerics.hpp"
#include "netlasso/trip_data.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace netlasso {

/// minimize  sum_i 1/2 (a_i^T x_i - b_i)^2 + mu/2 ||x_i||^2
///         + lambda * sum_{(j,k) in E} w_jk ||x_j - x_k||_2
struct NetworkProblem {
  std::vector<NodeProblem> nodes;
  TripGraph graph;
  double lambda = 0.0;
  double mu = 1e-3;

  void validate() const;
  int node_count() const { return static_cast<int>(nodes.size()); }
  int feature_count() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().features.size()); }
};

/// ADMM iterates. x holds one column per node. z and u hold two columns per
/// edge e = (j, k): column 2e is the copy owned by j, column 2e+1 the copy
/// owned by k. u is the scaled multiplier.
struct NetworkState {
  DenseMatrix x;
  DenseMatrix z;
  DenseMatrix u;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iteration = 0;
};

struct NetworkSolution {
  DenseMatrix x;  // p x m
  std::vector<int> clusters;
  double consensus_fraction = 0.0;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  NetworkState state;

  int cluster_count() const { return component_count(clusters); }
};

/// Consensus/cluster tolerance default (relative).
inline constexpr double kDefaultConsensusEps = 1e-3;

double network_objective(const NetworkProblem& problem, const DenseMatrix& x);

/// Closed-form minimizer of
///   lambda_w ||z_j - z_k|| + rho/2 (||v_j - z_j||^2 + ||v_k - z_k||^2).
/// When ||v_j - v_k|| <= 2 lambda_w / rho both copies are the exact average.
std::pair<Vector, Vector> edge_prox(const Vector& v_j, const Vector& v_k, double lambda_w, double rho);

/// x-update for one node: argmin 1/2 (a^T x - b)^2 + mu/2 ||x||^2 + rho/2 sum ||x - c_n||^2
/// where `target_sum` = sum of c_n over the `degree` incident copies.
Vector node_update(const Vector& a, double b, double mu, double rho, int degree, const Vector& target_sum);

NetworkSolution solve_network_lasso(const NetworkProblem& problem, const AdmmConfig& config,
                                    const std::optional<NetworkState>& warm = std::nullopt,
                                    double consensus_eps = kDefaultConsensusEps);

/// True when ||x_j - x_k|| <= eps (1 + ||x_j||).
bool edge_in_consensus(const DenseMatrix& x, const Edge& e, double eps);
double consensus_fraction(const DenseMatrix& x, const TripGraph& graph, double eps = kDefaultConsensusEps);
/// Components of the in-consensus subgraph, labelled as connected_components.
std::vector<int> extract_clusters(const DenseMatrix& x, const TripGraph& graph, double eps = kDefaultConsensusEps);

/// Mean model per cluster (p x cluster_count).
DenseMatrix cluster_representatives(const DenseMatrix& x, const std::vector<int>& clusters);

/// Pooled ridge regression over all nodes: the consensus-limit solution.
Vector pooled_ridge(std::span<const NodeProblem> nodes, double mu);

/// max_i ||grad f_i(x_pooled)|| / min_e w_e. On a connected graph any
/// lambda >= m times this value makes full consensus optimal.
double consensus_forcing_level(const NetworkProblem& problem);

struct Prediction {
  int node_id = 0;
  int cluster_id = 0;
  double predicted = 0.0;
  double actual = 0.0;
  double squared_error = 0.0;
};

struct Predictions {
  std::vector<Prediction> rows;
  double mse = 0.0;
};

/// Each test node joins the cluster holding the majority of its k_assign
/// nearest training pickups (ties: smaller summed distance, then lower id)
/// and is scored with that cluster's mean model.
Predictions predict_fares(const DenseMatrix& x, const std::vector<int>& clusters,
                          std::span<const NodeProblem> train, std::span<const NodeProblem> test, int k_assign);

struct PathPoint {
  double lambda = 0.0;
  NetworkSolution solution;
  double objective = 0.0;
  double consensus_fraction = 0.0;
  int num_clusters = 0;
  double test_mse = 0.0;
  Predictions predictions;
};

struct PathResult {
  std::vector<PathPoint> points;

  /// Index of the lowest test MSE (first on ties).
  std::size_t best_index() const;
};

/// Warm-started solves over strictly increasing lambdas. When `test` is
/// empty no predictions are made and test_mse is NaN.
PathResult regularization_path(const NetworkProblem& problem, const AdmmConfig& config,
                               const std::vector<double>& lambdas, std::span<const NodeProblem> test, int k_assign,
                               double consensus_eps = kDefaultConsensusEps);

Table solution_table(std::span<const NodeProblem> nodes, const NetworkSolution& solution);
Table path_table(const PathResult& path);
Table prediction_table(const Predictions& predictions);

struct SavedSolution {
  std::vector<int> node_ids;
  std::vector<int> clusters;
  DenseMatrix x;  // p x m
};

/// Inverse of solution_table.
SavedSolution parse_solution_table(const Table& table);

}  // namespace netlasso
