#include "netlasso/network_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace netlasso {

void NetworkProblem::validate() const {
  if (nodes.empty()) throw std::invalid_argument("network lasso: no nodes");
  if (graph.node_count() != node_count()) throw std::invalid_argument("network lasso: graph size does not match nodes");
  const auto p = nodes.front().features.size();
  if (p == 0) throw std::invalid_argument("network lasso: empty feature vectors");
  for (const auto& n : nodes) {
    if (n.features.size() != p) throw std::invalid_argument("network lasso: feature vectors differ in length");
    require_finite(n.features, "node features");
    if (!std::isfinite(n.response)) throw std::invalid_argument("network lasso: non-finite response");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("network lasso: lambda must be >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("network lasso: mu must be >= 0");
}

double network_objective(const NetworkProblem& problem, const DenseMatrix& x) {
  double total = 0.0;
  for (int i = 0; i < problem.node_count(); ++i) {
    const auto& n = problem.nodes[static_cast<std::size_t>(i)];
    const double r = n.features.dot(x.col(i)) - n.response;
    total += 0.5 * r * r + 0.5 * problem.mu * x.col(i).squaredNorm();
  }
  for (const auto& e : problem.graph.edges()) {
    total += problem.lambda * e.weight * (x.col(e.j) - x.col(e.k)).norm();
  }
  return total;
}

std::pair<Vector, Vector> edge_prox(const Vector& v_j, const Vector& v_k, double lambda_w, double rho) {
  if (lambda_w == 0.0) return {v_j, v_k};
  const double gap = (v_j - v_k).norm();
  if (gap <= 2.0 * lambda_w / rho) {
    Vector avg = 0.5 * v_j + 0.5 * v_k;
    return {avg, avg};
  }
  const double theta = 1.0 - lambda_w / (rho * gap);
  return {theta * v_j + (1.0 - theta) * v_k, theta * v_k + (1.0 - theta) * v_j};
}

Vector node_update(const Vector& a, double b, double mu, double rho, int degree, const Vector& target_sum) {
  const double c = mu + rho * degree;
  const double aa = a.squaredNorm();
  if (c == 0.0) {
    // no ridge, no edges: minimum-norm least-squares point
    return aa > 0.0 ? Vector(a * (b / aa)) : Vector(Vector::Zero(a.size()));
  }
  // Sherman-Morrison on (c I + a a^T)
  const Vector rhs = a * b + rho * target_sum;
  return rhs / c - a * (a.dot(rhs) / (c * (c + aa)));
}

NetworkSolution solve_network_lasso(const NetworkProblem& problem, const AdmmConfig& config,
                                    const std::optional<NetworkState>& warm, double consensus_eps) {
  problem.validate();
  config.validate();
  if (!(consensus_eps > 0.0)) throw std::invalid_argument("network lasso: consensus eps must be > 0");

  const int m = problem.node_count();
  const int p = problem.feature_count();
  const auto& edges = problem.graph.edges();
  const int directed = 2 * static_cast<int>(edges.size());
  const double rho = config.rho;

  NetworkState s;
  if (warm) {
    if (warm->x.rows() != p || warm->x.cols() != m || warm->z.rows() != p || warm->z.cols() != directed ||
        warm->u.rows() != p || warm->u.cols() != directed) {
      throw std::invalid_argument("network lasso: warm start does not match problem shape");
    }
    s = *warm;
    s.iteration = 0;
  } else {
    s.x = DenseMatrix::Zero(p, m);
    s.z = DenseMatrix::Zero(p, directed);
    s.u = DenseMatrix::Zero(p, directed);
  }

  const double sqrt_primal_dim = std::sqrt(static_cast<double>(directed) * p);
  const double sqrt_dual_dim = std::sqrt(static_cast<double>(m) * p);
  Vector target(p);
  DenseMatrix z_old(p, directed);
  bool converged = false;

  for (int it = 0; it < config.max_iters; ++it) {
    // x-update, independent per node
    for (int i = 0; i < m; ++i) {
      const auto& node = problem.nodes[static_cast<std::size_t>(i)];
      target.setZero();
      for (const auto& nb : problem.graph.neighbors(i)) {
        const int col = 2 * nb.edge + (edges[static_cast<std::size_t>(nb.edge)].j == i ? 0 : 1);
        target += s.z.col(col) - s.u.col(col);
      }
      s.x.col(i) = node_update(node.features, node.response, problem.mu, rho, problem.graph.degree(i), target);
    }

    // z-update, independent per edge
    z_old = s.z;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      const int cj = 2 * static_cast<int>(e);
      const int ck = cj + 1;
      const Vector v_j = s.x.col(edge.j) + s.u.col(cj);
      const Vector v_k = s.x.col(edge.k) + s.u.col(ck);
      auto [z_j, z_k] = edge_prox(v_j, v_k, problem.lambda * edge.weight, rho);
      s.z.col(cj) = z_j;
      s.z.col(ck) = z_k;
    }

    // u-update and residuals
    double r2 = 0.0;
    double x_stack2 = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      const int cj = 2 * static_cast<int>(e);
      const int ck = cj + 1;
      const Vector rj = s.x.col(edge.j) - s.z.col(cj);
      const Vector rk = s.x.col(edge.k) - s.z.col(ck);
      s.u.col(cj) += rj;
      s.u.col(ck) += rk;
      r2 += rj.squaredNorm() + rk.squaredNorm();
      x_stack2 += s.x.col(edge.j).squaredNorm() + s.x.col(edge.k).squaredNorm();
    }
    s.primal_residual = std::sqrt(r2);
    s.dual_residual = rho * (s.z - z_old).norm();
    s.iteration = it + 1;

    const double eps_pri = sqrt_primal_dim * config.eps_abs + config.eps_rel * std::max(std::sqrt(x_stack2), s.z.norm());
    const double eps_dual = sqrt_dual_dim * config.eps_abs + config.eps_rel * rho * s.u.norm();
    if (s.primal_residual <= eps_pri && s.dual_residual <= eps_dual) {
      converged = true;
      break;
    }
  }

  NetworkSolution sol;
  sol.x = s.x;
  sol.converged = converged;
  sol.iterations = s.iteration;
  sol.objective = network_objective(problem, sol.x);
  sol.consensus_fraction = consensus_fraction(sol.x, problem.graph, consensus_eps);
  sol.clusters = extract_clusters(sol.x, problem.graph, consensus_eps);
  sol.state = std::move(s);
  return sol;
}

bool edge_in_consensus(const DenseMatrix& x, const Edge& e, double eps) {
  return (x.col(e.j) - x.col(e.k)).norm() <= eps * (1.0 + x.col(e.j).norm());
}

double consensus_fraction(const DenseMatrix& x, const TripGraph& graph, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("consensus_fraction: eps must be > 0");
  const auto& edges = graph.edges();
  if (edges.empty()) return 1.0;
  const auto agree = std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return edge_in_consensus(x, e, eps); });
  return static_cast<double>(agree) / static_cast<double>(edges.size());
}

std::vector<int> extract_clusters(const DenseMatrix& x, const TripGraph& graph, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("extract_clusters: eps must be > 0");
  std::vector<Edge> kept;
  for (const auto& e : graph.edges()) {
    if (edge_in_consensus(x, e, eps)) kept.push_back(e);
  }
  return connected_components(graph.node_count(), kept);
}

DenseMatrix cluster_representatives(const DenseMatrix& x, const std::vector<int>& clusters) {
  if (static_cast<Eigen::Index>(clusters.size()) != x.cols()) {
    throw std::invalid_argument("cluster_representatives: cluster labels do not match solution");
  }
  const int count = component_count(clusters);
  DenseMatrix rep = DenseMatrix::Zero(x.rows(), count);
  std::vector<int> members(static_cast<std::size_t>(count), 0);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    rep.col(clusters[i]) += x.col(static_cast<Eigen::Index>(i));
    ++members[static_cast<std::size_t>(clusters[i])];
  }
  for (int c = 0; c < count; ++c) {
    if (members[static_cast<std::size_t>(c)] > 0) rep.col(c) /= members[static_cast<std::size_t>(c)];
  }
  return rep;
}

Vector pooled_ridge(std::span<const NodeProblem> nodes, double mu) {
  if (nodes.empty()) throw std::invalid_argument("pooled_ridge: no nodes");
  const auto p = nodes.front().features.size();
  DenseMatrix gram = static_cast<double>(nodes.size()) * mu * DenseMatrix::Identity(p, p);
  Vector rhs = Vector::Zero(p);
  for (const auto& n : nodes) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(n.features);
    rhs += n.features * n.response;
  }
  return gram.selfadjointView<Eigen::Lower>().ldlt().solve(rhs);
}

double consensus_forcing_level(const NetworkProblem& problem) {
  problem.validate();
  if (problem.graph.edges().empty()) return 0.0;
  const Vector pooled = pooled_ridge(problem.nodes, problem.mu);
  double max_grad = 0.0;
  for (const auto& n : problem.nodes) {
    const Vector g = n.features * (n.features.dot(pooled) - n.response) + problem.mu * pooled;
    max_grad = std::max(max_grad, g.norm());
  }
  double min_w = std::numeric_limits<double>::infinity();
  for (const auto& e : problem.graph.edges()) min_w = std::min(min_w, e.weight);
  return max_grad / min_w;
}

Predictions predict_fares(const DenseMatrix& x, const std::vector<int>& clusters, std::span<const NodeProblem> train,
                          std::span<const NodeProblem> test, int k_assign) {
  if (test.empty()) throw std::invalid_argument("predict_fares: empty test set");
  if (train.empty()) throw std::invalid_argument("predict_fares: empty training set");
  if (k_assign < 1) throw std::invalid_argument("predict_fares: k_assign must be >= 1");
  if (x.cols() != static_cast<Eigen::Index>(train.size()) || clusters.size() != train.size()) {
    throw std::invalid_argument("predict_fares: solution does not match training nodes");
  }
  const DenseMatrix rep = cluster_representatives(x, clusters);
  std::vector<GeoPoint> points;
  points.reserve(train.size());
  for (const auto& n : train) points.push_back(pickup_point(n));

  Predictions out;
  double total = 0.0;
  for (const auto& t : test) {
    if (t.features.size() != x.rows()) throw std::invalid_argument("predict_fares: test feature length mismatch");
    const GeoPoint q = pickup_point(t);
    // cluster -> (votes, summed distance)
    std::map<int, std::pair<int, double>> tally;
    for (int idx : nearest_indices(q, points, k_assign)) {
      auto& [votes, dist] = tally[clusters[static_cast<std::size_t>(idx)]];
      ++votes;
      dist += haversine_km(q, points[static_cast<std::size_t>(idx)]);
    }
    int best = -1;
    std::pair<int, double> best_score{0, 0.0};
    for (const auto& [cluster, score] : tally) {
      const bool better = best < 0 || score.first > best_score.first ||
                          (score.first == best_score.first && score.second < best_score.second);
      if (better) {
        best = cluster;
        best_score = score;
      }
    }
    Prediction row;
    row.node_id = t.node_id;
    row.cluster_id = best;
    row.predicted = rep.col(best).dot(t.features);
    row.actual = t.response;
    row.squared_error = (row.predicted - row.actual) * (row.predicted - row.actual);
    total += row.squared_error;
    out.rows.push_back(row);
  }
  out.mse = total / static_cast<double>(test.size());
  return out;
}

std::size_t PathResult::best_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].test_mse < points[best].test_mse) best = i;
  }
  return best;
}

PathResult regularization_path(const NetworkProblem& problem, const AdmmConfig& config,
                               const std::vector<double>& lambdas, std::span<const NodeProblem> test, int k_assign,
                               double consensus_eps) {
  if (lambdas.empty()) throw std::invalid_argument("regularization_path: empty lambda grid");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("regularization_path: lambdas must be strictly increasing");
  }
  NetworkProblem step = problem;
  PathResult path;
  std::optional<NetworkState> warm;
  for (double lambda : lambdas) {
    step.lambda = lambda;
    PathPoint pt;
    pt.lambda = lambda;
    pt.solution = solve_network_lasso(step, config, warm, consensus_eps);
    pt.objective = pt.solution.objective;
    pt.consensus_fraction = pt.solution.consensus_fraction;
    pt.num_clusters = pt.solution.cluster_count();
    if (!test.empty()) {
      pt.predictions = predict_fares(pt.solution.x, pt.solution.clusters, problem.nodes, test, k_assign);
      pt.test_mse = pt.predictions.mse;
    } else {
      pt.test_mse = std::numeric_limits<double>::quiet_NaN();
    }
    warm = pt.solution.state;
    path.points.push_back(std::move(pt));
  }
  return path;
}

Table solution_table(std::span<const NodeProblem> nodes, const NetworkSolution& solution) {
  if (static_cast<Eigen::Index>(nodes.size()) != solution.x.cols()) {
    throw std::invalid_argument("solution_table: node count mismatch");
  }
  Table t;
  t.header = {"node_id", "cluster_id"};
  for (Eigen::Index f = 0; f < solution.x.rows(); ++f) t.header.push_back("x_" + std::to_string(f));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<std::string> row = {std::to_string(nodes[i].node_id), std::to_string(solution.clusters[i])};
    for (Eigen::Index f = 0; f < solution.x.rows(); ++f) {
      row.push_back(format_double(solution.x(f, static_cast<Eigen::Index>(i))));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table path_table(const PathResult& path) {
  Table t;
  t.header = {"lambda", "objective", "consensus_fraction", "num_clusters", "test_mse"};
  for (const auto& pt : path.points) {
    t.rows.push_back({format_double(pt.lambda), format_double(pt.objective), format_double(pt.consensus_fraction),
                      std::to_string(pt.num_clusters), format_double(pt.test_mse)});
  }
  return t;
}

Table prediction_table(const Predictions& predictions) {
  Table t;
  t.header = {"node_id", "cluster_id", "predicted", "actual", "squared_error"};
  for (const auto& r : predictions.rows) {
    t.rows.push_back({std::to_string(r.node_id), std::to_string(r.cluster_id), format_double(r.predicted),
                      format_double(r.actual), format_double(r.squared_error)});
  }
  return t;
}

SavedSolution parse_solution_table(const Table& table) {
  if (table.header.size() < 3 || table.header[0] != "node_id" || table.header[1] != "cluster_id") {
    throw std::invalid_argument("solution table: expected header node_id,cluster_id,x_0,...");
  }
  const auto p = static_cast<Eigen::Index>(table.header.size() - 2);
  SavedSolution s;
  s.x.resize(p, static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != table.header.size()) throw std::invalid_argument("solution table: ragged row " + std::to_string(i + 1));
    s.node_ids.push_back(static_cast<int>(parse_int(row[0])));
    s.clusters.push_back(static_cast<int>(parse_int(row[1])));
    for (Eigen::Index f = 0; f < p; ++f) {
      s.x(f, static_cast<Eigen::Index>(i)) = parse_double(row[static_cast<std::size_t>(f) + 2]);
    }
  }
  return s;
}

}  // namespace netlasso
