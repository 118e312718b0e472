#pragma once

#include "netlasso/numerics.hpp"

#include <optional>
#include <vector>

namespace netlasso {

/// minimize 1/2 ||A x - b||^2 + lambda |x|_1
struct LassoProblem {
  DenseMatrix a;
  Vector b;
  double lambda = 0.0;

  void validate() const;
  /// Objective evaluated at an arbitrary point.
  double objective(const Vector& x) const;
  /// ||A^T b||_inf, the smallest lambda whose solution is identically zero.
  double lambda_max() const;
};

struct AdmmConfig {
  double rho = 1.2;
  double alpha = 1.8;  // over-relaxation, in [1, 2]
  int max_iters = 1000;
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;

  void validate() const;
};

/// Iterates carried between solves on a regularization path.
struct LassoWarmStart {
  Vector z;
  Vector u;
};

struct LassoSolution {
  Vector x;
  Vector z;
  Vector u;  // unscaled multiplier
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  std::vector<double> objective_history;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  int nonzero_count = 0;

  double final_objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
};

/// |z_i| above this counts as nonzero.
inline constexpr double kNonzeroThreshold = 1e-8;

int count_nonzeros(const Vector& z, double threshold = kNonzeroThreshold);

/// Over-relaxed ADMM on the split x - z = 0:
///
///   x <- (A^T A + rho I)^{-1} (A^T b + rho z - u)
///   x^ <- alpha x + (1 - alpha) z
///   z <- S_{lambda/rho}(x^ + u / rho)
///   u <- u + rho (x^ - z)
///
/// Stops when both residuals fall under the usual absolute+relative
/// thresholds, or after max_iters with converged = false.
LassoSolution solve_lasso(const LassoProblem& problem, const AdmmConfig& config,
                          const std::optional<LassoWarmStart>& warm = std::nullopt);

/// Same as above with a caller-supplied factorization of (A^T A + rho I).
LassoSolution solve_lasso(const LassoProblem& problem, const AdmmConfig& config,
                          const FactoredSystem& factored,
                          const std::optional<LassoWarmStart>& warm = std::nullopt);

/// One warm-started solve per lambda. Solves run from the largest lambda
/// down; results come back in the order given. The factorization is shared.
std::vector<LassoSolution> lambda_sweep(const LassoProblem& problem, const AdmmConfig& config,
                                        const std::vector<double>& lambdas);

}  // namespace netlasso
