#include "netlasso/lasso_admm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace netlasso {

void LassoProblem::validate() const {
  if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("lasso: empty coefficient matrix");
  if (b.size() != a.rows()) throw std::invalid_argument("lasso: response length does not match matrix rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lasso: lambda must be finite and >= 0");
  require_finite(a, "lasso coefficient matrix");
  require_finite(b, "lasso response");
}

double LassoProblem::objective(const Vector& x) const {
  return 0.5 * (a * x - b).squaredNorm() + lambda * x.lpNorm<1>();
}

double LassoProblem::lambda_max() const { return (a.transpose() * b).lpNorm<Eigen::Infinity>(); }

void AdmmConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("admm: rho must be > 0");
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw std::invalid_argument("admm: alpha must lie in [1, 2]");
  if (max_iters <= 0) throw std::invalid_argument("admm: max_iters must be positive");
  if (!(eps_abs > 0.0)) throw std::invalid_argument("admm: eps_abs must be > 0");
  if (!(eps_rel > 0.0)) throw std::invalid_argument("admm: eps_rel must be > 0");
}

int count_nonzeros(const Vector& z, double threshold) {
  return static_cast<int>((z.array().abs() > threshold).count());
}

LassoSolution solve_lasso(const LassoProblem& problem, const AdmmConfig& config,
                          const std::optional<LassoWarmStart>& warm) {
  problem.validate();
  config.validate();
  const FactoredSystem factored(problem.a, config.rho);
  return solve_lasso(problem, config, factored, warm);
}

namespace {

// `lambda` overrides problem.lambda so sweeps can share the problem data.
LassoSolution run_admm(const LassoProblem& problem, double lambda, const AdmmConfig& config,
                       const FactoredSystem& factored, const std::optional<LassoWarmStart>& warm) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lasso: lambda must be finite and >= 0");
  const Eigen::Index n = problem.a.cols();
  if (factored.dim() != n || factored.rho() != config.rho) {
    throw std::invalid_argument("lasso: factorization does not match problem or rho");
  }

  const double rho = config.rho;
  const double alpha = config.alpha;
  const double kappa = lambda / rho;
  const auto objective = [&](const Vector& v) {
    return 0.5 * (problem.a * v - problem.b).squaredNorm() + lambda * v.lpNorm<1>();
  };
  const Vector atb = problem.a.transpose() * problem.b;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  LassoSolution sol;
  sol.lambda = lambda;
  Vector z = Vector::Zero(n);
  Vector u = Vector::Zero(n);
  if (warm) {
    if (warm->z.size() != n || warm->u.size() != n) {
      throw std::invalid_argument("lasso: warm start has wrong dimension");
    }
    z = warm->z;
    u = warm->u;
  }
  Vector x = z;

  for (int k = 0; k < config.max_iters; ++k) {
    x = factored.solve(atb + rho * z - u);
    const Vector z_old = z;
    const Vector x_hat = alpha * x + (1.0 - alpha) * z_old;
    z = soft_threshold(x_hat + u / rho, kappa);
    u += rho * (x_hat - z);

    const double r_norm = (x - z).norm();
    const double s_norm = rho * (z - z_old).norm();
    const double eps_pri = sqrt_n * config.eps_abs + config.eps_rel * std::max(x.norm(), z.norm());
    const double eps_dual = sqrt_n * config.eps_abs + config.eps_rel * u.norm();

    sol.objective_history.push_back(objective(z));
    sol.primal_residuals.push_back(r_norm);
    sol.dual_residuals.push_back(s_norm);
    sol.iterations = k + 1;

    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      sol.converged = true;
      break;
    }
  }

  sol.x = std::move(x);
  sol.z = std::move(z);
  sol.u = std::move(u);
  sol.nonzero_count = count_nonzeros(sol.z);
  return sol;
}

}  // namespace

LassoSolution solve_lasso(const LassoProblem& problem, const AdmmConfig& config,
                          const FactoredSystem& factored, const std::optional<LassoWarmStart>& warm) {
  problem.validate();
  config.validate();
  return run_admm(problem, problem.lambda, config, factored, warm);
}

std::vector<LassoSolution> lambda_sweep(const LassoProblem& problem, const AdmmConfig& config,
                                        const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("lambda_sweep: empty lambda grid");
  problem.validate();
  config.validate();
  const FactoredSystem factored(problem.a, config.rho);

  // Solve from the largest lambda down: each warm start then sits close to
  // a sparser solution, which converges much faster than climbing up.
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return lambdas[l] > lambdas[r]; });

  std::vector<LassoSolution> out(lambdas.size());
  std::optional<LassoWarmStart> warm;
  for (std::size_t i : order) {
    out[i] = run_admm(problem, lambdas[i], config, factored, warm);
    warm = LassoWarmStart{out[i].z, out[i].u};
  }
  return out;
}

}  // namespace netlasso
