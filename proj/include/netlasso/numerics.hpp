#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace netlasso {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Throws std::invalid_argument naming `what` if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const DenseMatrix>& m, std::string_view what);

/// Proximal operator of kappa*|z|_1: elementwise sign(v)*max(|v|-kappa, 0).
Vector soft_threshold(const Vector& v, double kappa);

/// Proximal operator of kappa*||z||_2: max(1 - kappa/||v||, 0) * v.
/// Returns the zero vector whenever ||v|| <= kappa (including v == 0).
Vector group_shrink(const Vector& v, double kappa);

/// Cached Cholesky factorization of (A^T A + rho I).
///
/// For wide matrices (rows < cols) the dual-sized system (I + A A^T / rho)
/// is factored instead and solves go through the matrix inversion lemma:
///
///   (A^T A + rho I)^{-1} q = q / rho - A^T (I + A A^T / rho)^{-1} A q / rho^2
///
/// Both forms produce the same solution; the dual form costs O(rows^3)
/// instead of O(cols^3). Immutable after construction.
class FactoredSystem {
 public:
  enum class Form { kAuto, kPrimal, kDual };

  FactoredSystem(const DenseMatrix& a, double rho, Form form = Form::kAuto);

  /// Solves (A^T A + rho I) v = rhs.
  Vector solve(const Vector& rhs) const;

  bool is_dual() const { return dual_; }
  double rho() const { return rho_; }
  Eigen::Index dim() const { return a_.cols(); }

 private:
  DenseMatrix a_;
  double rho_;
  bool dual_;
  Eigen::LLT<DenseMatrix> llt_;
};

FactoredSystem factor_normal_equations(const DenseMatrix& a, double rho,
                                       FactoredSystem::Form form = FactoredSystem::Form::kAuto);

}  // namespace netlasso
