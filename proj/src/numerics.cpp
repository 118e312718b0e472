#include "netlasso/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace netlasso {

void require_finite(const Eigen::Ref<const DenseMatrix>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite entries");
  }
}

namespace {

void require_kappa(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("shrinkage threshold must be finite and >= 0");
  }
}

}  // namespace

Vector soft_threshold(const Vector& v, double kappa) {
  require_kappa(kappa);
  require_finite(v, "soft_threshold input");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - kappa;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector group_shrink(const Vector& v, double kappa) {
  require_kappa(kappa);
  require_finite(v, "group_shrink input");
  if (kappa == 0.0) return v;
  const double norm = v.norm();
  if (norm <= kappa) return Vector::Zero(v.size());
  return (1.0 - kappa / norm) * v;
}

FactoredSystem::FactoredSystem(const DenseMatrix& a, double rho, Form form)
    : a_(a), rho_(rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("rho must be finite and > 0");
  }
  require_finite(a, "coefficient matrix");
  dual_ = form == Form::kDual || (form == Form::kAuto && a.rows() < a.cols());
  if (dual_) {
    DenseMatrix gram = DenseMatrix::Identity(a.rows(), a.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0 / rho);
    llt_.compute(gram);
  } else {
    DenseMatrix gram = rho * DenseMatrix::Identity(a.cols(), a.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    llt_.compute(gram);
  }
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("normal-equation factorization failed");
  }
}

Vector FactoredSystem::solve(const Vector& rhs) const {
  if (rhs.size() != a_.cols()) {
    throw std::invalid_argument("rhs length does not match system dimension");
  }
  if (!dual_) return llt_.solve(rhs);
  const Vector inner = llt_.solve(a_ * rhs);
  return rhs / rho_ - a_.transpose() * inner / (rho_ * rho_);
}

FactoredSystem factor_normal_equations(const DenseMatrix& a, double rho, FactoredSystem::Form form) {
  return FactoredSystem(a, rho, form);
}

}  // namespace netlasso
