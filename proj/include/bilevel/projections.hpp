#ifndef BILEVEL_PROJECTIONS_HPP
#define BILEVEL_PROJECTIONS_HPP

#include <cmath>
#include <limits>

#include "bilevel/types.hpp"

namespace bilevel {

/// Componentwise box [lo, hi], +-inf entries allowed.
struct BoxSet {
  Vector lo;
  Vector hi;

  static BoxSet unbounded(Index d) {
    const double inf = std::numeric_limits<double>::infinity();
    BoxSet b;
    b.lo = Vector::Constant(d, -inf);
    b.hi = Vector::Constant(d, inf);
    return b;
  }

  static BoxSet uniform(Index d, double lo, double hi) {
    BoxSet b;
    b.lo = Vector::Constant(d, lo);
    b.hi = Vector::Constant(d, hi);
    return b;
  }

  Index dim() const { return lo.size(); }

  bool is_unbounded() const {
    return !lo.allFinite() && !hi.allFinite() && (lo.array() == -std::numeric_limits<double>::infinity()).all() &&
           (hi.array() == std::numeric_limits<double>::infinity()).all();
  }

  void validate() const {
    if (lo.size() != hi.size())
      throw ConfigError("box bounds have mismatched dimensions");
    if ((lo.array() > hi.array()).any())
      throw ConfigError("box requires lo <= hi componentwise");
  }
};

/// Componentwise clamp of x onto the box. Identity for the unbounded box.
inline Vector project_box(const Vector& x, const BoxSet& set) {
  if (x.size() != set.dim())
    throw std::invalid_argument("project_box: dimension mismatch");
  return x.cwiseMax(set.lo).cwiseMin(set.hi);
}

/// Projection onto {M : ||M||_F <= radius}: rescale when outside, else identity.
template <typename Derived>
Matrix project_frobenius_ball(const Eigen::MatrixBase<Derived>& m, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("project_frobenius_ball: radius must be positive");
  Matrix out = m;
  if (!out.allFinite())
    throw std::invalid_argument("project_frobenius_ball: non-finite entries");
  const double norm = out.norm();
  if (norm > radius) out *= radius / norm;
  return out;
}

/// Projection onto {M symmetric : M >= mu I} in Frobenius distance:
/// eigendecompose and clamp eigenvalues from below at mu.
///
/// Input asymmetry within asym_tol (max-abs) is symmetrized away; beyond it
/// the input is rejected. The output is exactly symmetric by reconstruction.
inline Matrix project_psd_floor(const Matrix& m, double mu, double asym_tol = 1e-10) {
  if (!(mu > 0.0))
    throw std::invalid_argument("project_psd_floor: mu must be positive");
  if (m.rows() != m.cols())
    throw std::invalid_argument("project_psd_floor: matrix must be square");
  if (!m.allFinite())
    throw std::invalid_argument("project_psd_floor: non-finite entries");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > asym_tol)
    throw std::invalid_argument("project_psd_floor: input asymmetric beyond tolerance");

  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success)
    throw NumericalError("project_psd_floor: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= mu) return sym;

  const Vector clamped = eig.eigenvalues().cwiseMax(mu);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

}  // namespace bilevel

#endif  // BILEVEL_PROJECTIONS_HPP
