#ifndef BILEVEL_ORACLE_HPP
#define BILEVEL_ORACLE_HPP

#include <optional>
#include <span>
#include <vector>

#include "bilevel/projections.hpp"
#include "bilevel/types.hpp"

namespace bilevel {

/// Abstract stochastic oracle for a bilevel problem
///
///   min_{x in X}  E_xi[ f(x, y*(x); xi) ]
///   s.t. y*(x) = argmin_y E_phi[ g(x, y; phi) ]
///
/// sample_upper draws one xi and returns unbiased estimates of the upper
/// gradients. sample_lower_multi draws one phi shared by every requested
/// point and returns unbiased lower-level derivatives at each; the shared
/// draw is what makes the two-point tracker updates variance-reduced.
class BilevelOracle {
 public:
  virtual ~BilevelOracle() = default;

  virtual Index dim_x() const = 0;
  virtual Index dim_y() const = 0;

  virtual UpperGradSample sample_upper(const Point& point, Rng& rng) const = 0;

  virtual std::vector<LowerDerivSample> sample_lower_multi(
      std::span<const Point> points, Rng& rng) const = 0;

  virtual ProblemConstants constants() const = 0;

 protected:
  void check_point(const Point& p) const {
    if (p.x.size() != dim_x() || p.y.size() != dim_y())
      throw std::invalid_argument("oracle: point dimensions do not match problem");
  }
};

/// A bilevel problem with deterministic (zero noise) channels alongside the
/// stochastic oracle. Diagnostics (exact hypergradient, lower solve, Moreau
/// stationarity) consume the deterministic side only.
class BilevelProblem : public BilevelOracle {
 public:
  virtual Vector grad_f_x(const Point& point) const = 0;
  virtual Vector grad_f_y(const Point& point) const = 0;
  virtual Vector grad_g_y(const Point& point) const = 0;
  virtual Matrix hess_g_xy(const Point& point) const = 0;
  virtual Matrix hess_g_yy(const Point& point) const = 0;

  /// f(x, y), the upper objective value at an arbitrary pair.
  virtual double upper_value(const Point& point) const = 0;

  /// Constraint set for the upper variable.
  virtual const BoxSet& domain() const = 0;

  /// y*(x) when the problem has one in closed form.
  virtual std::optional<Vector> lower_solution_closed_form(const Vector&) const {
    return std::nullopt;
  }

  /// argmin_{x in X} F(x) when available in closed form.
  virtual std::optional<Vector> upper_minimizer_closed_form() const {
    return std::nullopt;
  }
};

/// Per-entry standard deviations of the additive Gaussian perturbations used
/// by the synthetic problems. Gradient channels add iid N(0, sigma^2) vectors;
/// the lower Hessian channel adds sigma * (G + G^T)/2 with G iid standard.
struct NoiseSpec {
  double fx = 0.0;
  double fy = 0.0;
  double gy = 0.0;
  double gxy = 0.0;
  double gyy = 0.0;

  static NoiseSpec uniform(double sigma) { return {sigma, sigma, sigma, sigma, sigma}; }

  bool zero() const { return fx == 0 && fy == 0 && gy == 0 && gxy == 0 && gyy == 0; }

  void validate() const {
    for (double s : {fx, fy, gy, gxy, gyy})
      if (s < 0.0 || !std::isfinite(s)) throw ConfigError("noise sigmas must be finite and >= 0");
  }
};

inline Vector standard_normal_vector(Index n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Matrix standard_normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// sigma * (G + G^T)/2: symmetric, unbiased, per-entry variance sigma^2 on the
/// diagonal and sigma^2/2 off it.
inline Matrix symmetric_gaussian(Index n, double sigma, Rng& rng) {
  const Matrix g = standard_normal_matrix(n, n, rng);
  return sigma * 0.5 * (g + g.transpose());
}

}  // namespace bilevel

#endif  // BILEVEL_ORACLE_HPP
