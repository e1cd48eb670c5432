#include "bilevel/metrics.hpp"

#include <cmath>
#include <string>

namespace bilevel {

DerivedConstants lipschitz_constants(const ProblemConstants& c) {
  if (!(c.mu_g > 0.0)) throw ConfigError("lipschitz_constants: mu_g must be positive");
  DerivedConstants d;
  d.L_y = c.C_gxy / c.mu_g;
  // The cross-Hessian modulus plays the role of the L_{fxy} symbol here.
  d.L_f = c.L_fx + c.C_gxy * c.L_fy / c.mu_g +
          (c.C_fy / c.mu_g) * (c.L_gxy + c.C_gxy * c.L_gyy / c.mu_g);
  d.L_F = c.Lbar_fx + c.C_gxy * (c.Lbar_fy + d.L_f) / c.mu_g +
          (c.C_fy / c.mu_g) * (c.Lbar_gxy + c.C_gxy * c.Lbar_gyy / c.mu_g);
  return d;
}

Vector solve_lower(const BilevelProblem& problem, const Vector& x, double tol, long max_iters) {
  if (!(tol > 0.0)) throw ConfigError("solve_lower: tol must be positive");
  if (auto closed = problem.lower_solution_closed_form(x)) return *closed;

  const ProblemConstants c = problem.constants();
  const double step = 2.0 / (c.mu_g + c.L_g);
  Point p{x, Vector::Zero(problem.dim_y())};
  double residual = 0.0;
  for (long it = 0; it < max_iters; ++it) {
    const Vector g = problem.grad_g_y(p);
    residual = g.norm();
    if (residual <= tol) return p.y;
    p.y -= step * g;
  }
  throw ConvergenceError("solve_lower: residual " + std::to_string(residual) + " after " +
                         std::to_string(max_iters) + " iterations");
}

Vector surrogate_gradient(const BilevelProblem& problem, const Point& point) {
  const Matrix h_yy = problem.hess_g_yy(point);
  Eigen::LLT<Matrix> llt(h_yy);
  if (llt.info() != Eigen::Success)
    throw NumericalError("surrogate_gradient: lower Hessian is not positive definite");
  return problem.grad_f_x(point) - problem.hess_g_xy(point) * llt.solve(problem.grad_f_y(point));
}

Vector hypergradient(const BilevelProblem& problem, const Vector& x, double tol) {
  return surrogate_gradient(problem, Point{x, solve_lower(problem, x, tol)});
}

double objective_value(const BilevelProblem& problem, const Vector& x, double tol) {
  return problem.upper_value(Point{x, solve_lower(problem, x, tol)});
}

Vector finite_diff_gradient(const BilevelProblem& problem, const Vector& x, double step,
                            double tol) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_gradient: step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double fp = objective_value(problem, probe, tol);
    probe[i] = x[i] - step;
    const double fm = objective_value(problem, probe, tol);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double moreau_stationarity(const BilevelProblem& problem, const Vector& x, double rho,
                           const MoreauOptions& opts) {
  if (!(rho > 0.0)) throw ConfigError("moreau_stationarity: rho must be positive");
  if (rho <= std::abs(opts.weak_convexity))
    throw ConfigError("moreau_stationarity: rho must exceed |mu_F|");

  const DerivedConstants dc = lipschitz_constants(problem.constants());
  const double step = 1.0 / (dc.L_F + rho);
  const BoxSet& box = problem.domain();

  Vector u = project_box(x, box);
  for (long it = 0; it < opts.max_iters; ++it) {
    const Vector g = hypergradient(problem, u, opts.solve_tol) + rho * (u - x);
    const Vector next = project_box(u - step * g, box);
    const double move = (next - u).norm();
    u = next;
    if (move <= opts.tol) return (u - x).squaredNorm();
  }
  throw ConvergenceError("moreau_stationarity: proximal gradient did not converge");
}

double lower_error(const BilevelProblem& problem, const Point& point, double tol) {
  return (point.y - solve_lower(problem, point.x, tol)).squaredNorm();
}

}  // namespace bilevel
