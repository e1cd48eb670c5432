#ifndef BILEVEL_METRICS_HPP
#define BILEVEL_METRICS_HPP

#include "bilevel/oracle.hpp"

namespace bilevel {

/// Lipschitz moduli derived from a problem's constant bundle:
/// L_f for the surrogate gradient in y, L_y for x -> y*(x), L_F for grad F.
struct DerivedConstants {
  double L_f = 0.0;
  double L_y = 0.0;
  double L_F = 0.0;
};

DerivedConstants lipschitz_constants(const ProblemConstants& c);

/// Deterministic lower-level solve: closed form when the problem has one,
/// otherwise gradient descent with stepsize 2/(mu_g + L_g) until
/// |grad_y g| <= tol.
Vector solve_lower(const BilevelProblem& problem, const Vector& x, double tol = 1e-12,
                   long max_iters = 1000000);

/// Exact gradient of F(x) = f(x, y*(x)) via implicit differentiation of the
/// lower-level optimality condition.
Vector hypergradient(const BilevelProblem& problem, const Vector& x, double tol = 1e-12);

/// The hypergradient formula evaluated at an arbitrary y in place of y*(x).
Vector surrogate_gradient(const BilevelProblem& problem, const Point& point);

/// F(x) = f(x, y*(x)).
double objective_value(const BilevelProblem& problem, const Vector& x, double tol = 1e-12);

/// Central differences of F, one coordinate at a time. Verification oracle
/// for the hypergradient; costs 2 d lower solves.
Vector finite_diff_gradient(const BilevelProblem& problem, const Vector& x, double step = 1e-5,
                            double tol = 1e-12);

struct MoreauOptions {
  double tol = 1e-8;       // stop when the prox iterate moves less than this
  long max_iters = 100000;
  double solve_tol = 1e-12;  // inner lower-level tolerance
  double weak_convexity = 0.0;  // mu_F when known (may be negative)
};

/// Squared distance |xhat(x) - x|^2 where xhat minimizes
/// F(u) + rho/2 |u - x|^2 over the domain; the near-stationarity measure for
/// constrained nonconvex problems. Solved by projected gradient descent with
/// stepsize 1/(L_F + rho), warm-started at x.
double moreau_stationarity(const BilevelProblem& problem, const Vector& x, double rho,
                           const MoreauOptions& opts = {});

/// |y - y*(x)|^2.
double lower_error(const BilevelProblem& problem, const Point& point, double tol = 1e-12);

}  // namespace bilevel

#endif  // BILEVEL_METRICS_HPP
