#ifndef BILEVEL_STABLE_HPP
#define BILEVEL_STABLE_HPP

#include <optional>

#include "bilevel/oracle.hpp"
#include "bilevel/record.hpp"

namespace bilevel {

/// Full state of the single-timescale optimizer: the iterate pair, the
/// previous pair (needed by the two-point tracker updates), and the
/// projection-stabilized Hessian trackers.
///
/// Maintained invariants: |tracker_xy|_F <= C_gxy, eigenvalues of
/// tracker_yy >= mu_g, and point.x inside the domain box.
struct OptimizerState {
  Point point;
  Point prev_point;
  Matrix tracker_xy;  // running estimate of the d x d_y cross Hessian
  Matrix tracker_yy;  // running estimate of the d_y x d_y lower Hessian
  long k = 0;
  SampleCounter samples;
};

enum class ScheduleKind { nonconvex, strongly_convex, constant };

/// Per-iteration stepsize triple (alpha_k, beta_k, tau_k).
///
/// nonconvex:        tau = 1/sqrt(K), beta = min(1/sqrt(K), beta_cap),
///                   alpha = alpha_ratio * min(beta, alpha_scale/sqrt(K)).
/// strongly_convex:  beta = tau = min(beta_cap, 1/(K0 + k)),
///                   alpha = alpha_ratio * beta.
/// constant:         fixed triple, for diagnostics.
///
/// alpha_scale, alpha_ratio and beta_cap stand in for the analysis-side
/// absolute constants; both decaying kinds keep alpha_k/beta_k constant in k,
/// which is the single-timescale property.
struct StepsizeSchedule {
  ScheduleKind kind = ScheduleKind::nonconvex;
  double alpha_scale = 1.0;
  double alpha_ratio = 0.5;
  double beta_cap = 0.1;
  long horizon = 0;   // K, required by the nonconvex kind
  long offset = 100;  // K0, strongly_convex kind
  double alpha_const = 0.0;
  double beta_const = 0.0;
  double tau_const = 0.0;

  void validate() const;
};

struct Stepsizes {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.0;
};

Stepsizes emit_stepsizes(const StepsizeSchedule& schedule, long k);

/// Projects x0 into the domain and seeds both trackers from one projected
/// lower-level sample (one phi draw), so the zero-noise recursion is exact
/// from the start.
OptimizerState init_state(const BilevelProblem& problem, const Vector& x0, const Vector& y0,
                          Rng& rng);

/// One iteration: two-point tracker updates under a shared phi draw, then the
/// projected x step, then the corrected y step. Inverse-Hessian products go
/// through a Cholesky solve of the floored tracker, never an explicit inverse.
void step(OptimizerState& state, const BilevelProblem& problem, const StepsizeSchedule& schedule,
          Rng& rng);

/// Runs `iters` steps from a fresh state and returns the trajectory record.
/// When no start point is given, x0 is uniform over the domain box (standard
/// normal on unbounded coordinates) and y0 is standard normal.
RunRecord run_stable(const BilevelProblem& problem, const StepsizeSchedule& schedule, long iters,
                     std::uint64_t seed, const Recorder& recorder,
                     std::optional<Point> start = std::nullopt);

/// Random initialization shared by every algorithm in the harness.
Point random_init_point(const BilevelProblem& problem, Rng& rng);

}  // namespace bilevel

#endif  // BILEVEL_STABLE_HPP
