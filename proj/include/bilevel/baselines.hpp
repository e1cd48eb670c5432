#ifndef BILEVEL_BASELINES_HPP
#define BILEVEL_BASELINES_HPP

#include <functional>
#include <optional>

#include "bilevel/oracle.hpp"
#include "bilevel/record.hpp"

namespace bilevel {

/// Truncated Neumann expansion of the inverse lower Hessian:
/// eta * sum_{i<terms} prod_{j<=i} (I - eta * h_yy(phi_j)).
struct NeumannParams {
  long terms = 20;
  double scale = 0.1;  // eta, must satisfy eta < 2/L_g
  long samples_per_term = 1;

  void validate(const ProblemConstants* constants = nullptr) const {
    if (terms < 1 || samples_per_term < 1)
      throw ConfigError("neumann: terms and samples_per_term must be >= 1");
    if (!(scale > 0.0)) throw ConfigError("neumann: scale must be positive");
    if (constants && scale >= 2.0 / constants->L_g)
      throw ConfigError("neumann: scale must be < 2/L_g for the series to converge");
  }
};

/// Approximates [hess_yy g(x,y)]^{-1} v with fresh stochastic Hessian
/// samples per series factor, as matrix-vector recursions only.
Vector neumann_inv_hvp(const BilevelOracle& oracle, const Point& point, const Vector& v,
                       const NeumannParams& params, Rng& rng, SampleCounter& samples);

/// Two-timescale stepsizes alpha_k = alpha0/(k+1)^alpha_decay,
/// beta_k = beta0/(k+1)^beta_decay. Decay exponents 3/5 and 2/5 give the
/// classic two-timescale separation alpha_k/beta_k -> 0; zero decays give
/// constant steps.
struct BaselineSchedule {
  double alpha0 = 0.1;
  double beta0 = 0.1;
  double alpha_decay = 0.6;
  double beta_decay = 0.4;

  double alpha(long k) const { return alpha0 / std::pow(static_cast<double>(k + 1), alpha_decay); }
  double beta(long k) const { return beta0 / std::pow(static_cast<double>(k + 1), beta_decay); }

  void validate() const {
    if (!(alpha0 > 0.0) || !(beta0 > 0.0))
      throw ConfigError("baseline schedule: scales must be positive");
    if (alpha_decay < 0.0 || beta_decay < 0.0)
      throw ConfigError("baseline schedule: decay exponents must be >= 0");
  }
};

struct BaselineState {
  Point point;
  long k = 0;
  SampleCounter samples;
};

/// One two-timescale iteration: plain stochastic gradient step on y, then a
/// projected upper step whose inverse-Hessian factor comes from the Neumann
/// estimator. Both updates are evaluated at the incoming point.
void ttsa_step(BaselineState& state, const BilevelProblem& problem, double alpha, double beta,
               const NeumannParams& params, Rng& rng);

RunRecord run_ttsa(const BilevelProblem& problem, const BaselineSchedule& schedule,
                   const NeumannParams& params, long iters, std::uint64_t seed,
                   const Recorder& recorder, std::optional<Point> start = std::nullopt);

/// Double-loop baseline: inner_steps(k) stochastic gradient steps on y, then
/// one projected upper step with the Neumann estimator. The default inner
/// schedule ceil(sqrt(k+1)) grows the lower-level sample count the way
/// double-loop methods do.
RunRecord run_bsa(const BilevelProblem& problem, long outer_steps,
                  const std::function<long(long)>& inner_steps, const BaselineSchedule& schedule,
                  const NeumannParams& params, std::uint64_t seed, const Recorder& recorder,
                  std::optional<Point> start = std::nullopt);

inline long bsa_default_inner(long k) {
  return static_cast<long>(std::ceil(std::sqrt(static_cast<double>(k + 1))));
}

}  // namespace bilevel

#endif  // BILEVEL_BASELINES_HPP
