#include "bilevel/baselines.hpp"

#include <chrono>
#include <cmath>

#include "bilevel/projections.hpp"
#include "bilevel/stable.hpp"

namespace bilevel {

Vector neumann_inv_hvp(const BilevelOracle& oracle, const Point& point, const Vector& v,
                       const NeumannParams& params, Rng& rng, SampleCounter& samples) {
  params.validate();
  if (v.size() != oracle.dim_y()) throw std::invalid_argument("neumann_inv_hvp: bad vector size");

  Vector term = v;  // i = 0 factor product is the identity
  Vector acc = v;
  for (long i = 1; i < params.terms; ++i) {
    Vector hv = Vector::Zero(v.size());
    for (long s = 0; s < params.samples_per_term; ++s) {
      const auto draw = oracle.sample_lower_multi(std::span<const Point>(&point, 1), rng);
      samples.phi += 1;
      hv += draw[0].h_yy * term;
    }
    term -= params.scale * hv / static_cast<double>(params.samples_per_term);
    if (term.norm() > 1e12)
      throw NumericalError("neumann_inv_hvp: series diverged; scale is likely too large");
    acc += term;
  }
  return params.scale * acc;
}

void ttsa_step(BaselineState& state, const BilevelProblem& problem, double alpha, double beta,
               const NeumannParams& params, Rng& rng) {
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("ttsa_step: stepsizes must be >= 0");

  // One shared phi for the lower gradient and the cross Hessian.
  const auto low = problem.sample_lower_multi(std::span<const Point>(&state.point, 1), rng);
  state.samples.phi += 1;
  const UpperGradSample up = problem.sample_upper(state.point, rng);
  state.samples.xi += 1;

  const Vector inv_hvp =
      neumann_inv_hvp(problem, state.point, up.g_y, params, rng, state.samples);
  const Vector direction = up.g_x - low[0].h_xy * inv_hvp;

  state.point.y -= beta * low[0].h_g;
  state.point.x = project_box(state.point.x - alpha * direction, problem.domain());
  state.k += 1;
}

namespace {

RunRecord run_baseline(const BilevelProblem& problem, long iters, std::uint64_t seed,
                       const Recorder& recorder, std::optional<Point> start,
                       const std::function<void(BaselineState&, Rng&)>& advance) {
  if (iters < 1) throw ConfigError("baseline run: iteration count must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(seed);
  BaselineState state;
  state.point = start ? std::move(*start) : random_init_point(problem, rng);
  state.point.x = project_box(state.point.x, problem.domain());

  RunRecord record;
  auto observe = [&]() {
    IterationView view;
    view.k = state.k;
    view.point = &state.point;
    view.samples = state.samples;
    recorder(view, record);
  };

  observe();
  for (long k = 0; k < iters; ++k) {
    advance(state, rng);
    observe();
  }

  record.iters = iters;
  record.samples = state.samples;
  record.final_point = state.point;
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return record;
}

}  // namespace

RunRecord run_ttsa(const BilevelProblem& problem, const BaselineSchedule& schedule,
                   const NeumannParams& params, long iters, std::uint64_t seed,
                   const Recorder& recorder, std::optional<Point> start) {
  schedule.validate();
  params.validate();
  return run_baseline(problem, iters, seed, recorder, std::move(start),
                      [&](BaselineState& state, Rng& rng) {
                        ttsa_step(state, problem, schedule.alpha(state.k), schedule.beta(state.k),
                                  params, rng);
                      });
}

RunRecord run_bsa(const BilevelProblem& problem, long outer_steps,
                  const std::function<long(long)>& inner_steps, const BaselineSchedule& schedule,
                  const NeumannParams& params, std::uint64_t seed, const Recorder& recorder,
                  std::optional<Point> start) {
  schedule.validate();
  params.validate();
  return run_baseline(
      problem, outer_steps, seed, recorder, std::move(start),
      [&](BaselineState& state, Rng& rng) {
        const long inner = inner_steps(state.k);
        if (inner < 1) throw ConfigError("run_bsa: inner_steps must be >= 1");
        const double beta = schedule.beta(state.k);
        for (long t = 0; t < inner; ++t) {
          const auto low = problem.sample_lower_multi(std::span<const Point>(&state.point, 1), rng);
          state.samples.phi += 1;
          state.point.y -= beta * low[0].h_g;
        }

        const auto low = problem.sample_lower_multi(std::span<const Point>(&state.point, 1), rng);
        state.samples.phi += 1;
        const UpperGradSample up = problem.sample_upper(state.point, rng);
        state.samples.xi += 1;
        const Vector inv_hvp =
            neumann_inv_hvp(problem, state.point, up.g_y, params, rng, state.samples);
        state.point.x = project_box(
            state.point.x - schedule.alpha(state.k) * (up.g_x - low[0].h_xy * inv_hvp),
            problem.domain());
        state.k += 1;
      });
}

}  // namespace bilevel
