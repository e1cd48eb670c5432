#include "bilevel/stable.hpp"

#include <chrono>
#include <cmath>

#include "bilevel/projections.hpp"

namespace bilevel {

void StepsizeSchedule::validate() const {
  switch (kind) {
    case ScheduleKind::nonconvex:
      if (horizon < 1) throw ConfigError("schedule: nonconvex kind requires horizon K >= 1");
      [[fallthrough]];
    case ScheduleKind::strongly_convex:
      if (!(alpha_scale > 0.0) || !(alpha_ratio > 0.0) || !(beta_cap > 0.0))
        throw ConfigError("schedule: tunables must be positive");
      if (alpha_ratio > 1.0)
        throw ConfigError("schedule: alpha_ratio must be <= 1 so that alpha_k <= beta_k");
      if (kind == ScheduleKind::strongly_convex && offset < 1)
        throw ConfigError("schedule: strongly_convex kind requires offset K0 >= 1");
      break;
    case ScheduleKind::constant:
      // zero alpha/beta are allowed for diagnostics (frozen-iterate runs)
      if (alpha_const < 0.0 || beta_const < 0.0 || !(tau_const > 0.0))
        throw ConfigError("schedule: constant kind requires alpha, beta >= 0 and tau > 0");
      if (alpha_const > beta_const && beta_const > 0.0)
        throw ConfigError("schedule: constant kind requires alpha <= beta");
      if (tau_const > 1.0) throw ConfigError("schedule: tau must be <= 1");
      break;
  }
}

Stepsizes emit_stepsizes(const StepsizeSchedule& s, long k) {
  s.validate();
  Stepsizes out;
  switch (s.kind) {
    case ScheduleKind::nonconvex: {
      if (k >= s.horizon) throw ConfigError("emit_stepsizes: k beyond the nonconvex horizon");
      const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(s.horizon));
      out.tau = inv_sqrt_k;
      out.beta = std::min(inv_sqrt_k, s.beta_cap);
      out.alpha = s.alpha_ratio * std::min(out.beta, s.alpha_scale * inv_sqrt_k);
      break;
    }
    case ScheduleKind::strongly_convex: {
      out.beta = std::min(s.beta_cap, 1.0 / static_cast<double>(s.offset + k));
      out.tau = out.beta;
      out.alpha = s.alpha_ratio * out.beta;
      break;
    }
    case ScheduleKind::constant:
      out = {s.alpha_const, s.beta_const, s.tau_const};
      break;
  }
  return out;
}

OptimizerState init_state(const BilevelProblem& problem, const Vector& x0, const Vector& y0,
                          Rng& rng) {
  if (x0.size() != problem.dim_x() || y0.size() != problem.dim_y())
    throw std::invalid_argument("init_state: dimension mismatch");
  const ProblemConstants c = problem.constants();

  OptimizerState state;
  state.point = {project_box(x0, problem.domain()), y0};
  state.prev_point = state.point;

  const auto seeds = problem.sample_lower_multi(std::span<const Point>(&state.point, 1), rng);
  state.samples.phi += 1;
  state.tracker_xy = project_frobenius_ball(seeds[0].h_xy, c.C_gxy);
  state.tracker_yy = project_psd_floor(seeds[0].h_yy, c.mu_g);
  return state;
}

void step(OptimizerState& state, const BilevelProblem& problem, const StepsizeSchedule& schedule,
          Rng& rng) {
  const ProblemConstants c = problem.constants();
  const Stepsizes s = emit_stepsizes(schedule, state.k);

  // Two-point lower-level draws under one shared phi.
  const Point pts[2] = {state.prev_point, state.point};
  const auto low = problem.sample_lower_multi(std::span<const Point>(pts, 2), rng);
  state.samples.phi += 1;
  const LowerDerivSample& prev = low[0];
  const LowerDerivSample& cur = low[1];

  state.tracker_xy = project_frobenius_ball(
      (1.0 - s.tau) * (state.tracker_xy - prev.h_xy) + cur.h_xy, c.C_gxy);
  state.tracker_yy =
      project_psd_floor((1.0 - s.tau) * (state.tracker_yy - prev.h_yy) + cur.h_yy, c.mu_g);

  Eigen::LLT<Matrix> llt(state.tracker_yy);
  if (llt.info() != Eigen::Success)
    throw NumericalError("step: tracker Cholesky failed at k=" + std::to_string(state.k) +
                         " despite the eigenvalue floor");

  const UpperGradSample up = problem.sample_upper(state.point, rng);
  state.samples.xi += 1;

  const Vector direction = up.g_x - state.tracker_xy * llt.solve(up.g_y);
  Vector x_next = project_box(state.point.x - s.alpha * direction, problem.domain());

  const Vector x_move = x_next - state.point.x;
  Vector y_next =
      state.point.y - s.beta * cur.h_g - llt.solve(state.tracker_xy.transpose() * x_move);

  state.prev_point = state.point;
  state.point.x = std::move(x_next);
  state.point.y = std::move(y_next);
  state.k += 1;
}

Point random_init_point(const BilevelProblem& problem, Rng& rng) {
  const BoxSet& box = problem.domain();
  Vector x(problem.dim_x());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]))
      x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unif(rng);
    else
      x[i] = normal(rng);
  }
  Point p{project_box(x, box), standard_normal_vector(problem.dim_y(), rng)};
  return p;
}

RunRecord run_stable(const BilevelProblem& problem, const StepsizeSchedule& schedule, long iters,
                     std::uint64_t seed, const Recorder& recorder, std::optional<Point> start) {
  if (iters < 1) throw ConfigError("run_stable: iteration count must be >= 1");
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(seed);
  Point p0 = start ? std::move(*start) : random_init_point(problem, rng);
  OptimizerState state = init_state(problem, p0.x, p0.y, rng);

  RunRecord record;
  auto observe = [&]() {
    IterationView view;
    view.k = state.k;
    view.point = &state.point;
    view.samples = state.samples;
    view.tracker_xy = &state.tracker_xy;
    view.tracker_yy = &state.tracker_yy;
    recorder(view, record);
  };

  observe();
  for (long k = 0; k < iters; ++k) {
    step(state, problem, schedule, rng);
    observe();
  }

  record.iters = iters;
  record.samples = state.samples;
  record.final_point = state.point;
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return record;
}

}  // namespace bilevel
