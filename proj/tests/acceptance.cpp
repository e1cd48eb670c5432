// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Every tolerance is pinned here; trajectories come from the
// same library entry points the CLI uses.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <vector>

#include "bilevel/baselines.hpp"
#include "bilevel/harness.hpp"
#include "bilevel/stable.hpp"

using namespace bilevel;

namespace {

int failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %02d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

StepsizeSchedule constant_schedule(double alpha, double beta, double tau) {
  StepsizeSchedule s;
  s.kind = ScheduleKind::constant;
  s.alpha_const = alpha;
  s.beta_const = beta;
  s.tau_const = tau;
  return s;
}

// --------------------------------------------------------------------------
// 1. hypergradient vs central finite differences on random quadratics

void criterion_1() {
  Timer timer;
  double max_rel = 0.0;
  const double conditions[5] = {5.0, 20.0, 50.0, 80.0, 100.0};
  for (int inst = 0; inst < 5; ++inst) {
    Rng gen(1000 + static_cast<std::uint64_t>(inst));
    QuadraticSpec spec = random_quadratic_spec(10, 10, conditions[inst], 0.3, NoiseSpec{}, gen);
    auto problem = make_quadratic(std::move(spec));
    for (int pt = 0; pt < 10; ++pt) {
      const Vector x = 2.0 * standard_normal_vector(10, gen);
      const Vector hg = hypergradient(*problem, x, 1e-12);
      const Vector fd = finite_diff_gradient(*problem, x, 1e-5, 1e-12);
      max_rel = std::max(max_rel, (hg - fd).norm() / std::max(fd.norm(), 1e-12));
    }
  }
  const double t = timer.seconds();
  report(1, "hypergradient-vs-fd", max_rel <= 1e-5 && t < 10.0,
         fmt("max rel err %.2e (tol 1e-5), %.2f s (limit 10 s)", max_rel, t));
}

// --------------------------------------------------------------------------
// 2. zero-noise convergence with constant steps

void criterion_2() {
  Timer timer;
  Rng gen(2);
  auto problem = make_quadratic(random_quadratic_spec(8, 8, 10.0, 0.5, NoiseSpec{}, gen));
  const Vector x_star = *problem->upper_minimizer_closed_form();

  const RunRecord rec =
      run_stable(*problem, constant_schedule(0.05, 0.1, 0.5), 5000, 0, null_recorder());
  const double upper = (rec.final_point.x - x_star).norm();
  const double lower = std::sqrt(lower_error(*problem, rec.final_point, 1e-14));
  const double t = timer.seconds();
  report(2, "deterministic-convergence", upper <= 1e-6 && lower <= 1e-6 && t < 5.0,
         fmt("|x-x*| %.2e, |y-y*| %.2e (tol 1e-6), %.2f s (limit 5 s)", upper, lower, t));
}

// --------------------------------------------------------------------------
// 3. strongly convex rate: slope of mean |x - x*|^2 under the decaying schedule

void criterion_3() {
  Timer timer;
  Rng gen(3);
  QuadraticSpec spec = random_quadratic_spec(10, 10, 5.0, 0.5, NoiseSpec::uniform(0.1), gen);
  auto problem = make_quadratic(std::move(spec));

  StepsizeSchedule sched;
  sched.kind = ScheduleKind::strongly_convex;
  sched.offset = 100;
  sched.alpha_ratio = 1.0;
  sched.beta_cap = 0.1;

  const long iters = 10000;
  const Recorder recorder = make_metrics_recorder(*problem, 20, iters, 0.0, 0.0, 1e-12, 1e-8);
  std::vector<RunRecord> records;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    records.push_back(run_stable(*problem, sched, iters, seed, recorder));

  const CsvTable summary = summarize(records);
  const double slope = fit_rate_slope(summary.column_values("k"),
                                      summary.column_values("upper_error_mean"), 100, 10000);
  const double t = timer.seconds();
  report(3, "strongly-convex-rate", slope >= -1.4 && slope <= -0.6 && t < 120.0,
         fmt("slope %.3f (band [-1.4, -0.6]), %.1f s (limit 120 s)", slope, t));
}

// --------------------------------------------------------------------------
// 4. nonconvex rate: slope of mean Moreau stationarity under the 1/sqrt(K) schedule

void criterion_4() {
  Timer timer;
  Rng gen(4);
  QuadraticSpec spec = random_quadratic_spec(10, 10, 5.0, 0.2, NoiseSpec::uniform(0.8), gen);
  spec.double_well = 0.6;  // upper curvature dips to ridge - double_well < 0
  spec.ref_radius_x = 3.0;
  auto problem = make_quadratic(std::move(spec));

  StepsizeSchedule sched;
  sched.kind = ScheduleKind::nonconvex;
  sched.horizon = 10000;
  sched.alpha_scale = 1.0;
  sched.alpha_ratio = 1.0;
  sched.beta_cap = 0.1;

  const long iters = 10000;
  const double rho = 1.0;
  const double mu_f = spec.ridge - spec.double_well;  // -0.4, inside rho
  const Recorder recorder = make_metrics_recorder(*problem, iters / 200, iters, rho, mu_f,
                                                  1e-12, 1e-8);
  std::vector<RunRecord> records;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    records.push_back(run_stable(*problem, sched, iters, seed, recorder));

  const CsvTable summary = summarize(records);
  const double slope = fit_rate_slope(summary.column_values("k"),
                                      summary.column_values("moreau_sq_mean"), 100, 10000);
  const double t = timer.seconds();
  report(4, "nonconvex-rate", slope >= -0.9 && slope <= -0.2 && t < 600.0,
         fmt("slope %.3f (band [-0.9, -0.2]), %.1f s (limit 600 s)", slope, t));
}

// --------------------------------------------------------------------------
// 5. variance reduction of the lower-Hessian tracker vs single samples

void criterion_5() {
  Timer timer;
  Rng gen(5);
  QuadraticSpec spec = random_quadratic_spec(8, 8, 5.0, 1.0, NoiseSpec::uniform(0.1), gen);
  auto problem = make_quadratic(std::move(spec));
  const StepsizeSchedule sched = constant_schedule(0.005, 0.01, 0.01);

  const long burn_in = 500, window = 1500;
  double tracker_sum = 0.0, single_sum = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Rng probe(seed + 7777);  // independent stream for the single-sample benchmark
    Point p0 = random_init_point(*problem, rng);
    OptimizerState st = init_state(*problem, p0.x, p0.y, rng);
    for (long k = 0; k < burn_in + window; ++k) {
      step(st, *problem, sched, rng);
      if (k < burn_in) continue;
      const Matrix exact = problem->hess_g_yy(st.point);
      tracker_sum += (st.tracker_yy - exact).squaredNorm();
      const auto fresh =
          problem->sample_lower_multi(std::span<const Point>(&st.point, 1), probe);
      single_sum += (fresh[0].h_yy - exact).squaredNorm();
      ++count;
    }
  }
  const double tracker_mse = tracker_sum / static_cast<double>(count);
  const double single_mse = single_sum / static_cast<double>(count);
  const double factor = single_mse / tracker_mse;
  const double t = timer.seconds();
  report(5, "tracker-variance-reduction", factor >= 2.0,
         fmt("tracker mse %.3e vs single-sample %.3e, factor %.1fx (need >= 2x), %.1f s",
             tracker_mse, single_mse, factor, t));
}

// --------------------------------------------------------------------------
// 6. ordering of STABLE vs TTSA at an equal total-sample budget

void criterion_6() {
  Timer timer;
  Dataset all = synthetic_logistic_data(1000, 20, 60);
  auto [train, val] = split(all, 0.5, 61);
  HyperoptSpec hspec;
  hspec.train = std::move(train);
  hspec.val = std::move(val);
  hspec.box = BoxSet::uniform(20, 0.05, 10.0);
  auto problem = make_hyperopt_logistic(std::move(hspec));

  const std::int64_t budget = 20000;
  const double grid[5] = {1.0, 0.5, 0.1, 0.05, 0.01};
  const long seeds = 10;

  auto final_objective = [&](const RunRecord& rec) {
    try {
      if (!rec.final_point.x.allFinite() || !rec.final_point.y.allFinite())
        return std::numeric_limits<double>::infinity();
      const double v = objective_value(*problem, rec.final_point.x, 1e-9);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  auto best_mean = [&](const std::function<RunRecord(double, std::uint64_t)>& runner,
                       const char* name) {
    double best = std::numeric_limits<double>::infinity();
    double best_step = 0.0;
    for (double s : grid) {
      double mean = 0.0;
      std::int64_t used = 0;
      for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed) {
        try {
          const RunRecord rec = runner(s, seed);
          used = std::max(used, rec.samples.total());
          mean += final_objective(rec);
        } catch (const std::exception&) {
          mean += std::numeric_limits<double>::infinity();
        }
      }
      mean /= static_cast<double>(seeds);
      if (used > budget) std::printf("  (%s step %g exceeded budget: %lld)\n", name, s,
                                     static_cast<long long>(used));
      if (mean < best) {
        best = mean;
        best_step = s;
      }
    }
    std::printf("  %s: best constant %g, mean final objective %.5f\n", name, best_step, best);
    return best;
  };

  // STABLE spends 2 samples per iteration plus one for initialization.
  const long stable_iters = (budget - 1) / 2;
  const double stable_loss = best_mean(
      [&](double s, std::uint64_t seed) {
        StepsizeSchedule sched = constant_schedule(s, s, 1.0 / std::sqrt(stable_iters));
        return run_stable(*problem, sched, stable_iters, seed, null_recorder());
      },
      "stable");

  // TTSA spends 2 + (terms-1) samples per iteration.
  NeumannParams params{10, 0.05, 1};
  const long ttsa_iters = budget / (2 + (params.terms - 1) * params.samples_per_term);
  const double ttsa_loss = best_mean(
      [&](double s, std::uint64_t seed) {
        BaselineSchedule sched;
        sched.alpha0 = s;
        sched.beta0 = s;
        sched.alpha_decay = 0.6;
        sched.beta_decay = 0.4;
        return run_ttsa(*problem, sched, params, ttsa_iters, seed, null_recorder());
      },
      "ttsa");

  // BSA, informational: same budget spent across inner loops.
  {
    long outer = 0;
    std::int64_t spent = 0;
    while (true) {
      const std::int64_t next =
          spent + bsa_default_inner(outer) + 2 + (params.terms - 1) * params.samples_per_term;
      if (next > budget) break;
      spent = next;
      ++outer;
    }
    const long bsa_outer = outer;
    best_mean(
        [&](double s, std::uint64_t seed) {
          BaselineSchedule sched;
          sched.alpha0 = s;
          sched.beta0 = s;
          sched.alpha_decay = 0.6;
          sched.beta_decay = 0.4;
          return run_bsa(*problem, bsa_outer, bsa_default_inner, sched, params, seed,
                         null_recorder());
        },
        "bsa");
  }

  const double t = timer.seconds();
  report(6, "baseline-ordering", stable_loss <= ttsa_loss + 1e-3 && std::isfinite(stable_loss),
         fmt("stable %.5f vs ttsa %.5f (margin 1e-3), %.1f s", stable_loss, ttsa_loss, t));
}

// --------------------------------------------------------------------------
// 7. projection property suite

void criterion_7() {
  Timer timer;
  Rng rng(7);
  std::normal_distribution<double> dist(0.0, 2.0);
  auto random_matrix = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
  };

  const double radius = 3.0, mu = 0.4;
  double worst = 0.0;
  bool solves_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix a = random_matrix(6, 5), b = random_matrix(6, 5);
    const Matrix pa = project_frobenius_ball(a, radius);
    worst = std::max(worst, pa.norm() - radius);
    worst = std::max(worst, (project_frobenius_ball(pa, radius) - pa).norm());
    worst = std::max(worst,
                     (pa - project_frobenius_ball(b, radius)).norm() - (a - b).norm());

    const Matrix s = random_matrix(6, 6);
    const Matrix sym = 0.5 * (s + s.transpose());
    const Matrix t2 = random_matrix(6, 6);
    const Matrix sym2 = 0.5 * (t2 + t2.transpose());
    const Matrix fa = project_psd_floor(sym, mu);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(fa);
    worst = std::max(worst, mu - eig.eigenvalues().minCoeff());
    worst = std::max(worst, (project_psd_floor(fa, mu) - fa).norm());
    worst = std::max(worst, (fa - project_psd_floor(sym2, mu)).norm() - (sym - sym2).norm());
    Eigen::LLT<Matrix> llt(fa);
    solves_ok = solves_ok && llt.info() == Eigen::Success &&
                (fa * llt.solve(Vector::Ones(6)) - Vector::Ones(6)).norm() <= 1e-8;

    BoxSet box = BoxSet::uniform(5, -0.5, 2.0);
    const Vector va = random_matrix(5, 1).col(0), vb = random_matrix(5, 1).col(0);
    const Vector qa = project_box(va, box);
    worst = std::max(worst, (project_box(qa, box) - qa).norm());
    worst = std::max(worst, std::max((box.lo - qa).maxCoeff(), (qa - box.hi).maxCoeff()));
    worst = std::max(worst, (qa - project_box(vb, box)).norm() - (va - vb).norm());
  }
  const double t = timer.seconds();
  report(7, "projection-properties", worst <= 1e-10 && solves_ok && t < 5.0,
         fmt("worst violation %.2e (tol 1e-10), spd solves %s, %.2f s (limit 5 s)", worst,
             solves_ok ? "ok" : "FAILED", t));
}

// --------------------------------------------------------------------------
// 8. zero-noise tracker exactness over 200 steps

void criterion_8() {
  Timer timer;
  Rng gen(8);
  auto problem = make_quadratic(random_quadratic_spec(6, 6, 8.0, 0.4, NoiseSpec{}, gen));
  Rng rng(80);
  OptimizerState st = init_state(*problem, standard_normal_vector(6, rng),
                                 standard_normal_vector(6, rng), rng);
  const StepsizeSchedule sched = constant_schedule(0.02, 0.05, 0.1);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    step(st, *problem, sched, rng);
    worst = std::max(worst, (st.tracker_xy - problem->hess_g_xy(st.point)).norm());
    worst = std::max(worst, (st.tracker_yy - problem->hess_g_yy(st.point)).norm());
  }
  report(8, "zero-noise-tracker-exactness", worst <= 1e-10,
         fmt("max tracker deviation %.2e over 200 steps (tol 1e-10), %.2f s", worst,
             timer.seconds()));
}

// --------------------------------------------------------------------------
// 9. data layer: parser round trip and sampler uniformity

void criterion_9() {
  Timer timer;
  // 50-line fixture with {0,1} labels and empty-feature rows
  std::string text;
  Rng gen(9);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    text += (i % 3 == 0) ? "0" : "1";
    if (i % 7 != 2) {
      int idx = 0;
      std::uniform_int_distribution<int> gap(1, 4);
      for (int f = 0; f <= i % 5; ++f) {
        idx += gap(gen);
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %d:%.17g", idx, val(gen));
        text += buf;
      }
    }
    text += '\n';
  }
  const Dataset d0 = parse_libsvm(text);
  const Dataset d1 = parse_libsvm(serialize_libsvm(d0));
  const bool round_trip =
      d0.dim == d1.dim && d0.rows == d1.rows && d0.labels == d1.labels && d0.n() == 50;

  // chi-square uniformity of the with-replacement sampler
  std::string bins_text;
  for (int i = 0; i < 16; ++i) bins_text += "1 1:" + std::to_string(i + 1) + "\n";
  const Dataset bins = parse_libsvm(bins_text);
  std::vector<long> counts(16, 0);
  Rng rng(90);
  const long n = 100000;
  for (long i = 0; i < n; ++i) counts[static_cast<std::size_t>(minibatch(bins, 1, rng)[0])]++;
  const double expected = static_cast<double>(n) / 16.0;
  double stat = 0.0;
  for (long c : counts) stat += (c - expected) * (c - expected) / expected;
  const bool uniform = stat < 37.6973;  // 0.999 quantile of chi-square with 15 dof

  report(9, "data-layer", round_trip && uniform,
         fmt("round trip %s, chi-square %.2f (crit 37.70), %.2f s",
             round_trip ? "ok" : "FAILED", stat, timer.seconds()));
}

// --------------------------------------------------------------------------
// 10. byte-identical reruns of a full experiment

void criterion_10() {
  Timer timer;
  const auto dir = std::filesystem::temp_directory_path() / "bilevel_acceptance_rerun";
  std::filesystem::remove_all(dir);

  const std::string config_text = R"([problem]
type = quadratic
d = 6
d_y = 6
gen_seed = 10
condition = 8
ridge = 0.6
sigma = 0.1

[algorithm]
name = stable
schedule = strongly_convex
alpha_ratio = 1.0
k0 = 50

[run]
iters = 500
seeds = 0, 1, 2
cadence = 25
rho = 1.0
out_dir = )" + (dir / "a").string() + "\n";

  ExperimentConfig cfg_a = parse_experiment_config(config_text);
  const ExperimentResult first = run_experiment(cfg_a);
  ExperimentConfig cfg_b = cfg_a;
  cfg_b.out_dir = (dir / "b").string();
  const ExperimentResult second = run_experiment(cfg_b);

  bool identical = first.trajectory_paths.size() == second.trajectory_paths.size();
  for (std::size_t i = 0; identical && i < first.trajectory_paths.size(); ++i)
    identical = read_file(first.trajectory_paths[i]) == read_file(second.trajectory_paths[i]);
  identical = identical && read_file(first.summary_path) == read_file(second.summary_path);

  std::filesystem::remove_all(dir);
  report(10, "reproducibility", identical,
         fmt("%zu trajectory files byte-compared%s, %.1f s", first.trajectory_paths.size(),
             identical ? ", all identical" : ", MISMATCH", timer.seconds()));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
