// Command-line front end: `run` executes a config over all seeds and writes
// trajectory/summary CSVs, `verify` cross-checks the exact hypergradient
// against finite differences plus the projection properties, and `slope`
// fits a log-log rate to a summary column.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "bilevel/harness.hpp"

namespace {

using namespace bilevel;

int cmd_run(const std::string& config_path) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const ExperimentResult result = run_experiment(config);
  for (const std::string& path : result.trajectory_paths) std::cout << "wrote " << path << "\n";
  std::cout << "wrote " << result.summary_path << "\n";
  for (const std::string& f : result.failures) std::cerr << "run failed: " << f << "\n";
  return result.failures.empty() ? 0 : 1;
}

int cmd_verify(const std::string& config_path) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const auto problem = build_problem(config.problem);
  bool ok = true;

  Rng rng(config.seeds.front() + 1);
  double max_rel = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Point p = random_init_point(*problem, rng);
    const Vector hg = hypergradient(*problem, p.x, config.solve_tol);
    const Vector fd = finite_diff_gradient(*problem, p.x, 1e-5, config.solve_tol);
    const double denom = std::max(fd.norm(), 1e-12);
    max_rel = std::max(max_rel, (hg - fd).norm() / denom);
  }
  const bool grad_ok = max_rel <= 1e-5;
  std::printf("hypergradient vs finite differences: max relative error %.3e  [%s]\n", max_rel,
              grad_ok ? "ok" : "FAIL");
  ok = ok && grad_ok;

  const ProblemConstants c = problem->constants();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = 3.0 * standard_normal_matrix(problem->dim_y(), problem->dim_y(), rng);
    const Matrix ball = project_frobenius_ball(m, c.C_gxy);
    worst = std::max(worst, ball.norm() - c.C_gxy);
    worst = std::max(worst, (project_frobenius_ball(ball, c.C_gxy) - ball).norm());

    const Matrix sym = 0.5 * (m + m.transpose());
    const Matrix floored = project_psd_floor(sym, c.mu_g);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(floored);
    worst = std::max(worst, c.mu_g - eig.eigenvalues().minCoeff());
    worst = std::max(worst, (project_psd_floor(floored, c.mu_g) - floored).norm());
  }
  const bool proj_ok = worst <= 1e-10;
  std::printf("projection membership/idempotence: worst violation %.3e  [%s]\n", worst,
              proj_ok ? "ok" : "FAIL");
  ok = ok && proj_ok;

  return ok ? 0 : 1;
}

int cmd_slope(const std::string& csv_path, const std::string& column, const std::string& range) {
  const auto colon = range.find(':');
  if (colon == std::string::npos)
    throw ConfigError("slope: --range expects the form lo:hi");
  const double lo = std::stod(range.substr(0, colon));
  const double hi = std::stod(range.substr(colon + 1));

  const CsvTable table = read_csv_file(csv_path);
  const std::vector<double> ks = table.column_values("k");
  const std::vector<double> vals = table.column_values(column);
  const double slope = fit_rate_slope(ks, vals, lo, hi);
  std::printf("%.3f\n", slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic bilevel optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "experiment config file")->required();

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "gradient and projection verification suite");
  verify->add_option("config", verify_path, "experiment config file")->required();

  std::string csv_path, column = "upper_error_mean", range = "100:10000";
  auto* slope = app.add_subcommand("slope", "fit a log-log rate slope to a summary column");
  slope->add_option("csv", csv_path, "summary csv file")->required();
  slope->add_option("--column", column, "column to fit");
  slope->add_option("--range", range, "iteration range lo:hi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) return cmd_verify(verify_path);
    if (slope->parsed()) return cmd_slope(csv_path, column, range);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
