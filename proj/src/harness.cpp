#include "bilevel/harness.hpp"

#include <cmath>
#include <filesystem>

namespace bilevel {

Recorder make_metrics_recorder(const BilevelProblem& problem, long cadence, long total_iters,
                               double rho, double mu_f, double solve_tol, double moreau_tol) {
  if (cadence < 1) throw ConfigError("metrics recorder: cadence must be >= 1");
  const std::optional<Vector> x_star = problem.upper_minimizer_closed_form();

  return [&problem, cadence, total_iters, rho, mu_f, solve_tol, moreau_tol,
          x_star](const IterationView& view, RunRecord& record) {
    if (view.k % cadence != 0 && view.k != total_iters) return;

    RunRow row;
    row.k = view.k;
    row.samples_xi = view.samples.xi;
    row.samples_phi = view.samples.phi;

    const Point& p = *view.point;
    const Vector y_star = solve_lower(problem, p.x, solve_tol);
    row.lower_error = (p.y - y_star).squaredNorm();
    if (x_star)
      row.upper_error = (p.x - *x_star).squaredNorm();
    else
      row.upper_error = problem.upper_value(Point{p.x, y_star});

    if (rho > 0.0) {
      MoreauOptions opts;
      opts.tol = moreau_tol;
      opts.solve_tol = solve_tol;
      opts.weak_convexity = mu_f;
      row.moreau = moreau_stationarity(problem, p.x, rho, opts);
    }

    if (view.tracker_xy) row.tracker_mse_xy = (*view.tracker_xy - problem.hess_g_xy(p)).squaredNorm();
    if (view.tracker_yy) row.tracker_mse_yy = (*view.tracker_yy - problem.hess_g_yy(p)).squaredNorm();

    record.rows.push_back(row);
  };
}

RunRecord run_single(const ExperimentConfig& config, const BilevelProblem& problem,
                     std::uint64_t seed) {
  const Recorder recorder =
      make_metrics_recorder(problem, config.effective_cadence(), config.iters, config.rho,
                            config.mu_f, config.solve_tol, config.moreau_tol);
  const AlgorithmConfig& algo = config.algorithm;
  if (algo.name == "stable")
    return run_stable(problem, algo.schedule, config.iters, seed, recorder);
  if (algo.name == "ttsa")
    return run_ttsa(problem, algo.baseline, algo.neumann, config.iters, seed, recorder);
  if (algo.name == "bsa") {
    std::function<long(long)> inner;
    if (algo.bsa_inner == "constant")
      inner = [c = algo.bsa_inner_const](long) { return c; };
    else
      inner = bsa_default_inner;
    return run_bsa(problem, config.iters, inner, algo.baseline, algo.neumann, seed, recorder);
  }
  throw ConfigError("run_single: unknown algorithm '" + algo.name + "'");
}

CsvTable summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw AnalysisError("summarize: no records");
  const std::size_t rows = records[0].rows.size();
  for (const RunRecord& r : records) {
    if (r.rows.size() != rows) throw AnalysisError("summarize: records have different grids");
    for (std::size_t i = 0; i < rows; ++i)
      if (r.rows[i].k != records[0].rows[i].k)
        throw AnalysisError("summarize: records have different iteration grids");
  }

  static const char* metrics[] = {"upper_error", "lower_error", "moreau_sq", "tracker_mse_xy",
                                  "tracker_mse_yy"};
  auto metric_value = [](const RunRow& r, std::size_t m) {
    switch (m) {
      case 0: return r.upper_error;
      case 1: return r.lower_error;
      case 2: return r.moreau;
      case 3: return r.tracker_mse_xy;
      default: return r.tracker_mse_yy;
    }
  };

  CsvTable table;
  table.header = {"k", "samples_xi", "samples_phi"};
  for (const char* m : metrics) {
    table.header.push_back(std::string(m) + "_mean");
    table.header.push_back(std::string(m) + "_std");
  }

  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row;
    row.push_back(static_cast<double>(records[0].rows[i].k));
    row.push_back(static_cast<double>(records[0].rows[i].samples_xi));
    row.push_back(static_cast<double>(records[0].rows[i].samples_phi));
    for (std::size_t m = 0; m < 5; ++m) {
      double mean = 0.0;
      for (const RunRecord& r : records) mean += metric_value(r.rows[i], m);
      mean /= n;
      double var = 0.0;
      for (const RunRecord& r : records) {
        const double dev = metric_value(r.rows[i], m) - mean;
        var += dev * dev;
      }
      var /= n;
      row.push_back(mean);
      row.push_back(std::sqrt(var));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string summary_to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto problem = build_problem(config.problem);

  std::filesystem::create_directories(config.out_dir);
  ExperimentResult result;
  std::string timings;

  for (std::uint64_t seed : config.seeds) {
    try {
      RunRecord record = run_single(config, *problem, seed);
      const std::string path =
          config.out_dir + "/" + config.prefix + "_seed" + std::to_string(seed) + ".csv";
      write_file(path, trajectory_to_csv(record));
      timings += "seed " + std::to_string(seed) + ": " + format_double(record.wall_seconds) + " s\n";
      result.trajectory_paths.push_back(path);
      result.completed_seeds.push_back(seed);
      result.records.push_back(std::move(record));
    } catch (const std::exception& e) {
      result.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  if (result.records.empty())
    throw ConfigError("run_experiment: every seed failed; first failure: " +
                      (result.failures.empty() ? std::string("?") : result.failures.front()));

  result.summary_path = config.out_dir + "/" + config.prefix + "_summary.csv";
  write_file(result.summary_path, summary_to_csv(summarize(result.records)));
  write_file(config.out_dir + "/" + config.prefix + "_timings.txt", timings);
  return result;
}

double fit_rate_slope(std::span<const double> ks, std::span<const double> values, double k_lo,
                      double k_hi) {
  if (ks.size() != values.size()) throw AnalysisError("fit_rate_slope: length mismatch");
  if (!(k_lo > 0.0) || !(k_hi > k_lo)) throw AnalysisError("fit_rate_slope: bad k range");

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < k_lo || ks[i] > k_hi) continue;
    if (!(values[i] > 0.0))
      throw AnalysisError("fit_rate_slope: nonpositive value inside the fit range");
    lx.push_back(std::log(ks[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 10) throw AnalysisError("fit_rate_slope: fewer than 10 points in range");

  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw AnalysisError("fit_rate_slope: degenerate k range");
  return sxy / sxx;
}

}  // namespace bilevel
