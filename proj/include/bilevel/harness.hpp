#ifndef BILEVEL_HARNESS_HPP
#define BILEVEL_HARNESS_HPP

#include <span>

#include "bilevel/config.hpp"
#include "bilevel/csv.hpp"
#include "bilevel/metrics.hpp"

namespace bilevel {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Recorder that evaluates the deterministic diagnostics every `cadence`
/// iterations (plus k = 0 and the final iteration): upper error (squared
/// distance to x* when the problem has one in closed form, otherwise F(x)),
/// lower error, Moreau stationarity when rho > 0, and tracker errors when
/// the algorithm carries trackers.
Recorder make_metrics_recorder(const BilevelProblem& problem, long cadence, long total_iters,
                               double rho, double mu_f, double solve_tol, double moreau_tol);

struct ExperimentResult {
  std::vector<RunRecord> records;              // one per successful seed
  std::vector<std::uint64_t> completed_seeds;
  std::vector<std::string> failures;           // "seed N: message"
  std::vector<std::string> trajectory_paths;
  std::string summary_path;
};

/// Runs one algorithm over every seed, writing one trajectory CSV per seed
/// plus a mean/std summary CSV. Trajectory bytes are a pure function of
/// (config, seed); wall-clock timings go to a separate .txt sidecar.
/// A failing seed is recorded and skipped; the rest continue.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Executes one seed without touching the filesystem.
RunRecord run_single(const ExperimentConfig& config, const BilevelProblem& problem,
                     std::uint64_t seed);

/// Summary table: per logged iteration, mean and population standard
/// deviation of each metric across records. All records must share the same
/// iteration grid.
CsvTable summarize(std::span<const RunRecord> records);
std::string summary_to_csv(const CsvTable& table);

/// Least-squares slope of log(value) against log(k) over k in [k_lo, k_hi].
/// Requires at least 10 points in range, all with positive values.
double fit_rate_slope(std::span<const double> ks, std::span<const double> values, double k_lo,
                      double k_hi);

}  // namespace bilevel

#endif  // BILEVEL_HARNESS_HPP
