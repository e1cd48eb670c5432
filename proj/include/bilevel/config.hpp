#ifndef BILEVEL_CONFIG_HPP
#define BILEVEL_CONFIG_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bilevel/baselines.hpp"
#include "bilevel/problems.hpp"
#include "bilevel/stable.hpp"

namespace bilevel {

/// Flat key = value file with [section] headers and # comments.
/// Unknown sections or keys are rejected.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);

struct ProblemConfig {
  std::string type = "quadratic";  // quadratic | hyperopt

  // quadratic family
  Index d = 10;
  Index d_y = 10;
  std::uint64_t gen_seed = 1;
  double condition = 10.0;
  double ridge = 0.1;
  double double_well = 0.0;
  NoiseSpec noise;
  double box_lo = -std::numeric_limits<double>::infinity();
  double box_hi = std::numeric_limits<double>::infinity();
  double ref_radius_x = 10.0;
  double ref_radius_y = 10.0;

  // hyperopt family
  std::string data = "synthetic";  // synthetic | file
  Index n = 1000;
  std::string train_file;
  std::string val_file;
  std::string data_file;
  double val_fraction = 0.5;
  std::uint64_t split_seed = 1;
  Index min_dim = 0;
  long batch_upper = 1;
  long batch_lower = 1;
  double model_radius = 10.0;
};

struct AlgorithmConfig {
  std::string name = "stable";  // stable | ttsa | bsa
  StepsizeSchedule schedule;
  BaselineSchedule baseline;
  NeumannParams neumann;
  std::string bsa_inner = "sqrt";  // sqrt | constant
  long bsa_inner_const = 10;
};

struct ExperimentConfig {
  ProblemConfig problem;
  AlgorithmConfig algorithm;
  long iters = 1000;
  std::vector<std::uint64_t> seeds = {0};
  long cadence = 0;  // 0 -> max(1, iters/500)
  double rho = 0.0;  // 0 disables the Moreau column
  double mu_f = 0.0;
  double solve_tol = 1e-12;
  double moreau_tol = 1e-8;
  std::string out_dir = "out";
  std::string prefix = "run";

  long effective_cadence() const { return cadence > 0 ? cadence : std::max(1L, iters / 500); }
  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Instantiates the problem a config describes; deterministic in the config.
std::unique_ptr<BilevelProblem> build_problem(const ProblemConfig& config);

}  // namespace bilevel

#endif  // BILEVEL_CONFIG_HPP
