#include "bilevel/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

#include "bilevel/csv.hpp"

namespace bilevel {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config: bad number for '" + key + "': " + s);
  return v;
}

long to_long(const std::string& key, const std::string& s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config: bad integer for '" + key + "': " + s);
  return v;
}

/// Pulls typed values out of one section, tracking which keys were consumed.
class Section {
 public:
  Section(std::string name, const std::map<std::string, std::string>* kv)
      : name_(std::move(name)), kv_(kv) {}

  bool has(const std::string& key) const { return kv_ && kv_->count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    seen_.insert(key);
    return kv_->at(key);
  }
  double num(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    seen_.insert(key);
    return to_double(name_ + "." + key, kv_->at(key));
  }
  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    seen_.insert(key);
    return to_long(name_ + "." + key, kv_->at(key));
  }
  std::vector<std::uint64_t> seed_list(const std::string& key,
                                       std::vector<std::uint64_t> fallback) {
    if (!has(key)) return fallback;
    seen_.insert(key);
    std::vector<std::uint64_t> out;
    std::istringstream ss(kv_->at(key));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      out.push_back(static_cast<std::uint64_t>(to_long(name_ + "." + key, tok)));
    }
    if (out.empty()) throw ConfigError("config: '" + key + "' must list at least one seed");
    return out;
  }

  void reject_unknown() const {
    if (!kv_) return;
    for (const auto& [key, value] : *kv_)
      if (!seen_.count(key))
        throw ConfigError("config: unknown key '" + key + "' in section [" + name_ + "]");
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_;
  std::set<std::string> seen_;
};

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: bad section header at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config: empty section name at line " + std::to_string(line_no));
      map[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value at line " + std::to_string(line_no));
    if (section.empty())
      throw ConfigError("config: key outside any section at line " + std::to_string(line_no));
    if (!map[section].emplace(key, value).second)
      throw ConfigError("config: duplicate key '" + key + "' in [" + section + "]");
  }
  return map;
}

void ExperimentConfig::validate() const {
  if (iters < 1) throw ConfigError("config: iters must be >= 1");
  if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  if (cadence < 0) throw ConfigError("config: cadence must be >= 0");
  if (rho < 0.0) throw ConfigError("config: rho must be >= 0");
  if (!(solve_tol > 0.0) || !(moreau_tol > 0.0))
    throw ConfigError("config: tolerances must be positive");
  if (problem.type != "quadratic" && problem.type != "hyperopt")
    throw ConfigError("config: unknown problem type '" + problem.type + "'");
  if (algorithm.name != "stable" && algorithm.name != "ttsa" && algorithm.name != "bsa")
    throw ConfigError("config: unknown algorithm '" + algorithm.name + "'");
  if (algorithm.name == "stable") algorithm.schedule.validate();
  if (algorithm.name != "stable") {
    algorithm.baseline.validate();
    algorithm.neumann.validate();
    if (algorithm.bsa_inner != "sqrt" && algorithm.bsa_inner != "constant")
      throw ConfigError("config: bsa_inner must be sqrt or constant");
    if (algorithm.bsa_inner_const < 1) throw ConfigError("config: bsa_inner_const must be >= 1");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  const ConfigMap map = parse_config_text(text);
  for (const auto& [name, kv] : map)
    if (name != "problem" && name != "algorithm" && name != "run")
      throw ConfigError("config: unknown section [" + name + "]");

  auto section = [&](const char* name) {
    auto it = map.find(name);
    return Section(name, it == map.end() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;

  Section p = section("problem");
  cfg.problem.type = p.str("type", cfg.problem.type);
  cfg.problem.d = p.integer("d", cfg.problem.d);
  cfg.problem.d_y = p.integer("d_y", cfg.problem.d);  // defaults to d
  cfg.problem.gen_seed = static_cast<std::uint64_t>(p.integer("gen_seed", 1));
  cfg.problem.condition = p.num("condition", cfg.problem.condition);
  cfg.problem.ridge = p.num("ridge", cfg.problem.ridge);
  cfg.problem.double_well = p.num("double_well", cfg.problem.double_well);
  const double sigma_all = p.num("sigma", 0.0);
  cfg.problem.noise = NoiseSpec::uniform(sigma_all);
  cfg.problem.noise.fx = p.num("sigma_fx", cfg.problem.noise.fx);
  cfg.problem.noise.fy = p.num("sigma_fy", cfg.problem.noise.fy);
  cfg.problem.noise.gy = p.num("sigma_gy", cfg.problem.noise.gy);
  cfg.problem.noise.gxy = p.num("sigma_gxy", cfg.problem.noise.gxy);
  cfg.problem.noise.gyy = p.num("sigma_gyy", cfg.problem.noise.gyy);
  const double default_lo = cfg.problem.type == "hyperopt" ? 0.05 : cfg.problem.box_lo;
  const double default_hi = cfg.problem.type == "hyperopt" ? 10.0 : cfg.problem.box_hi;
  cfg.problem.box_lo = p.num("box_lo", default_lo);
  cfg.problem.box_hi = p.num("box_hi", default_hi);
  cfg.problem.ref_radius_x = p.num("ref_radius_x", cfg.problem.ref_radius_x);
  cfg.problem.ref_radius_y = p.num("ref_radius_y", cfg.problem.ref_radius_y);
  cfg.problem.model_radius = p.num("model_radius", cfg.problem.model_radius);
  cfg.problem.data = p.str("data", cfg.problem.data);
  cfg.problem.n = p.integer("n", cfg.problem.n);
  cfg.problem.train_file = p.str("train_file", "");
  cfg.problem.val_file = p.str("val_file", "");
  cfg.problem.data_file = p.str("data_file", "");
  cfg.problem.val_fraction = p.num("val_fraction", cfg.problem.val_fraction);
  cfg.problem.split_seed = static_cast<std::uint64_t>(p.integer("split_seed", 1));
  cfg.problem.min_dim = p.integer("min_dim", 0);
  cfg.problem.batch_upper = p.integer("batch_upper", 1);
  cfg.problem.batch_lower = p.integer("batch_lower", 1);
  p.reject_unknown();

  Section a = section("algorithm");
  cfg.algorithm.name = a.str("name", cfg.algorithm.name);
  const std::string kind = a.str("schedule", "nonconvex");
  if (kind == "nonconvex")
    cfg.algorithm.schedule.kind = ScheduleKind::nonconvex;
  else if (kind == "strongly_convex")
    cfg.algorithm.schedule.kind = ScheduleKind::strongly_convex;
  else if (kind == "constant")
    cfg.algorithm.schedule.kind = ScheduleKind::constant;
  else
    throw ConfigError("config: unknown schedule kind '" + kind + "'");
  cfg.algorithm.schedule.alpha_scale = a.num("alpha_scale", 1.0);
  cfg.algorithm.schedule.alpha_ratio = a.num("alpha_ratio", 0.5);
  cfg.algorithm.schedule.beta_cap = a.num("beta_cap", 0.1);
  cfg.algorithm.schedule.offset = a.integer("k0", 100);
  cfg.algorithm.schedule.alpha_const = a.num("alpha", 0.0);
  cfg.algorithm.schedule.beta_const = a.num("beta", 0.0);
  cfg.algorithm.schedule.tau_const = a.num("tau", 0.0);
  cfg.algorithm.baseline.alpha0 = a.num("alpha0", 0.1);
  cfg.algorithm.baseline.beta0 = a.num("beta0", 0.1);
  cfg.algorithm.baseline.alpha_decay = a.num("alpha_decay", 0.6);
  cfg.algorithm.baseline.beta_decay = a.num("beta_decay", 0.4);
  cfg.algorithm.neumann.terms = a.integer("neumann_terms", 20);
  cfg.algorithm.neumann.scale = a.num("neumann_scale", 0.1);
  cfg.algorithm.neumann.samples_per_term = a.integer("neumann_samples", 1);
  cfg.algorithm.bsa_inner = a.str("bsa_inner", "sqrt");
  cfg.algorithm.bsa_inner_const = a.integer("bsa_inner_const", 10);
  a.reject_unknown();

  Section r = section("run");
  cfg.iters = r.integer("iters", cfg.iters);
  cfg.seeds = r.seed_list("seeds", cfg.seeds);
  cfg.cadence = r.integer("cadence", cfg.cadence);
  cfg.rho = r.num("rho", cfg.rho);
  cfg.mu_f = r.num("mu_f", cfg.mu_f);
  cfg.solve_tol = r.num("solve_tol", cfg.solve_tol);
  cfg.moreau_tol = r.num("moreau_tol", cfg.moreau_tol);
  cfg.out_dir = r.str("out_dir", cfg.out_dir);
  cfg.prefix = r.str("prefix", cfg.prefix);
  r.reject_unknown();

  // The schedule horizon is the run length for the nonconvex kind.
  cfg.algorithm.schedule.horizon = cfg.iters;

  if (const char* env = std::getenv("BILEVEL_OUT_DIR")) cfg.out_dir = env;

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

std::unique_ptr<BilevelProblem> build_problem(const ProblemConfig& config) {
  if (config.type == "quadratic") {
    Rng rng(config.gen_seed);
    QuadraticSpec spec = random_quadratic_spec(config.d, config.d_y, config.condition,
                                               config.ridge, config.noise, rng);
    spec.double_well = config.double_well;
    spec.box = BoxSet::uniform(config.d, config.box_lo, config.box_hi);
    spec.ref_radius_x = config.ref_radius_x;
    spec.ref_radius_y = config.ref_radius_y;
    return make_quadratic(std::move(spec));
  }
  if (config.type == "hyperopt") {
    Dataset train, val;
    if (config.data == "synthetic") {
      Dataset all = synthetic_logistic_data(config.n, config.d, config.gen_seed);
      std::tie(train, val) = split(all, config.val_fraction, config.split_seed);
    } else if (config.data == "file") {
      if (!config.train_file.empty() && !config.val_file.empty()) {
        train = load_libsvm_file(config.train_file, config.min_dim, &std::cerr);
        val = load_libsvm_file(config.val_file, config.min_dim, &std::cerr);
        const Index dim = std::max(train.dim, val.dim);
        train.dim = val.dim = dim;
      } else if (!config.data_file.empty()) {
        Dataset all = load_libsvm_file(config.data_file, config.min_dim, &std::cerr);
        std::tie(train, val) = split(all, config.val_fraction, config.split_seed);
      } else {
        throw ConfigError("config: hyperopt file mode needs train_file+val_file or data_file");
      }
    } else {
      throw ConfigError("config: hyperopt data must be synthetic or file");
    }
    HyperoptSpec spec;
    spec.train = std::move(train);
    spec.val = std::move(val);
    spec.box = BoxSet::uniform(spec.train.dim, config.box_lo, config.box_hi);
    spec.batch_upper = config.batch_upper;
    spec.batch_lower = config.batch_lower;
    spec.model_radius = config.model_radius;
    return make_hyperopt_logistic(std::move(spec));
  }
  throw ConfigError("config: unknown problem type '" + config.type + "'");
}

}  // namespace bilevel
