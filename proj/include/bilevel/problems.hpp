#ifndef BILEVEL_PROBLEMS_HPP
#define BILEVEL_PROBLEMS_HPP

#include <memory>

#include "bilevel/data.hpp"
#include "bilevel/oracle.hpp"

namespace bilevel {

/// Strongly convex quadratic bilevel family with closed forms:
///
///   g(x, y) = 1/2 y^T A y - y^T (B x + b)
///   f(x, y) = 1/2 |y - target|^2 + ridge/2 |x|^2
///             + double_well * sum_i (x_i^4/4 - x_i^2/2)
///
/// The quartic double-well term (off by default) makes the upper objective
/// nonconvex while keeping it weakly convex, for stationarity benchmarks.
struct QuadraticSpec {
  Matrix lower_hessian;  // A, symmetric positive definite, d_y x d_y
  Matrix coupling;       // B, d_y x d
  Vector linear;         // b, d_y
  Vector target;         // upper target for y, d_y
  double ridge = 0.0;
  double double_well = 0.0;
  NoiseSpec noise;
  BoxSet box;
  // Reference radii used when declaring moment bounds over unbounded sets.
  double ref_radius_x = 10.0;
  double ref_radius_y = 10.0;
};

class QuadraticBilevel final : public BilevelProblem {
 public:
  explicit QuadraticBilevel(QuadraticSpec spec);

  Index dim_x() const override { return spec_.coupling.cols(); }
  Index dim_y() const override { return spec_.lower_hessian.rows(); }

  UpperGradSample sample_upper(const Point& point, Rng& rng) const override;
  std::vector<LowerDerivSample> sample_lower_multi(std::span<const Point> points,
                                                   Rng& rng) const override;
  ProblemConstants constants() const override { return constants_; }

  Vector grad_f_x(const Point& point) const override;
  Vector grad_f_y(const Point& point) const override;
  Vector grad_g_y(const Point& point) const override;
  Matrix hess_g_xy(const Point& point) const override;
  Matrix hess_g_yy(const Point& point) const override;
  double upper_value(const Point& point) const override;
  const BoxSet& domain() const override { return spec_.box; }

  std::optional<Vector> lower_solution_closed_form(const Vector& x) const override;
  std::optional<Vector> upper_minimizer_closed_form() const override;

  const QuadraticSpec& spec() const { return spec_; }

 private:
  QuadraticSpec spec_;
  Eigen::LLT<Matrix> lower_llt_;  // factorization of A
  ProblemConstants constants_;
  std::optional<Vector> x_star_;
};

std::unique_ptr<QuadraticBilevel> make_quadratic(QuadraticSpec spec);

/// Random well-conditioned instance: A has eigenvalues log-spaced in
/// [1, condition], B/b/target are Gaussian, the box is unbounded.
QuadraticSpec random_quadratic_spec(Index d, Index d_y, double condition, double ridge,
                                    const NoiseSpec& noise, Rng& rng);

/// Hyperparameter optimization for per-coordinate ridge penalties of a
/// logistic model: the lower level trains y on `train` under penalty
/// sum_i x_i y_i^2, the upper level scores y on `val`.
///
/// x is constrained to a positive box so the lower level stays strongly
/// convex with mu_g = 2 min(box.lo).
struct HyperoptSpec {
  Dataset train;
  Dataset val;
  BoxSet box;
  long batch_upper = 1;  // xi draws per sample
  long batch_lower = 1;  // phi draws per sample
  // Reference bound on |y| used for declared moment constants.
  double model_radius = 10.0;
};

class HyperoptLogistic final : public BilevelProblem {
 public:
  explicit HyperoptLogistic(HyperoptSpec spec);

  Index dim_x() const override { return dim_; }
  Index dim_y() const override { return dim_; }

  UpperGradSample sample_upper(const Point& point, Rng& rng) const override;
  std::vector<LowerDerivSample> sample_lower_multi(std::span<const Point> points,
                                                   Rng& rng) const override;
  ProblemConstants constants() const override { return constants_; }

  Vector grad_f_x(const Point& point) const override;
  Vector grad_f_y(const Point& point) const override;
  Vector grad_g_y(const Point& point) const override;
  Matrix hess_g_xy(const Point& point) const override;
  Matrix hess_g_yy(const Point& point) const override;
  double upper_value(const Point& point) const override;
  const BoxSet& domain() const override { return spec_.box; }

  const HyperoptSpec& spec() const { return spec_; }

 private:
  HyperoptSpec spec_;
  Index dim_ = 0;
  ProblemConstants constants_;
};

std::unique_ptr<HyperoptLogistic> make_hyperopt_logistic(HyperoptSpec spec);

/// Linearly-separable-ish binary logistic data with unit-scale rows.
Dataset synthetic_logistic_data(Index n, Index dim, std::uint64_t seed);

}  // namespace bilevel

#endif  // BILEVEL_PROBLEMS_HPP
