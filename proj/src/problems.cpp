#include "bilevel/problems.hpp"

#include <cmath>

namespace bilevel {

namespace {

// Stable sigmoid(-t) = 1 / (1 + e^t).
double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// log(1 + e^{-t}) without overflow.
double logistic_loss(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticBilevel

QuadraticBilevel::QuadraticBilevel(QuadraticSpec spec) : spec_(std::move(spec)) {
  const Index d = spec_.coupling.cols();
  const Index dy = spec_.lower_hessian.rows();
  if (d < 1 || dy < 1) throw ConfigError("quadratic: dimensions must be >= 1");
  if (spec_.lower_hessian.cols() != dy || spec_.coupling.rows() != dy ||
      spec_.linear.size() != dy || spec_.target.size() != dy)
    throw ConfigError("quadratic: inconsistent matrix/vector dimensions");
  if ((spec_.lower_hessian - spec_.lower_hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("quadratic: lower Hessian must be symmetric");
  spec_.box.validate();
  if (spec_.box.dim() != d) throw ConfigError("quadratic: box dimension mismatch");
  spec_.noise.validate();
  if (spec_.ridge < 0.0 || spec_.double_well < 0.0)
    throw ConfigError("quadratic: ridge and double_well must be >= 0");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec_.lower_hessian);
  if (eig.info() != Eigen::Success)
    throw NumericalError("quadratic: eigendecomposition of A failed");
  const double mu = eig.eigenvalues().minCoeff();
  if (!(mu > 0.0)) throw ConfigError("quadratic: lower Hessian is not positive definite");
  lower_llt_.compute(spec_.lower_hessian);

  // Closed-form argmin of F over the unbounded box when f is quadratic:
  // (M^T M + ridge I) x* = M^T (target - A^{-1} b),  M = A^{-1} B.
  if (spec_.double_well == 0.0 && spec_.box.is_unbounded()) {
    const Matrix m = lower_llt_.solve(spec_.coupling);
    const Matrix normal = m.transpose() * m + spec_.ridge * Matrix::Identity(d, d);
    Eigen::FullPivLU<Matrix> lu(normal);
    if (!lu.isInvertible())
      throw ConfigError("quadratic: singular normal equations (ridge = 0, rank-deficient coupling)");
    x_star_ = lu.solve(m.transpose() * (spec_.target - lower_llt_.solve(spec_.linear)));
  }

  // Declared constant bundle. Moment bounds are taken over the box clipped
  // to the reference radii; they are valid, not tight.
  ProblemConstants c;
  c.mu_g = mu;
  c.L_g = eig.eigenvalues().maxCoeff();

  const double var_fx = spec_.noise.fx * spec_.noise.fx * static_cast<double>(d);
  const double var_fy = spec_.noise.fy * spec_.noise.fy * static_cast<double>(dy);
  const double var_gy = spec_.noise.gy * spec_.noise.gy * static_cast<double>(dy);
  const double var_gxy = spec_.noise.gxy * spec_.noise.gxy * static_cast<double>(d * dy);
  const double var_gyy =
      spec_.noise.gyy * spec_.noise.gyy * static_cast<double>(dy * (dy + 1)) / 2.0;
  c.sigma_fx = std::sqrt(var_fx);
  c.sigma_fy = std::sqrt(var_fy);
  c.sigma_gy = std::sqrt(var_gy);
  c.sigma_gxy = std::sqrt(var_gxy);
  c.sigma_gyy = std::sqrt(var_gyy);

  double sup_gfx_sq = 0.0;
  double max_curv = spec_.ridge;
  for (Index i = 0; i < d; ++i) {
    double t = spec_.ref_radius_x;
    if (std::isfinite(spec_.box.lo[i]) && std::isfinite(spec_.box.hi[i]))
      t = std::max(std::abs(spec_.box.lo[i]), std::abs(spec_.box.hi[i]));
    const double s = spec_.ridge * t + spec_.double_well * (t * t * t + t);
    sup_gfx_sq += s * s;
    max_curv = std::max(max_curv,
                        spec_.ridge + spec_.double_well * std::max(3.0 * t * t - 1.0, 1.0));
  }
  c.C_fx = std::sqrt(sup_gfx_sq + var_fx);
  const double y_reach = spec_.ref_radius_y + spec_.target.norm();
  c.C_fy = std::sqrt(y_reach * y_reach + var_fy);
  c.C_gxy = std::sqrt(spec_.coupling.squaredNorm() + var_gxy);
  c.C_gyy = std::sqrt(spec_.lower_hessian.squaredNorm() + var_gyy);

  c.L_fx = 0.0;   // grad_x f does not depend on y
  c.L_fy = 1.0;   // grad_y f = y - target
  c.L_gxy = 0.0;  // both Hessians of g are constant
  c.L_gyy = 0.0;
  c.Lbar_fx = max_curv;
  c.Lbar_fy = 0.0;
  c.Lbar_gxy = 0.0;
  c.Lbar_gyy = 0.0;
  c.validate();
  constants_ = c;
}

Vector QuadraticBilevel::grad_f_x(const Point& p) const {
  check_point(p);
  Vector g = spec_.ridge * p.x;
  if (spec_.double_well != 0.0)
    g += spec_.double_well * (p.x.array().cube() - p.x.array()).matrix();
  return g;
}

Vector QuadraticBilevel::grad_f_y(const Point& p) const {
  check_point(p);
  return p.y - spec_.target;
}

Vector QuadraticBilevel::grad_g_y(const Point& p) const {
  check_point(p);
  return spec_.lower_hessian * p.y - (spec_.coupling * p.x + spec_.linear);
}

Matrix QuadraticBilevel::hess_g_xy(const Point& p) const {
  check_point(p);
  return -spec_.coupling.transpose();
}

Matrix QuadraticBilevel::hess_g_yy(const Point& p) const {
  check_point(p);
  return spec_.lower_hessian;
}

double QuadraticBilevel::upper_value(const Point& p) const {
  check_point(p);
  double v = 0.5 * (p.y - spec_.target).squaredNorm() + 0.5 * spec_.ridge * p.x.squaredNorm();
  if (spec_.double_well != 0.0)
    v += spec_.double_well *
         (p.x.array().square().square() / 4.0 - p.x.array().square() / 2.0).sum();
  return v;
}

std::optional<Vector> QuadraticBilevel::lower_solution_closed_form(const Vector& x) const {
  return lower_llt_.solve(spec_.coupling * x + spec_.linear);
}

std::optional<Vector> QuadraticBilevel::upper_minimizer_closed_form() const { return x_star_; }

UpperGradSample QuadraticBilevel::sample_upper(const Point& p, Rng& rng) const {
  check_point(p);
  UpperGradSample s{grad_f_x(p), grad_f_y(p)};
  if (spec_.noise.fx != 0.0) s.g_x += spec_.noise.fx * standard_normal_vector(dim_x(), rng);
  if (spec_.noise.fy != 0.0) s.g_y += spec_.noise.fy * standard_normal_vector(dim_y(), rng);
  return s;
}

std::vector<LowerDerivSample> QuadraticBilevel::sample_lower_multi(std::span<const Point> points,
                                                                   Rng& rng) const {
  if (points.empty()) throw std::invalid_argument("sample_lower_multi: empty point list");
  for (const Point& p : points) check_point(p);

  // One phi per call: the perturbations are drawn once and shared.
  Vector noise_g = Vector::Zero(dim_y());
  Matrix noise_xy = Matrix::Zero(dim_x(), dim_y());
  Matrix noise_yy = Matrix::Zero(dim_y(), dim_y());
  if (spec_.noise.gy != 0.0) noise_g = spec_.noise.gy * standard_normal_vector(dim_y(), rng);
  if (spec_.noise.gxy != 0.0)
    noise_xy = spec_.noise.gxy * standard_normal_matrix(dim_x(), dim_y(), rng);
  if (spec_.noise.gyy != 0.0) noise_yy = symmetric_gaussian(dim_y(), spec_.noise.gyy, rng);

  std::vector<LowerDerivSample> out;
  out.reserve(points.size());
  const Matrix cross = -spec_.coupling.transpose();
  for (const Point& p : points)
    out.emplace_back(grad_g_y(p) + noise_g, cross + noise_xy, spec_.lower_hessian + noise_yy);
  return out;
}

std::unique_ptr<QuadraticBilevel> make_quadratic(QuadraticSpec spec) {
  return std::make_unique<QuadraticBilevel>(std::move(spec));
}

QuadraticSpec random_quadratic_spec(Index d, Index d_y, double condition, double ridge,
                                    const NoiseSpec& noise, Rng& rng) {
  if (condition < 1.0) throw ConfigError("random_quadratic_spec: condition must be >= 1");
  QuadraticSpec spec;
  // Orthogonal basis from a Gaussian matrix, eigenvalues log-spaced in [1, condition].
  const Matrix g = standard_normal_matrix(d_y, d_y, rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector evals(d_y);
  for (Index i = 0; i < d_y; ++i) {
    const double t = d_y == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d_y - 1);
    evals[i] = std::pow(condition, t);
  }
  spec.lower_hessian = q * evals.asDiagonal() * q.transpose();
  spec.lower_hessian = 0.5 * (spec.lower_hessian + spec.lower_hessian.transpose()).eval();
  spec.coupling = standard_normal_matrix(d_y, d, rng) / std::sqrt(static_cast<double>(d));
  spec.linear = standard_normal_vector(d_y, rng);
  spec.target = standard_normal_vector(d_y, rng);
  spec.ridge = ridge;
  spec.noise = noise;
  spec.box = BoxSet::unbounded(d);
  return spec;
}

// ---------------------------------------------------------------------------
// HyperoptLogistic

HyperoptLogistic::HyperoptLogistic(HyperoptSpec spec) : spec_(std::move(spec)) {
  if (spec_.train.n() == 0 || spec_.val.n() == 0)
    throw ConfigError("hyperopt: datasets must be nonempty");
  spec_.train.validate();
  spec_.val.validate();
  if (spec_.train.dim != spec_.val.dim)
    throw ConfigError("hyperopt: train/val feature dimensions differ");
  dim_ = spec_.train.dim;
  if (dim_ < 1) throw ConfigError("hyperopt: feature dimension must be >= 1");
  spec_.box.validate();
  if (spec_.box.dim() != dim_) throw ConfigError("hyperopt: box dimension mismatch");
  if (!(spec_.box.lo.minCoeff() > 0.0))
    throw ConfigError("hyperopt: box must have strictly positive lower bounds (mu_g > 0)");
  if (!spec_.box.hi.allFinite())
    throw ConfigError("hyperopt: box upper bounds must be finite");
  if (spec_.batch_upper < 1 || spec_.batch_lower < 1)
    throw ConfigError("hyperopt: batch sizes must be >= 1");

  const double ra_train = spec_.train.max_row_norm();
  const double ra_val = spec_.val.max_row_norm();
  const double hi_max = spec_.box.hi.maxCoeff();
  const double sd = std::sqrt(static_cast<double>(dim_));

  ProblemConstants c;
  c.mu_g = 2.0 * spec_.box.lo.minCoeff();
  c.L_g = 0.25 * ra_train * ra_train + 2.0 * hi_max;
  c.C_gxy = 2.0 * spec_.model_radius;
  c.C_gyy = 0.25 * ra_train * ra_train + 2.0 * sd * hi_max;
  c.C_fx = 0.0;  // f does not depend on x directly
  c.C_fy = ra_val;
  c.sigma_fx = 0.0;
  c.sigma_fy = ra_val / std::sqrt(static_cast<double>(spec_.batch_upper));
  c.sigma_gy = ra_train / std::sqrt(static_cast<double>(spec_.batch_lower));
  c.sigma_gxy = 0.0;  // the cross Hessian 2 diag(y) is datum-independent
  c.sigma_gyy = 0.25 * ra_train * ra_train / std::sqrt(static_cast<double>(spec_.batch_lower));
  c.L_fx = 0.0;
  c.L_fy = 0.25 * ra_val * ra_val;
  c.L_gxy = 2.0;
  c.L_gyy = ra_train * ra_train * ra_train / (6.0 * std::sqrt(3.0));
  c.Lbar_fx = 0.0;
  c.Lbar_fy = 0.0;
  c.Lbar_gxy = 0.0;
  c.Lbar_gyy = 2.0;
  c.validate();
  constants_ = c;
}

Vector HyperoptLogistic::grad_f_x(const Point& p) const {
  check_point(p);
  return Vector::Zero(dim_);
}

Vector HyperoptLogistic::grad_f_y(const Point& p) const {
  check_point(p);
  Vector g = Vector::Zero(dim_);
  for (Index i = 0; i < spec_.val.n(); ++i) {
    const double c = spec_.val.labels[static_cast<std::size_t>(i)];
    const double s = sigmoid_neg(c * spec_.val.dot_row(i, p.y));
    spec_.val.add_scaled_row(i, -c * s, g);
  }
  return g / static_cast<double>(spec_.val.n());
}

Vector HyperoptLogistic::grad_g_y(const Point& p) const {
  check_point(p);
  Vector g = Vector::Zero(dim_);
  for (Index i = 0; i < spec_.train.n(); ++i) {
    const double c = spec_.train.labels[static_cast<std::size_t>(i)];
    const double s = sigmoid_neg(c * spec_.train.dot_row(i, p.y));
    spec_.train.add_scaled_row(i, -c * s, g);
  }
  g /= static_cast<double>(spec_.train.n());
  g += 2.0 * (p.x.array() * p.y.array()).matrix();
  return g;
}

Matrix HyperoptLogistic::hess_g_xy(const Point& p) const {
  check_point(p);
  Matrix h = Matrix::Zero(dim_, dim_);
  h.diagonal() = 2.0 * p.y;
  return h;
}

Matrix HyperoptLogistic::hess_g_yy(const Point& p) const {
  check_point(p);
  Matrix h = Matrix::Zero(dim_, dim_);
  for (Index i = 0; i < spec_.train.n(); ++i) {
    const double c = spec_.train.labels[static_cast<std::size_t>(i)];
    const double s = sigmoid_neg(c * spec_.train.dot_row(i, p.y));
    const Vector a = spec_.train.dense_row(i);
    h += (s * (1.0 - s)) * (a * a.transpose());
  }
  h /= static_cast<double>(spec_.train.n());
  h += (2.0 * p.x).asDiagonal();
  return h;
}

double HyperoptLogistic::upper_value(const Point& p) const {
  check_point(p);
  double v = 0.0;
  for (Index i = 0; i < spec_.val.n(); ++i)
    v += logistic_loss(spec_.val.labels[static_cast<std::size_t>(i)] * spec_.val.dot_row(i, p.y));
  return v / static_cast<double>(spec_.val.n());
}

UpperGradSample HyperoptLogistic::sample_upper(const Point& p, Rng& rng) const {
  check_point(p);
  const auto idx = minibatch(spec_.val, spec_.batch_upper, rng);
  Vector gy = Vector::Zero(dim_);
  for (Index i : idx) {
    const double c = spec_.val.labels[static_cast<std::size_t>(i)];
    const double s = sigmoid_neg(c * spec_.val.dot_row(i, p.y));
    spec_.val.add_scaled_row(i, -c * s, gy);
  }
  gy /= static_cast<double>(idx.size());
  return {Vector::Zero(dim_), std::move(gy)};
}

std::vector<LowerDerivSample> HyperoptLogistic::sample_lower_multi(std::span<const Point> points,
                                                                   Rng& rng) const {
  if (points.empty()) throw std::invalid_argument("sample_lower_multi: empty point list");
  for (const Point& p : points) check_point(p);

  // One shared datum batch for every requested point.
  const auto idx = minibatch(spec_.train, spec_.batch_lower, rng);
  const double inv_b = 1.0 / static_cast<double>(idx.size());

  std::vector<LowerDerivSample> out;
  out.reserve(points.size());
  for (const Point& p : points) {
    Vector hg = Vector::Zero(dim_);
    Matrix hyy = Matrix::Zero(dim_, dim_);
    for (Index i : idx) {
      const double c = spec_.train.labels[static_cast<std::size_t>(i)];
      const double s = sigmoid_neg(c * spec_.train.dot_row(i, p.y));
      spec_.train.add_scaled_row(i, -c * s, hg);
      const Vector a = spec_.train.dense_row(i);
      hyy += (s * (1.0 - s)) * (a * a.transpose());
    }
    hg *= inv_b;
    hyy *= inv_b;
    hg += 2.0 * (p.x.array() * p.y.array()).matrix();
    hyy += (2.0 * p.x).asDiagonal();
    Matrix hxy = Matrix::Zero(dim_, dim_);
    hxy.diagonal() = 2.0 * p.y;
    out.emplace_back(std::move(hg), std::move(hxy), std::move(hyy));
  }
  return out;
}

std::unique_ptr<HyperoptLogistic> make_hyperopt_logistic(HyperoptSpec spec) {
  return std::make_unique<HyperoptLogistic>(std::move(spec));
}

Dataset synthetic_logistic_data(Index n, Index dim, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw ConfigError("synthetic_logistic_data: n and dim must be >= 1");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  const Vector w = 3.0 * standard_normal_vector(dim, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Dataset data;
  data.dim = dim;
  data.rows.reserve(static_cast<std::size_t>(n));
  data.labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Vector a = scale * standard_normal_vector(dim, rng);
    const double p_pos = 1.0 - sigmoid_neg(a.dot(w));
    const double label = unif(rng) < p_pos ? 1.0 : -1.0;
    std::vector<std::pair<Index, double>> row;
    row.reserve(static_cast<std::size_t>(dim));
    for (Index j = 0; j < dim; ++j) row.emplace_back(j, a[j]);
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace bilevel
