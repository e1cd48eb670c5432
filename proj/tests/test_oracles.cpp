#include <doctest.h>

#include "bilevel/problems.hpp"

using namespace bilevel;

namespace {

QuadraticSpec small_spec(const NoiseSpec& noise) {
  QuadraticSpec spec;
  spec.lower_hessian = Matrix{{2.0, 0.5}, {0.5, 1.5}};
  spec.coupling = Matrix{{1.0, -0.3}, {0.2, 0.8}};
  spec.linear = Vector{{0.1, -0.2}};
  spec.target = Vector{{1.0, 0.5}};
  spec.ridge = 0.2;
  spec.noise = noise;
  spec.box = BoxSet::unbounded(2);
  return spec;
}

Point random_point(Index d, Index dy, Rng& rng) {
  return {standard_normal_vector(d, rng), standard_normal_vector(dy, rng)};
}

}  // namespace

TEST_CASE("zero-noise samples equal the deterministic channels exactly") {
  auto problem = make_quadratic(small_spec(NoiseSpec{}));
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const Point p = random_point(2, 2, rng);
    const auto up = problem->sample_upper(p, rng);
    CHECK((up.g_x - problem->grad_f_x(p)).norm() == 0.0);
    CHECK((up.g_y - problem->grad_f_y(p)).norm() == 0.0);
    const auto low = problem->sample_lower_multi(std::span<const Point>(&p, 1), rng);
    CHECK((low[0].h_g - problem->grad_g_y(p)).norm() == 0.0);
    CHECK((low[0].h_xy - problem->hess_g_xy(p)).norm() == 0.0);
    CHECK((low[0].h_yy - problem->hess_g_yy(p)).norm() == 0.0);
  }
}

TEST_CASE("same stream state gives bitwise-identical samples") {
  auto problem = make_quadratic(small_spec(NoiseSpec::uniform(0.7)));
  const Point p{Vector{{0.4, -1.2}}, Vector{{0.9, 0.3}}};
  Rng a(42), b(42);
  const auto ua = problem->sample_upper(p, a);
  const auto ub = problem->sample_upper(p, b);
  CHECK(ua.g_x == ub.g_x);
  CHECK(ua.g_y == ub.g_y);
  const auto la = problem->sample_lower_multi(std::span<const Point>(&p, 1), a);
  const auto lb = problem->sample_lower_multi(std::span<const Point>(&p, 1), b);
  CHECK(la[0].h_g == lb[0].h_g);
  CHECK(la[0].h_xy == lb[0].h_xy);
  CHECK(la[0].h_yy == lb[0].h_yy);
}

TEST_CASE("shared-sample contract: permuting the point list permutes the output") {
  auto problem = make_quadratic(small_spec(NoiseSpec::uniform(0.5)));
  Rng rng(11);
  const Point p1 = random_point(2, 2, rng);
  const Point p2 = random_point(2, 2, rng);

  const Point fwd[2] = {p1, p2};
  const Point rev[2] = {p2, p1};
  Rng s1(99), s2(99);
  const auto a = problem->sample_lower_multi(std::span<const Point>(fwd, 2), s1);
  const auto b = problem->sample_lower_multi(std::span<const Point>(rev, 2), s2);
  CHECK(a[0].h_g == b[1].h_g);
  CHECK(a[1].h_xy == b[0].h_xy);
  CHECK(a[0].h_yy == b[1].h_yy);

  // identical points under one phi give identical samples
  const Point twice[2] = {p1, p1};
  Rng s3(5);
  const auto c = problem->sample_lower_multi(std::span<const Point>(twice, 2), s3);
  CHECK(c[0].h_g == c[1].h_g);
  CHECK(c[0].h_yy == c[1].h_yy);
}

TEST_CASE("shared additive noise cancels in sample-minus-deterministic differences") {
  auto problem = make_quadratic(small_spec(NoiseSpec::uniform(0.9)));
  Rng rng(21);
  const Point p1 = random_point(2, 2, rng);
  const Point p2 = random_point(2, 2, rng);
  const Point pts[2] = {p1, p2};
  const auto s = problem->sample_lower_multi(std::span<const Point>(pts, 2), rng);
  CHECK(((s[0].h_xy - problem->hess_g_xy(p1)) - (s[1].h_xy - problem->hess_g_xy(p2))).norm() ==
        0.0);
  CHECK(((s[0].h_yy - problem->hess_g_yy(p1)) - (s[1].h_yy - problem->hess_g_yy(p2))).norm() ==
        0.0);
  CHECK(((s[0].h_g - problem->grad_g_y(p1)) - (s[1].h_g - problem->grad_g_y(p2))).norm() <=
        1e-14);
}

TEST_CASE("monte-carlo unbiasedness of every oracle channel") {
  const double sigma = 0.4;
  auto problem = make_quadratic(small_spec(NoiseSpec::uniform(sigma)));
  Rng point_rng(1234);
  const long n = 100000;
  const double tol_vec = 4.0 * sigma / std::sqrt(static_cast<double>(n));

  for (int trial = 0; trial < 3; ++trial) {
    const Point p = random_point(2, 2, point_rng);
    Rng rng(500 + trial);
    Vector mean_gx = Vector::Zero(2), mean_gy = Vector::Zero(2), mean_hg = Vector::Zero(2);
    Matrix mean_xy = Matrix::Zero(2, 2), mean_yy = Matrix::Zero(2, 2);
    for (long i = 0; i < n; ++i) {
      const auto up = problem->sample_upper(p, rng);
      mean_gx += up.g_x;
      mean_gy += up.g_y;
      const auto low = problem->sample_lower_multi(std::span<const Point>(&p, 1), rng);
      mean_hg += low[0].h_g;
      mean_xy += low[0].h_xy;
      mean_yy += low[0].h_yy;
    }
    const double inv = 1.0 / static_cast<double>(n);
    CHECK((mean_gx * inv - problem->grad_f_x(p)).cwiseAbs().maxCoeff() < tol_vec);
    CHECK((mean_gy * inv - problem->grad_f_y(p)).cwiseAbs().maxCoeff() < tol_vec);
    CHECK((mean_hg * inv - problem->grad_g_y(p)).cwiseAbs().maxCoeff() < tol_vec);
    CHECK((mean_xy * inv - problem->hess_g_xy(p)).cwiseAbs().maxCoeff() < tol_vec);
    // off-diagonal entries of the symmetrized channel have std sigma/sqrt(2)
    CHECK((mean_yy * inv - problem->hess_g_yy(p)).cwiseAbs().maxCoeff() < tol_vec);
  }
}

TEST_CASE("upper sample mean vanishes at the target") {
  // f = 1/2 |y - target|^2 with y at the target: grad_y f = 0 in expectation
  QuadraticSpec spec = small_spec(NoiseSpec{});
  spec.noise.fy = 0.3;
  spec.ridge = 0.0;
  auto problem = make_quadratic(spec);
  const Point p{Vector::Zero(2), spec.target};
  Rng rng(77);
  Vector mean = Vector::Zero(2);
  const long n = 100000;
  for (long i = 0; i < n; ++i) mean += problem->sample_upper(p, rng).g_y;
  CHECK((mean / static_cast<double>(n)).cwiseAbs().maxCoeff() <
        4.0 * 0.3 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("constants report the lower spectrum and zero noise collapses sigmas") {
  QuadraticSpec spec = small_spec(NoiseSpec{});
  spec.lower_hessian = Vector{{1.0, 3.0}}.asDiagonal();
  auto problem = make_quadratic(spec);
  const ProblemConstants c = problem->constants();
  CHECK(c.mu_g == doctest::Approx(1.0));
  CHECK(c.L_g == doctest::Approx(3.0));
  CHECK(c.sigma_fx == 0.0);
  CHECK(c.sigma_fy == 0.0);
  CHECK(c.sigma_gy == 0.0);
  CHECK(c.sigma_gxy == 0.0);
  CHECK(c.sigma_gyy == 0.0);
  CHECK(c.C_gxy == doctest::Approx(spec.coupling.norm()));
}

TEST_CASE("oracle input validation") {
  auto problem = make_quadratic(small_spec(NoiseSpec{}));
  Rng rng(1);
  const Point bad{Vector::Zero(3), Vector::Zero(2)};
  CHECK_THROWS_AS(problem->sample_upper(bad, rng), std::invalid_argument);
  CHECK_THROWS_AS(problem->sample_lower_multi(std::span<const Point>(), rng),
                  std::invalid_argument);

  QuadraticSpec indefinite = small_spec(NoiseSpec{});
  indefinite.lower_hessian = Vector{{1.0, -0.5}}.asDiagonal();
  CHECK_THROWS_AS(make_quadratic(indefinite), ConfigError);
}
