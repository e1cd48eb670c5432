#ifndef BILEVEL_TYPES_HPP
#define BILEVEL_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

namespace bilevel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Seeded random stream. Every sampling operation takes one explicitly;
/// the library never reads ambient randomness.
using Rng = std::mt19937_64;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Upper variable x paired with lower variable y.
struct Point {
  Vector x;
  Vector y;
};

/// One stochastic draw of the upper-level gradients at a point.
struct UpperGradSample {
  Vector g_x;  // estimate of grad_x f(x, y)
  Vector g_y;  // estimate of grad_y f(x, y)
};

/// One stochastic draw of the lower-level derivatives at a point.
/// h_yy is symmetrized at construction.
struct LowerDerivSample {
  Vector h_g;   // estimate of grad_y g(x, y)
  Matrix h_xy;  // estimate of the d x d_y cross Hessian
  Matrix h_yy;  // estimate of the d_y x d_y lower Hessian, symmetric

  LowerDerivSample(Vector g, Matrix xy, Matrix yy)
      : h_g(std::move(g)),
        h_xy(std::move(xy)),
        h_yy(0.5 * (yy + yy.transpose())) {}
};

/// Oracle draws consumed so far, upper (xi) and lower (phi) streams
/// counted separately.
struct SampleCounter {
  std::int64_t xi = 0;
  std::int64_t phi = 0;

  std::int64_t total() const { return xi + phi; }
};

/// Constant bundle declared by a problem: strong convexity, moment and
/// variance bounds, and Lipschitz moduli of the stochastic derivative maps.
///
/// sigma_* are whole-channel standard deviations: E|sample - mean|^2 <= sigma^2
/// in the Euclidean/Frobenius norm. C_* bound second moments the same way.
/// L_* are Lipschitz moduli in y at fixed x; Lbar_* in x at fixed y.
struct ProblemConstants {
  double mu_g = 0.0;  // lower-level strong convexity, > 0
  double L_g = 0.0;   // Lipschitz modulus of grad_y g in y

  double C_gxy = 0.0;
  double C_fx = 0.0;
  double C_fy = 0.0;
  double C_gyy = 0.0;

  double sigma_fx = 0.0;
  double sigma_fy = 0.0;
  double sigma_gy = 0.0;
  double sigma_gxy = 0.0;
  double sigma_gyy = 0.0;

  double L_fx = 0.0;
  double L_fy = 0.0;
  double L_gxy = 0.0;
  double L_gyy = 0.0;
  double Lbar_fx = 0.0;
  double Lbar_fy = 0.0;
  double Lbar_gxy = 0.0;
  double Lbar_gyy = 0.0;

  void validate() const {
    if (!(mu_g > 0.0))
      throw ConfigError("problem cannot certify mu_g > 0");
    if (L_g < mu_g)
      throw ConfigError("constants require L_g >= mu_g");
    for (double v : {C_gxy, C_fx, C_fy, C_gyy, sigma_fx, sigma_fy, sigma_gy,
                     sigma_gxy, sigma_gyy, L_fx, L_fy, L_gxy, L_gyy, Lbar_fx,
                     Lbar_fy, Lbar_gxy, Lbar_gyy}) {
      if (v < 0.0 || !std::isfinite(v))
        throw ConfigError("constants must be finite and nonnegative");
    }
  }
};

}  // namespace bilevel

#endif  // BILEVEL_TYPES_HPP
