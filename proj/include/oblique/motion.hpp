#pragma once

#include <array>
#include <functional>
#include <vector>

namespace oblique {

/// Scalar motion law m(t) for domain boundaries: a piecewise cubic
/// polynomial (coefficient table in local time t - t_k) plus an optional
/// square-root term s * sqrt(t). The square-root term is the only way to
/// express motions that are Hölder-1/2 but not Lipschitz at t = 0.
class Motion {
 public:
  using Coefficients = std::array<double, 4>;

  Motion() : Motion(constant(0.0)) {}

  /// Knots t_0 < ... < t_K and one coefficient row per segment. Evaluation
  /// left of t_0 or right of t_K extrapolates the end segments.
  Motion(std::vector<double> knots, std::vector<Coefficients> coefficients, double sqrt_scale = 0.0);

  static Motion constant(double value);
  static Motion linear(double value, double slope);
  /// Single cubic c0 + c1 t + c2 t^2 + c3 t^3 (fewer coefficients allowed).
  static Motion polynomial(const std::vector<double>& coefficients);
  /// Cubic Hermite spline through values and derivatives at the knots.
  static Motion hermite(const std::vector<double>& knots, const std::vector<double>& values,
                        const std::vector<double>& derivatives);
  /// Hermite spline of a smooth function with `segments` uniform pieces on [0, horizon].
  static Motion sampled(const std::function<double(double)>& f, const std::function<double(double)>& df,
                        double horizon, int segments);
  /// offset + amplitude * sin(frequency * t + phase), as a dense Hermite spline.
  static Motion sine(double amplitude, double frequency, double phase, double offset, double horizon,
                     int segments = 512);
  /// offset + scale * sqrt(t).
  static Motion square_root(double scale, double offset = 0.0);

  double value(double t) const;
  /// Exact derivative; +-inf at t = 0 when a square-root term is present.
  double derivative(double t) const;

  /// m~(s) = m(horizon - s). Not available with a square-root term.
  Motion reversed(double horizon) const;

  Motion plus(double offset) const;

  /// sup |m'| over [0, horizon], sampled. Infinite with a square-root term.
  double max_speed(double horizon, int samples = 2048) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Coefficients>& coefficients() const { return coeffs_; }
  double sqrt_scale() const { return sqrt_scale_; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> knots_;
  std::vector<Coefficients> coeffs_;
  double sqrt_scale_ = 0.0;
};

}  // namespace oblique
