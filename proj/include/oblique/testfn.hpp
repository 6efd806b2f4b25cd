#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "oblique/domain.hpp"
#include "oblique/errors.hpp"
#include "oblique/field.hpp"
#include "oblique/report.hpp"
#include "oblique/types.hpp"

namespace oblique {

/// Parameters of g(xi, p) = |p|^2 f(<p, xi>/|p|). On the band |u| <= theta the
/// profile is f(u) = band_constant (1 - u^2); over [theta, theta + blend_width]
/// it is blended (C^3) into a positive constant.
struct TestFunctionParams {
  double theta = 0.9;
  double band_constant = 1.0;
  double blend_width = 0.05;
  /// Filled in by verify_test_properties.
  double chi = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
};

/// Throws ParameterError unless 0 < theta, theta + blend_width < 1 and the
/// band constant and blend width are positive.
void validate(const TestFunctionParams& params);

/// Lower constant of g: the smallest profile value f(theta + blend_width).
double g_lower_constant(const TestFunctionParams& params);

template <typename Scalar>
struct ProfileValue {
  Scalar f, df, d2f;
};

template <typename Scalar>
struct GJet {
  Scalar value;
  VecT<Scalar> grad_xi;
  VecT<Scalar> grad_p;
  MatT<Scalar> hess_xixi;
  /// (i, j) = d^2 g / d xi_i d p_j.
  MatT<Scalar> hess_xip;
  MatT<Scalar> hess_pp;
};

namespace detail {

/// Nodes and weights of 20-point Gauss-Legendre on [-1, 1].
const std::vector<std::pair<double, double>>& gauss_legendre20();

/// Septic smoothstep on [0, 1] (C^3 at both ends) and its first two derivatives.
template <typename Scalar>
Scalar smoothstep7(Scalar s) {
  const Scalar s4 = s * s * s * s;
  return s4 * (Scalar(35) - Scalar(84) * s + Scalar(70) * s * s - Scalar(20) * s * s * s);
}

template <typename Scalar>
Scalar smoothstep7_d(Scalar s) {
  const Scalar om = Scalar(1) - s;
  return Scalar(140) * s * s * s * om * om * om;
}

template <typename Scalar>
Scalar smoothstep7_d2(Scalar s) {
  const Scalar om = Scalar(1) - s;
  return Scalar(420) * s * s * om * om * (Scalar(1) - Scalar(2) * s);
}

template <typename Scalar>
Scalar smoothstep_down(Scalar v, double theta, double bw) {
  // 1 on [0, theta], 0 beyond theta + bw.
  if (v <= Scalar(theta)) return Scalar(1);
  if (v >= Scalar(theta + bw)) return Scalar(0);
  return Scalar(1) - smoothstep7((v - Scalar(theta)) / Scalar(bw));
}

template <typename Scalar>
Scalar smoothstep_down_d(Scalar v, double theta, double bw) {
  if (v <= Scalar(theta) || v >= Scalar(theta + bw)) return Scalar(0);
  return -smoothstep7_d((v - Scalar(theta)) / Scalar(bw)) / Scalar(bw);
}

/// q(v) = -2 v s(v) / (1 - v^2) for v >= 0, the logarithmic derivative of f.
template <typename Scalar>
Scalar log_slope(Scalar v, double theta, double bw) {
  return -Scalar(2) * v * smoothstep_down(v, theta, bw) / (Scalar(1) - v * v);
}

template <typename Scalar>
Scalar log_slope_d(Scalar v, double theta, double bw) {
  const Scalar one_m = Scalar(1) - v * v;
  const Scalar s = smoothstep_down(v, theta, bw);
  const Scalar ds = smoothstep_down_d(v, theta, bw);
  return -Scalar(2) * s / one_m - Scalar(2) * v * ds / one_m - Scalar(4) * v * v * s / (one_m * one_m);
}

/// int_theta^v q over the blend, v in [theta, theta + bw].
template <typename Scalar>
Scalar blend_integral(Scalar v, double theta, double bw) {
  const Scalar half = (v - Scalar(theta)) / Scalar(2);
  const Scalar mid = (v + Scalar(theta)) / Scalar(2);
  Scalar sum(0);
  for (const auto& [node, weight] : gauss_legendre20()) sum += Scalar(weight) * log_slope(mid + half * Scalar(node), theta, bw);
  return half * sum;
}

}  // namespace detail

/// Profile f and its first two derivatives at u in [-1, 1].
template <typename Scalar>
ProfileValue<Scalar> radial_profile(const TestFunctionParams& params, Scalar u) {
  using std::abs;
  using std::log;
  using std::exp;
  const double theta = params.theta, bw = params.blend_width;
  const Scalar v = abs(u);
  const Scalar sign = u < Scalar(0) ? Scalar(-1) : Scalar(1);
  const Scalar c(params.band_constant);
  if (v <= Scalar(theta)) return {c * (Scalar(1) - u * u), -Scalar(2) * c * u, -Scalar(2) * c};
  const Scalar base = log(Scalar(1) - Scalar(theta * theta));
  if (v >= Scalar(theta + bw)) {
    const Scalar f = c * exp(base + detail::blend_integral(Scalar(theta + bw), theta, bw));
    return {f, Scalar(0), Scalar(0)};
  }
  const Scalar f = c * exp(base + detail::blend_integral(v, theta, bw));
  const Scalar q = detail::log_slope(v, theta, bw);
  const Scalar dq = detail::log_slope_d(v, theta, bw);
  return {f, sign * f * q, f * (dq + q * q)};
}

/// g(xi, p) = |p|^2 f(<p, xi>/|p|) with all first and second derivatives.
/// Requires |xi| = 1 within 1e-9 unless `check_unit` is false (finite
/// differences step off the sphere; the formula extends homogeneously).
template <typename Scalar>
GJet<Scalar> eval_g(const TestFunctionParams& params, const VecT<Scalar>& xi, const VecT<Scalar>& p,
                    bool check_unit = true) {
  using std::abs;
  using std::sqrt;
  const int n = static_cast<int>(xi.size());
  if (p.size() != n) throw ParameterError("eval_g: xi and p dimensions differ");
  if (check_unit && abs(xi.norm() - Scalar(1)) > Scalar(1e-9)) throw PreconditionError("eval_g: xi must be a unit vector");
  GJet<Scalar> out;
  out.grad_xi = VecT<Scalar>::Zero(n);
  out.grad_p = VecT<Scalar>::Zero(n);
  out.hess_xixi = MatT<Scalar>::Zero(n, n);
  out.hess_xip = MatT<Scalar>::Zero(n, n);
  const Scalar r = p.norm();
  const MatT<Scalar> I = MatT<Scalar>::Identity(n, n);
  if (r == Scalar(0)) {
    // Limit along p^ = xi: u = 1 lies past the blend, where f is constant.
    const ProfileValue<Scalar> pr = radial_profile(params, Scalar(1));
    out.value = Scalar(0);
    out.hess_pp = Scalar(2) * pr.f * I;
    return out;
  }
  const VecT<Scalar> ph = p / r;
  Scalar u = p.dot(xi) / r;
  if (u > Scalar(1)) u = Scalar(1);
  if (u < Scalar(-1)) u = Scalar(-1);
  const ProfileValue<Scalar> pr = radial_profile(params, u);
  const VecT<Scalar> w = xi - u * ph;
  out.value = r * r * pr.f;
  out.grad_xi = r * pr.df * p;
  out.grad_p = Scalar(2) * pr.f * p + r * pr.df * w;
  out.hess_xixi = pr.d2f * p * p.transpose();
  out.hess_xip = pr.df * p * ph.transpose() + pr.d2f * p * w.transpose() + r * pr.df * I;
  out.hess_pp = (Scalar(2) * pr.f - u * pr.df) * I + pr.df * (ph * w.transpose() + w * ph.transpose()) +
                u * pr.df * ph * ph.transpose() + pr.d2f * w * w.transpose();
  return out;
}

/// The clamp: nu = 1 on (-inf, 1/2], nu(s) = s on [3/2, inf) (hence on
/// [2, inf)), nu' a septic smoothstep in between. C^3, monotone, 0 <= nu' <= 1
/// and nu(s) >= s everywhere.
template <typename Scalar>
ProfileValue<Scalar> clamp_nu(Scalar t) {
  if (t <= Scalar(0.5)) return {Scalar(1), Scalar(0), Scalar(0)};
  if (t >= Scalar(1.5)) return {t, Scalar(1), Scalar(0)};
  const Scalar s = t - Scalar(0.5);
  const Scalar s5 = s * s * s * s * s;
  const Scalar value = Scalar(1) + s5 * (Scalar(7) - Scalar(14) * s + Scalar(10) * s * s - Scalar(2.5) * s * s * s);
  return {value, detail::smoothstep7(s), detail::smoothstep7_d(s)};
}

/// h(t, x, p) = nu(g(gamma(t, x), p)).
struct HJet {
  double value = 0.0;
  double dt = 0.0;
  Vec grad_x;
  Vec grad_p;
  Mat hess_xx;
  /// (i, j) = d^2 h / d x_i d p_j.
  Mat hess_xp;
  Mat hess_pp;
};

/// Throws RegionError where gamma is undefined.
HJet eval_h(const TestFunctionParams& params, const ReflectionField& field, const DomainSpec& domain, double t,
            const Vec& x, const Vec& p);

/// w(t, x, y) = eps h(t, x, (x - y)/eps). `hess` is the joint (x, y) Hessian.
struct WJet {
  double value = 0.0;
  double dt = 0.0;
  Vec grad_x;
  Vec grad_y;
  PairMat hess;
};

WJet eval_w_eps(const TestFunctionParams& params, const ReflectionField& field, const DomainSpec& domain, double t,
                const Vec& x, const Vec& y, double eps);

/// Boundary function alpha: a sum of profiles gain * width * psi(depth / width)
/// over the boundary pieces, psi(s) = s (1 - s)^4 on [0, 1] and 0 beyond.
/// Supported in the band of the given width inside the boundary.
struct AlphaSpec {
  DomainSpec domain;
  double width = 0.0;
  double gain = 1.0;
};

/// Picks the width (a quarter of the minimal width unless given) and the
/// smallest gain with <grad alpha, gamma> >= 1 on dense boundary samples
/// (5% headroom when the raw profile falls short). Throws PreconditionError
/// when gamma is tangent or outward somewhere on the boundary.
AlphaSpec make_alpha(const DomainSpec& domain, const ReflectionField& field, double width = 0.0);

struct AlphaJet {
  double value = 0.0;
  double dt = 0.0;
  Vec grad;
  Mat hess;
};

AlphaJet eval_alpha(const AlphaSpec& spec, double t, const Vec& x);

struct TestSampler {
  std::size_t points = 10000;
  std::uint64_t seed = 7;
  std::vector<double> eps{1.0, 1e-1, 1e-2};
  double p_min = 1e-3;
  double p_max = 1e2;
  /// Safety factor applied to constants certified on the calibration sample.
  double safety = 1.5;
  double margin = 1e-8;
  double fd_tolerance = 1e-5;
};

/// Samples every property of g, h, w_eps and alpha. Constants are certified
/// on a calibration sample and checked on an independent one; the resulting
/// chi and C are written into `params`.
PropertyReport verify_test_properties(TestFunctionParams& params, const ReflectionField& field,
                                      const DomainSpec& domain, const TestSampler& sampler = {});

}  // namespace oblique
