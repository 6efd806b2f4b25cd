#include "oblique/testfn.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <string>
#include <utility>
#include <variant>

#include "oblique/random.hpp"

namespace oblique {

namespace detail {

const std::vector<std::pair<double, double>>& gauss_legendre20() {
  static const std::vector<std::pair<double, double>> rule = [] {
    const int n = 20;
    std::vector<std::pair<double, double>> out;
    for (int i = 1; i <= n; ++i) {
      double x = std::cos(M_PI * (i - 0.25) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      out.emplace_back(x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    return out;
  }();
  return rule;
}

}  // namespace detail

void validate(const TestFunctionParams& params) {
  if (!(params.theta > 0.0 && params.theta < 1.0)) throw ParameterError("test function: theta must lie in (0, 1)");
  if (!(params.blend_width > 0.0)) throw ParameterError("test function: blend_width must be positive");
  if (!(params.theta + params.blend_width < 1.0)) throw ParameterError("test function: theta + blend_width must be below 1");
  if (!(params.band_constant > 0.0)) throw ParameterError("test function: band_constant must be positive");
}

double g_lower_constant(const TestFunctionParams& params) {
  validate(params);
  return radial_profile(params, params.theta + params.blend_width).f;
}

HJet eval_h(const TestFunctionParams& params, const ReflectionField& field, const DomainSpec& domain, double t,
            const Vec& x, const Vec& p) {
  const FieldJet jet = gamma_jet(field, domain, t, x);
  const GJet<double> g = eval_g(params, jet.value, p);
  const ProfileValue<double> nu = clamp_nu(g.value);
  const int n = static_cast<int>(x.size());
  HJet h;
  h.value = nu.f;
  const Vec jx = jet.jac.transpose() * g.grad_xi;
  h.dt = nu.df * g.grad_xi.dot(jet.dt);
  h.grad_x = nu.df * jx;
  h.grad_p = nu.df * g.grad_p;
  h.hess_pp = nu.d2f * g.grad_p * g.grad_p.transpose() + nu.df * g.hess_pp;
  h.hess_xp = nu.d2f * jx * g.grad_p.transpose() + nu.df * jet.jac.transpose() * g.hess_xip;
  Mat curv = jet.jac.transpose() * g.hess_xixi * jet.jac;
  for (int k = 0; k < n; ++k) curv += g.grad_xi(k) * jet.hess[k];
  h.hess_xx = nu.d2f * jx * jx.transpose() + nu.df * curv;
  return h;
}

WJet eval_w_eps(const TestFunctionParams& params, const ReflectionField& field, const DomainSpec& domain, double t,
                const Vec& x, const Vec& y, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eval_w_eps: eps must be positive");
  const int n = static_cast<int>(x.size());
  const HJet h = eval_h(params, field, domain, t, x, Vec((x - y) / eps));
  WJet w;
  w.value = eps * h.value;
  w.dt = eps * h.dt;
  w.grad_x = eps * h.grad_x + h.grad_p;
  w.grad_y = -h.grad_p;
  const Mat& A = h.hess_xp;
  const Mat Hp = h.hess_pp / eps;
  w.hess.resize(2 * n, 2 * n);
  w.hess.topLeftCorner(n, n) = eps * h.hess_xx + A + A.transpose() + Hp;
  w.hess.topRightCorner(n, n) = -A - Hp;
  w.hess.bottomLeftCorner(n, n) = (-A - Hp).transpose();
  w.hess.bottomRightCorner(n, n) = Hp;
  return w;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Depth of x below one boundary piece with its derivatives.
struct Depth {
  double value;
  double dt;
  Vec grad;
  Mat hess;
};

std::vector<Depth> boundary_depths(const DomainSpec& domain, double t, const Vec& x) {
  std::vector<Depth> out;
  std::visit(overloaded{
                 [&](const MovingInterval& s) {
                   const Mat z = Mat::Zero(1, 1);
                   out.push_back({x(0) - s.lower.value(t), -s.lower.derivative(t), vec1(1.0), z});
                   out.push_back({s.upper.value(t) - x(0), s.upper.derivative(t), vec1(-1.0), z});
                 },
                 [&](const MovingDisk& s) {
                   const Vec c = vec2(s.cx.value(t), s.cy.value(t));
                   const Vec dc = vec2(s.cx.derivative(t), s.cy.derivative(t));
                   const Vec v = x - c;
                   const double rho = v.norm();
                   if (!(rho > 0.0)) throw RegionError("alpha: evaluated at the disk center");
                   const Vec xh = v / rho;
                   const Mat proj = Mat::Identity(2, 2) - xh * xh.transpose();
                   out.push_back({s.radius.value(t) - rho, s.radius.derivative(t) + xh.dot(dc), Vec(-xh), Mat(-proj / rho)});
                 },
                 [&](const MovingScaledPolygon& s) {
                   const Vec c = vec2(s.cx.value(t), s.cy.value(t));
                   const Vec dc = vec2(s.cx.derivative(t), s.cy.derivative(t));
                   const double r = s.scale.value(t), dr = s.scale.derivative(t);
                   for (std::size_t i = 0; i < s.normals.size(); ++i) {
                     const Vec nrm = vec2(s.normals[i](0), s.normals[i](1));
                     out.push_back({r * s.offsets[i] - nrm.dot(x - c), dr * s.offsets[i] + nrm.dot(dc), Vec(-nrm),
                                    Mat::Zero(2, 2)});
                   }
                 }},
             domain.shape());
  return out;
}

// psi(s) = s (1 - s)^4 on s <= 1, 0 beyond; C^3 at s = 1.
ProfileValue<double> alpha_profile(double s) {
  if (s >= 1.0) return {0.0, 0.0, 0.0};
  const double om = 1.0 - s;
  return {s * om * om * om * om, om * om * om * (1.0 - 5.0 * s), om * om * (20.0 * s - 8.0)};
}

AlphaJet alpha_raw(const DomainSpec& domain, double width, double t, const Vec& x) {
  const int n = static_cast<int>(x.size());
  AlphaJet a;
  a.grad = Vec::Zero(n);
  a.hess = Mat::Zero(n, n);
  for (const Depth& d : boundary_depths(domain, t, x)) {
    const ProfileValue<double> psi = alpha_profile(d.value / width);
    a.value += width * psi.f;
    a.dt += psi.df * d.dt;
    a.grad += psi.df * d.grad;
    a.hess += psi.d2f / width * d.grad * d.grad.transpose() + psi.df * d.hess;
  }
  return a;
}

}  // namespace

AlphaSpec make_alpha(const DomainSpec& domain, const ReflectionField& field, double width) {
  if (width <= 0.0) width = 0.25 * domain.min_width();
  if (!(width > 0.0) || width > 0.5 * domain.min_width())
    throw ParameterError("alpha: width must be positive and at most half the minimal width");
  const int times = 17, params = 512;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < times; ++i) {
    const double t = domain.horizon() * i / (times - 1);
    for (int j = 0; j < params; ++j) {
      const Vec x = boundary_point(domain, t, static_cast<double>(j) / params);
      const Vec g = gamma(field, domain, t, x);
      worst = std::min(worst, alpha_raw(domain, width, t, x).grad.dot(g));
    }
  }
  if (!(worst > 0.0)) throw PreconditionError("alpha: gamma is not strictly inward on the boundary");
  return AlphaSpec{domain, width, worst >= 1.0 - 1e-12 ? 1.0 : 1.05 / worst};
}

AlphaJet eval_alpha(const AlphaSpec& spec, double t, const Vec& x) {
  spec.domain.check_time(t);
  AlphaJet a = alpha_raw(spec.domain, spec.width, t, x);
  a.value *= spec.gain;
  a.dt *= spec.gain;
  a.grad *= spec.gain;
  a.hess *= spec.gain;
  return a;
}

namespace {

double opnorm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double rel(double v, double scale) { return v / std::max(1.0, std::abs(scale)); }

/// Norm-wise relative error of a finite-difference estimate, measured
/// against the larger of the analytic block and its natural size (the
/// calibrated bound for that block at the sampled point).
template <class A, class B>
double fd_error(const A& fd, const B& analytic, double natural) {
  const double denom = std::max(static_cast<double>(analytic.norm()), std::abs(natural));
  const double diff = (fd - analytic).norm();
  return denom > 0.0 ? diff / denom : diff;
}

Vec unit_vector(RngStream& rng, int n) {
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// |p| log-uniform in [lo, hi]; half the draws spread <p^, xi> uniformly over [-1, 1].
Vec sample_p(RngStream& rng, const Vec& xi, double lo, double hi) {
  const int n = static_cast<int>(xi.size());
  const double r = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  if (n == 1) return vec1(rng.uniform() < 0.5 ? -r : r);
  if (rng.uniform() < 0.5) return r * unit_vector(rng, n);
  const double u = rng.uniform(-1.0, 1.0);
  Vec perp = unit_vector(rng, n);
  perp -= perp.dot(xi) * xi;
  if (perp.norm() < 1e-12) return r * xi;
  perp.normalize();
  return r * (u * xi + std::sqrt(std::max(0.0, 1.0 - u * u)) * perp);
}

/// A sample of the compact evaluation set. x lies the fraction `a` in
/// [0, 1/2] of the way from boundary_point(t, u) to the center, or for `a` in
/// [-1, 0) up to a tenth of the minimal width outside the boundary.
struct Point {
  double t = 0.0, u = 0.0, a = 0.0, eps = 1.0;
  Vec xi, p;
};

enum class Family { g, h, w };

using Ratios = std::vector<std::pair<std::string, double>>;

class Tally {
 public:
  bool calibrating = true;

  void ratio(const std::string& name, double v, const Point& at, Family family) {
    Bound& b = get(bounds_, bound_order_, name);
    if (!calibrating) {
      b.ver = std::max(b.ver, v);
      ++b.n;
      return;
    }
    b.cal = std::max(b.cal, v);
    if (b.seeds.size() < kSeeds) {
      b.seeds.push_back({v, at, family});
      return;
    }
    auto low = std::min_element(b.seeds.begin(), b.seeds.end(), [](const Seed& l, const Seed& r) { return l.value < r.value; });
    if (v > low->value) *low = {v, at, family};
  }
  void record(const Ratios& rs, const Point& at, Family family) {
    for (const auto& [name, v] : rs) ratio(name, v, at, family);
  }
  void margin(const std::string& name, double violation) {
    if (calibrating) return;
    Margin& m = get(margins_, margin_order_, name);
    m.worst = std::max(m.worst, violation);
    ++m.n;
  }
  double calibrated(const std::string& name) const {
    const auto it = bounds_.find(name);
    return it == bounds_.end() ? 0.0 : it->second.cal;
  }
  /// The largest calibration samples of every bound.
  std::vector<std::tuple<std::string, Family, Point>> seeds() const {
    std::vector<std::tuple<std::string, Family, Point>> out;
    for (const auto& name : bound_order_)
      for (const Seed& s : bounds_.at(name).seeds) out.emplace_back(name, s.family, s.at);
    return out;
  }
  void emit(PropertyReport& report, double safety, double margin_tol, double fd_tol, double& c_max) const {
    for (const auto& name : margin_order_) {
      const Margin& m = margins_.at(name);
      const bool fd = name.rfind("fd_", 0) == 0;
      report.add(name, m.n, m.n ? m.worst : 0.0, fd ? fd_tol : margin_tol, {},
                 fd ? "relative error vs central differences" : std::string{});
    }
    for (const auto& name : bound_order_) {
      const Bound& b = bounds_.at(name);
      const double c = safety * b.cal;
      c_max = std::max(c_max, c);
      const double violation = c > 0.0 ? (b.ver - c) / c : b.ver;
      report.add(name, b.n, violation, margin_tol,
                 {{"certified_C", c}, {"calibration_max", b.cal}, {"verification_max", b.ver}});
    }
  }

 private:
  static constexpr std::size_t kSeeds = 8;
  struct Seed {
    double value;
    Point at;
    Family family;
  };
  struct Bound {
    double cal = 0.0, ver = 0.0;
    std::size_t n = 0;
    std::vector<Seed> seeds;
  };
  struct Margin {
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t n = 0;
  };
  template <class M>
  static typename M::mapped_type& get(M& map, std::vector<std::string>& order, const std::string& name) {
    auto it = map.find(name);
    if (it == map.end()) {
      order.push_back(name);
      it = map.emplace(name, typename M::mapped_type{}).first;
    }
    return it->second;
  }
  std::map<std::string, Bound> bounds_;
  std::map<std::string, Margin> margins_;
  std::vector<std::string> bound_order_, margin_order_;
};

struct Context {
  const TestFunctionParams& params;
  const ReflectionField& field;
  const DomainSpec& domain;
  const TestSampler& sampler;
  double chi;
  double hx, ht;
  Tally& tally;
};

Vec place(const DomainSpec& domain, const Point& s) {
  if (s.a >= 0.0) return interior_point(domain, s.t, s.u, s.a);
  const Vec b = boundary_point(domain, s.t, s.u);
  return Vec(b + 0.1 * domain.min_width() * s.a * inward_normal(domain, s.t, b));
}

double sample_t(RngStream& rng, const Context& c) {
  return rng.uniform(2.0 * c.ht, c.domain.horizon() - 2.0 * c.ht);
}

Point sample_point(RngStream& rng, const Context& c) {
  Point s;
  s.t = sample_t(rng, c);
  s.u = rng.uniform();
  s.a = rng.uniform() < 0.8 ? 0.5 * rng.uniform() : -rng.uniform();
  return s;
}

double w_reach(const Context& c) { return 0.2 * c.domain.min_width(); }

/// Admissible |p| range for a sample of the given family.
std::pair<double, double> p_range(const Context& c, Family family, double eps) {
  if (family != Family::w) return {c.sampler.p_min, c.sampler.p_max};
  const double hi = std::min(c.sampler.p_max, w_reach(c) / eps);
  return {std::min(c.sampler.p_min, 1e-3 * hi), hi};
}

double max_generalized_eigenvalue(const PairMat& hess, double eps, double q2) {
  const int n = static_cast<int>(hess.rows()) / 2;
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2 * n, 2 * n) * q2;
  B.topLeftCorner(n, n) += Eigen::MatrixXd::Identity(n, n) / eps;
  B.bottomRightCorner(n, n) += Eigen::MatrixXd::Identity(n, n) / eps;
  B.topRightCorner(n, n) -= Eigen::MatrixXd::Identity(n, n) / eps;
  B.bottomLeftCorner(n, n) -= Eigen::MatrixXd::Identity(n, n) / eps;
  const Eigen::MatrixXd H = hess;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, B, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Ratios g_ratios(const Context& c, const Point& s) {
  const double r = s.p.norm();
  const GJet<double> g = eval_g(c.params, s.xi, s.p);
  return {{"g_dxi_bound", g.grad_xi.norm() / (r * r)},
          {"g_dxixi_bound", opnorm(g.hess_xixi) / (r * r)},
          {"g_dp_bound", g.grad_p.norm() / r},
          {"g_dxip_bound", opnorm(g.hess_xip) / r},
          {"g_dpp_bound", opnorm(g.hess_pp)}};
}

Ratios h_ratios(const Context& c, const Point& s) {
  const double r = s.p.norm();
  HJet h;
  try {
    h = eval_h(c.params, c.field, c.domain, s.t, place(c.domain, s), s.p);
  } catch (const RegionError&) {
    return {};
  }
  return {{"h_dt_bound", std::abs(h.dt) / (r * r)},
          {"h_dx_bound", h.grad_x.norm() / (r * r)},
          {"h_dxx_bound", opnorm(h.hess_xx) / (r * r)},
          {"h_dp_bound", h.grad_p.norm() / r},
          {"h_dxp_bound", opnorm(h.hess_xp) / r},
          {"h_dpp_bound", opnorm(h.hess_pp)}};
}

Ratios w_ratios(const Context& c, const Point& s) {
  const double theta = c.params.theta, eps = s.eps;
  Vec x, y, gx, gy;
  WJet w;
  try {
    x = place(c.domain, s);
    y = x - eps * s.p;
    gx = gamma(c.field, c.domain, s.t, x);
    gy = gamma(c.field, c.domain, s.t, y);
    w = eval_w_eps(c.params, c.field, c.domain, s.t, x, y, eps);
  } catch (const RegionError&) {
    return {};
  }
  const double dist = (x - y).norm();
  const double q2 = dist * dist / eps;
  Ratios out{{"w_upper_bound", w.value / (eps + q2)}};
  if ((y - x).dot(gx) >= -theta * dist) out.emplace_back("w_dx_gamma_x_bound", std::max(0.0, w.grad_x.dot(gx)) / q2);
  if ((x - y).dot(gy) >= -theta * dist) out.emplace_back("w_dy_gamma_y_bound", std::max(0.0, w.grad_y.dot(gy)) / q2);
  out.emplace_back("w_dt_bound", std::abs(w.dt) / q2);
  out.emplace_back("w_dy_bound", w.grad_y.norm() / (dist / eps));
  out.emplace_back("w_dx_plus_dy_bound", (w.grad_x + w.grad_y).norm() / q2);
  out.emplace_back("w_hessian_bound", std::max(0.0, max_generalized_eigenvalue(w.hess, eps, q2)));
  return out;
}

Ratios ratios_of(const Context& c, Family family, const Point& s) {
  switch (family) {
    case Family::g: return g_ratios(c, s);
    case Family::h: return h_ratios(c, s);
    case Family::w: return w_ratios(c, s);
  }
  return {};
}

Point perturb(const Context& c, Family family, const Point& s, double scale, RngStream& rng) {
  Point out = s;
  const int n = static_cast<int>(s.p.size());
  if (family == Family::g) {
    for (int i = 0; i < n; ++i) out.xi(i) += 0.2 * scale * rng.normal();
    out.xi.normalize();
  } else {
    const double T = c.domain.horizon();
    out.t = std::clamp(s.t + 0.05 * scale * T * rng.normal(), 2.0 * c.ht, T - 2.0 * c.ht);
    out.u = s.u + 0.05 * scale * rng.normal();
    out.u -= std::floor(out.u);
    out.a = std::clamp(s.a + 0.1 * scale * rng.normal(), -1.0, 0.5);
  }
  const double r = s.p.norm();
  out.p *= std::exp(0.3 * scale * rng.normal());
  for (int i = 0; i < n; ++i) out.p(i) += 0.2 * scale * r * rng.normal();
  const auto [lo, hi] = p_range(c, family, s.eps);
  const double rn = out.p.norm();
  if (rn > hi) out.p *= hi / rn;
  if (rn < lo) out.p = lo * (rn > 0.0 ? Vec(out.p / rn) : Vec(s.p / r));
  return out;
}

double ratio_named(const Ratios& rs, const std::string& name) {
  for (const auto& [n, v] : rs)
    if (n == name) return v;
  return -std::numeric_limits<double>::infinity();
}

/// Local ascent from the largest calibration samples of every bound, so the
/// certified constants track the supremum rather than a random maximum.
void refine(const Context& c, RngStream& rng, std::size_t iterations) {
  for (const auto& [name, family, start] : c.tally.seeds()) {
    Point best = start;
    double best_v = ratio_named(ratios_of(c, family, best), name);
    double scale = 1.0;
    for (std::size_t it = 0; it < iterations; ++it) {
      const Point trial = perturb(c, family, best, scale, rng);
      const Ratios rs = ratios_of(c, family, trial);
      c.tally.record(rs, trial, family);
      const double v = ratio_named(rs, name);
      if (v > best_v) {
        best = trial;
        best_v = v;
      } else {
        scale = std::max(0.97 * scale, 1e-4);
      }
    }
  }
}

void check_g(const Context& c, RngStream& rng, std::size_t count) {
  const int n = c.domain.dimension();
  const double theta = c.params.theta;
  for (std::size_t i = 0; i < count; ++i) {
    Point s;
    s.xi = unit_vector(rng, n);
    s.p = sample_p(rng, s.xi, c.sampler.p_min, c.sampler.p_max);
    const Vec& xi = s.xi;
    const Vec& p = s.p;
    const double r = p.norm();
    Tally& t = c.tally;
    t.record(g_ratios(c, s), s, Family::g);
    if (t.calibrating) continue;

    const GJet<double> g = eval_g(c.params, xi, p);
    const double u = p.dot(xi) / r;
    const double dpx = g.grad_p.dot(xi);
    const double scale = g.grad_p.norm();
    t.margin("g_zero_at_origin", std::abs(eval_g(c.params, xi, Vec(Vec::Zero(n))).value));
    t.margin("g_lower_quadratic", rel(c.chi * r * r - g.value, g.value));
    if (u >= -theta) t.margin("g_dp_xi_nonneg", rel(-dpx, scale));
    if (u <= theta) t.margin("g_dp_xi_nonpos", rel(dpx, scale));
    if (std::abs(u) <= theta) t.margin("g_band_identity", rel(std::abs(dpx), scale));

    const double hp = 1e-4 * c.params.blend_width * r;
    const double hxi = 1e-4 * c.params.blend_width;
    Vec fd_xi(n), fd_p(n);
    Mat fd_xixi(n, n), fd_xip(n, n), fd_pp(n, n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e(k) = 1.0;
      const GJet<double> xp = eval_g(c.params, Vec(xi + hxi * e), p, false);
      const GJet<double> xm = eval_g(c.params, Vec(xi - hxi * e), p, false);
      const GJet<double> pp = eval_g(c.params, xi, Vec(p + hp * e), false);
      const GJet<double> pm = eval_g(c.params, xi, Vec(p - hp * e), false);
      fd_xi(k) = (xp.value - xm.value) / (2 * hxi);
      fd_p(k) = (pp.value - pm.value) / (2 * hp);
      fd_xixi.col(k) = (xp.grad_xi - xm.grad_xi) / (2 * hxi);
      fd_xip.col(k) = (pp.grad_xi - pm.grad_xi) / (2 * hp);
      fd_pp.col(k) = (pp.grad_p - pm.grad_p) / (2 * hp);
    }
    t.margin("fd_g_gradients", std::max(fd_error(fd_xi, g.grad_xi, t.calibrated("g_dxi_bound") * r * r),
                                        fd_error(fd_p, g.grad_p, t.calibrated("g_dp_bound") * r)));
    t.margin("fd_g_hessians", std::max({fd_error(fd_xixi, g.hess_xixi, t.calibrated("g_dxixi_bound") * r * r),
                                        fd_error(fd_xip, g.hess_xip, t.calibrated("g_dxip_bound") * r),
                                        fd_error(fd_pp, g.hess_pp, t.calibrated("g_dpp_bound"))}));
  }
}

void check_h(const Context& c, RngStream& rng, std::size_t count) {
  const int n = c.domain.dimension();
  const double theta = c.params.theta;
  for (std::size_t i = 0; i < count; ++i) {
    Point s = sample_point(rng, c);
    const double t = s.t;
    Vec x, gx;
    try {
      x = place(c.domain, s);
      gx = gamma(c.field, c.domain, t, x);
    } catch (const RegionError&) {
      continue;
    }
    s.p = sample_p(rng, gx, c.sampler.p_min, c.sampler.p_max);
    const Vec& p = s.p;
    const double r = p.norm();
    Tally& tl = c.tally;
    tl.record(h_ratios(c, s), s, Family::h);
    if (tl.calibrating) continue;

    const HJet h = eval_h(c.params, c.field, c.domain, t, x, p);
    const double dpg = h.grad_p.dot(gx);
    const double scale = h.grad_p.norm();
    tl.margin("h_one_at_origin", std::abs(eval_h(c.params, c.field, c.domain, t, x, Vec(Vec::Zero(n))).value - 1.0));
    tl.margin("h_lower_quadratic", rel(c.chi * r * r - h.value, h.value));
    if (p.dot(gx) >= -theta * r) tl.margin("h_dp_gamma_nonneg", rel(-dpg, scale));
    if (p.dot(gx) <= theta * r) tl.margin("h_dp_gamma_nonpos", rel(dpg, scale));

    const double hp = 1e-4 * c.params.blend_width * std::max(r, 1e-2);
    Vec fd_x(n), fd_p(n);
    Mat fd_xx(n, n), fd_xp(n, n), fd_pp(n, n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e(k) = 1.0;
      const HJet xp = eval_h(c.params, c.field, c.domain, t, Vec(x + c.hx * e), p);
      const HJet xm = eval_h(c.params, c.field, c.domain, t, Vec(x - c.hx * e), p);
      const HJet pp = eval_h(c.params, c.field, c.domain, t, x, Vec(p + hp * e));
      const HJet pm = eval_h(c.params, c.field, c.domain, t, x, Vec(p - hp * e));
      fd_x(k) = (xp.value - xm.value) / (2 * c.hx);
      fd_p(k) = (pp.value - pm.value) / (2 * hp);
      fd_xx.col(k) = (xp.grad_x - xm.grad_x) / (2 * c.hx);
      fd_xp.row(k) = (xp.grad_p - xm.grad_p).transpose() / (2 * c.hx);
      fd_pp.col(k) = (pp.grad_p - pm.grad_p) / (2 * hp);
    }
    const double fd_t = (eval_h(c.params, c.field, c.domain, t + c.ht, x, p).value -
                         eval_h(c.params, c.field, c.domain, t - c.ht, x, p).value) /
                        (2 * c.ht);
    const double r2 = r * r;
    tl.margin("fd_h_gradients", std::max({fd_error(vec1(fd_t), vec1(h.dt), tl.calibrated("h_dt_bound") * r2),
                                          fd_error(fd_x, h.grad_x, tl.calibrated("h_dx_bound") * r2),
                                          fd_error(fd_p, h.grad_p, tl.calibrated("h_dp_bound") * r)}));
    tl.margin("fd_h_hessians", std::max({fd_error(fd_xx, h.hess_xx, tl.calibrated("h_dxx_bound") * r2),
                                         fd_error(fd_xp, h.hess_xp, tl.calibrated("h_dxp_bound") * r),
                                         fd_error(fd_pp, h.hess_pp, tl.calibrated("h_dpp_bound"))}));
  }
}

void check_w(const Context& c, RngStream& rng, std::size_t count) {
  const int n = c.domain.dimension();
  const double theta = c.params.theta;
  for (std::size_t i = 0; i < count; ++i) {
    Point s = sample_point(rng, c);
    s.eps = c.sampler.eps[i % c.sampler.eps.size()];
    const double t = s.t, eps = s.eps;
    Vec x, y, gx;
    try {
      x = place(c.domain, s);
      gx = gamma(c.field, c.domain, t, x);
      const auto [lo, hi] = p_range(c, Family::w, eps);
      s.p = sample_p(rng, gx, lo, hi);
      y = x - eps * s.p;
      gamma(c.field, c.domain, t, y);
    } catch (const RegionError&) {
      continue;
    }
    Tally& tl = c.tally;
    tl.record(w_ratios(c, s), s, Family::w);
    if (tl.calibrating) continue;

    const double dist = (x - y).norm();
    const double q2 = dist * dist / eps;
    const WJet w = eval_w_eps(c.params, c.field, c.domain, t, x, y, eps);
    tl.margin("w_lower_quadratic", rel(c.chi * q2 - w.value, w.value));
    if ((x - y).dot(gx) >= -theta * dist) tl.margin("w_dy_gamma_x_nonpos", rel(w.grad_y.dot(gx), w.grad_y.norm()));

    const double hw = c.hx * std::min(1.0, eps);
    Vec fd_x(n), fd_y(n);
    PairMat fd_hess(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e(k) = 1.0;
      const WJet xp = eval_w_eps(c.params, c.field, c.domain, t, Vec(x + hw * e), y, eps);
      const WJet xm = eval_w_eps(c.params, c.field, c.domain, t, Vec(x - hw * e), y, eps);
      const WJet yp = eval_w_eps(c.params, c.field, c.domain, t, x, Vec(y + hw * e), eps);
      const WJet ym = eval_w_eps(c.params, c.field, c.domain, t, x, Vec(y - hw * e), eps);
      fd_x(k) = (xp.value - xm.value) / (2 * hw);
      fd_y(k) = (yp.value - ym.value) / (2 * hw);
      fd_hess.col(k) << (xp.grad_x - xm.grad_x) / (2 * hw), (xp.grad_y - xm.grad_y) / (2 * hw);
      fd_hess.col(n + k) << (yp.grad_x - ym.grad_x) / (2 * hw), (yp.grad_y - ym.grad_y) / (2 * hw);
    }
    const double fd_t = (eval_w_eps(c.params, c.field, c.domain, t + c.ht, x, y, eps).value -
                         eval_w_eps(c.params, c.field, c.domain, t - c.ht, x, y, eps).value) /
                        (2 * c.ht);
    const double dy_nat = tl.calibrated("w_dy_bound") * dist / eps;
    tl.margin("fd_w_gradients", std::max({fd_error(vec1(fd_t), vec1(w.dt), tl.calibrated("w_dt_bound") * q2),
                                          fd_error(fd_x, w.grad_x, dy_nat + tl.calibrated("w_dx_plus_dy_bound") * q2),
                                          fd_error(fd_y, w.grad_y, dy_nat)}));
    tl.margin("fd_w_hessian", fd_error(fd_hess, w.hess, tl.calibrated("w_hessian_bound") * (2.0 / eps + q2)));
  }
}

void check_alpha(const Context& c, const AlphaSpec& alpha, RngStream& rng, std::size_t count) {
  const int n = c.domain.dimension();
  Tally& tl = c.tally;
  if (tl.calibrating) return;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = sample_t(rng, c);
    // Boundary: the directional derivative along gamma.
    const Vec b = boundary_point(c.domain, t, rng.uniform());
    try {
      const Vec g = gamma(c.field, c.domain, t, b);
      tl.margin("alpha_gamma_derivative", 1.0 - eval_alpha(alpha, t, b).grad.dot(g));
    } catch (const RegionError&) {
    }
    // Closure: nonnegativity, compact support in the boundary band.
    const Vec x = interior_point(c.domain, t, rng.uniform(), rng.uniform());
    const AlphaJet a = eval_alpha(alpha, t, x);
    tl.margin("alpha_nonneg", -a.value);
    if (-signed_distance(c.domain, t, x) > alpha.width) tl.margin("alpha_support", std::abs(a.value));
    // Derivatives on the band.
    const Vec z = interior_point(c.domain, t, rng.uniform(), 0.5 * rng.uniform());
    const AlphaJet az = eval_alpha(alpha, t, z);
    Vec fd_x(n);
    Mat fd_xx(n, n);
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e(k) = 1.0;
      const AlphaJet ap = eval_alpha(alpha, t, Vec(z + c.hx * e));
      const AlphaJet am = eval_alpha(alpha, t, Vec(z - c.hx * e));
      fd_x(k) = (ap.value - am.value) / (2 * c.hx);
      fd_xx.col(k) = (ap.grad - am.grad) / (2 * c.hx);
    }
    const double fd_t = (eval_alpha(alpha, t + c.ht, z).value - eval_alpha(alpha, t - c.ht, z).value) / (2 * c.ht);
    const double nat = alpha.gain;
    tl.margin("fd_alpha", std::max({fd_error(vec1(fd_t), vec1(az.dt), nat), fd_error(fd_x, az.grad, nat),
                                    fd_error(fd_xx, az.hess, nat / alpha.width)}));
  }
}

double field_width(const ReflectionField& field) {
  return std::visit(overloaded{[](const ConstantOblique&) { return std::numeric_limits<double>::infinity(); },
                               [](const InwardNormalSmoothed& f) { return f.width; },
                               [](const RotatedNormal& f) { return f.width; }},
                    field.kind());
}

}  // namespace

PropertyReport verify_test_properties(TestFunctionParams& params, const ReflectionField& field,
                                      const DomainSpec& domain, const TestSampler& sampler) {
  validate(params);
  if (sampler.eps.empty()) throw ParameterError("verify_test_properties: eps list is empty");
  Tally tally;
  const double length = std::min(domain.min_width(), field_width(field));
  Context c{params, field, domain, sampler, g_lower_constant(params), 1e-4 * length, 1e-5 * domain.horizon(), tally};
  AlphaSpec alpha{domain, 0.25 * domain.min_width(), 1.0};
  try {
    alpha = make_alpha(domain, field);
  } catch (const PreconditionError&) {
    // No gain works; the boundary row reports where gamma fails to point inward.
  }
  const std::size_t n = sampler.points;

  for (int phase = 0; phase < 2; ++phase) {
    tally.calibrating = phase == 0;
    RngStream rng(sampler.seed, phase == 0 ? 101 : 202);
    check_g(c, rng, n);
    check_h(c, rng, n);
    check_w(c, rng, n);
    check_alpha(c, alpha, rng, n);
    if (phase == 0) refine(c, rng, 150);
  }

  PropertyReport report;
  report.name = "verify-testfn";
  double c_max = 0.0;
  tally.emit(report, sampler.safety, sampler.margin, sampler.fd_tolerance, c_max);
  params.chi = c.chi;
  params.C = c_max;
  report.add("certified_constants", 0, 0.0, 0.0,
             {{"chi", params.chi}, {"C", params.C}, {"alpha_width", alpha.width}, {"alpha_gain", alpha.gain}});
  return report;
}

}  // namespace oblique
