#include "oblique/pde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "oblique/errors.hpp"
#include "oblique/path.hpp"

namespace oblique {

namespace {

constexpr double kMinLambda = 1e-12;

const MovingInterval& interval_of(const DomainSpec& domain) {
  const auto* s = std::get_if<MovingInterval>(&domain.shape());
  if (!s) throw UnsupportedError("pde: only moving intervals are supported");
  return *s;
}

std::vector<LinearDiffusion> terms_of(const PdeOperator& op) {
  std::vector<LinearDiffusion> out;
  if (const auto* l = std::get_if<LinearDiffusion>(&op))
    out.push_back(*l);
  else
    out = std::get<MaxOfLinear>(op).terms;
  if (out.empty()) throw ParameterError("pde: MaxOfLinear needs at least one term");
  for (auto& term : out) {
    if (!term.diffusivity || !term.drift) throw ParameterError("pde: operator coefficient missing");
    if (!(term.lambda >= 0.0)) throw ParameterError("pde: lambda must be nonnegative");
    term.lambda = std::max(term.lambda, kMinLambda);
  }
  return out;
}

struct Frame {
  double a, b, da, db, L, dL;
};

Frame frame_at(const MovingInterval& s, double t) {
  Frame f;
  f.a = s.lower.value(t);
  f.b = s.upper.value(t);
  f.da = s.lower.derivative(t);
  f.db = s.upper.derivative(t);
  f.L = f.b - f.a;
  f.dL = f.db - f.da;
  return f;
}

double end_direction(const PdeProblem& p, double t, double x) { return gamma(p.field, p.domain, t, vec1(x))(0); }

// One explicit level of the scheme on a fixed grid.
class Stepper {
 public:
  Stepper(const PdeProblem& p, std::size_t intervals)
      : p_(p), shape_(interval_of(p.domain)), terms_(terms_of(p.op)), M_(intervals), h_(1.0 / static_cast<double>(intervals)) {
    if (intervals < 3) throw ParameterError("pde: need at least three intervals");
  }

  std::size_t nodes() const { return M_ + 1; }
  double xi(std::size_t i) const { return i == M_ ? 1.0 : static_cast<double>(i) * h_; }

  double rate(double t) const {
    const Frame f = frame_at(shape_, t);
    double worst = 0.0;
    for (std::size_t i = 0; i <= M_; ++i) {
      const double x = f.a + xi(i) * f.L;
      for (const auto& term : terms_) {
        const double D = term.diffusivity(t, x) / (f.L * f.L * h_ * h_);
        const double c = (term.drift(t, x) + f.da + xi(i) * f.dL) / f.L;
        worst = std::max(worst, 2.0 * D + std::abs(c) / h_ + term.lambda);
      }
    }
    return worst;
  }

  void step(double t, double dt, const std::vector<double>& v, std::vector<double>& out, double lo, double hi) const {
    const Frame f = frame_at(shape_, t);
    if (!(f.L > 0.0)) throw ParameterError("pde: the interval collapsed");
    out.resize(v.size());
    for (std::size_t i = 1; i < M_; ++i) {
      const double x = f.a + xi(i) * f.L;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& term : terms_) {
        const double D = term.diffusivity(t, x) / (f.L * f.L * h_ * h_);
        const double c = (term.drift(t, x) + f.da + xi(i) * f.dL) / f.L;
        const double adv = c >= 0.0 ? c * (v[i + 1] - v[i]) / h_ : c * (v[i] - v[i - 1]) / h_;
        best = std::min(best, D * (v[i + 1] - 2.0 * v[i] + v[i - 1]) + adv - term.lambda * v[i]);
      }
      out[i] = v[i] + dt * best;
    }
    out[0] = boundary(t, dt, f, 0, v, lo, hi);
    out[M_] = boundary(t, dt, f, M_, v, lo, hi);
  }

 private:
  // Node `i` is 0 or M. The ghost value beyond it is
  // v_in - 2 h L s f(r) / g (g the signed outward direction, s the outward
  // xi step), from the centred form of g u_x + f = 0, so the
  // update is r = v + dt min_j (P_j + Q_j f(r)), solved by bisection.
  double boundary(double t, double dt, const Frame& f, std::size_t i, const std::vector<double>& v, double lo,
                  double hi) const {
    const bool lower = i == 0;
    const double x = lower ? f.a : f.b;
    const double g = end_direction(p_, t, x);
    if (lower ? !(g < 0.0) : !(g > 0.0)) throw ParameterError("pde: the boundary field does not point outward");
    const std::size_t in = lower ? 1 : M_ - 1;
    // Outward step in xi: -1 at the lower end, +1 at the upper.
    const double s = lower ? -1.0 : 1.0;
    std::vector<std::pair<double, double>> pq;
    pq.reserve(terms_.size());
    for (const auto& term : terms_) {
      const double D = term.diffusivity(t, x) / (f.L * f.L * h_ * h_);
      const double c = (term.drift(t, x) + f.da + xi(i) * f.dL) / f.L;
      const double ghost_f = -2.0 * h_ * f.L * s / g;
      double P = 2.0 * D * (v[in] - v[i]) - term.lambda * v[i];
      double Q = D * ghost_f;
      // Upwind toward the ghost when the advection points outward in xi.
      const bool uses_ghost = lower ? c < 0.0 : c > 0.0;
      P += std::abs(c) * (v[in] - v[i]) / h_;
      if (uses_ghost) Q += std::abs(c) * ghost_f / h_;
      pq.emplace_back(P, Q);
    }
    const auto G = [&](double r) {
      const double fr = p_.boundary(t, x, r);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [P, Q] : pq) best = std::min(best, P + Q * fr);
      return r - v[i] - dt * best;
    };
    double a = lo, b = hi;
    const double ga = G(a), gb = G(b);
    if (!(ga <= 0.0) || !(gb >= 0.0)) {
      std::ostringstream msg;
      msg << "pde: boundary bracket [" << lo << ", " << hi << "] does not contain the root at t = " << t;
      throw BoundarySolveError(msg.str());
    }
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      const double gm = G(mid);
      if (gm == 0.0) return mid;
      (gm > 0.0 ? b : a) = mid;
    }
    return 0.5 * (a + b);
  }

  const PdeProblem& p_;
  const MovingInterval& shape_;
  std::vector<LinearDiffusion> terms_;
  std::size_t M_;
  double h_;
};

struct TimeGrid {
  double dt;
  std::size_t steps;
};

TimeGrid time_grid(const PdeProblem& p, const PdeGrid& grid, const Stepper& st) {
  const double T = p.domain.horizon();
  double dt = grid.dt;
  if (dt <= 0.0) {
    if (!(grid.cfl_fraction > 0.0)) throw ParameterError("pde: cfl_fraction must be positive");
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) worst = std::max(worst, st.rate(T * k / 200.0));
    dt = grid.cfl_fraction / worst;
  }
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  return {T / static_cast<double>(std::max<std::size_t>(steps, 1)), std::max<std::size_t>(steps, 1)};
}

std::pair<double, double> bracket(const std::vector<double>& v) {
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double range = *mx - *mn + 1.0;
  return {*mn - range, *mx + range};
}

void refuse(double ratio, double dt, double t) {
  std::ostringstream msg;
  msg << "pde: dt = " << dt << " breaks the monotonicity bound at t = " << t << " (ratio " << ratio
      << "); use dt <= " << 0.9 * dt / ratio;
  throw CflError(msg.str());
}

}  // namespace

LinearDiffusion LinearDiffusion::constant(double a, double mu, double lambda) {
  return {[a](double, double) { return a; }, [mu](double, double) { return mu; }, lambda};
}

BoundaryDatum neumann() {
  return [](double, double, double) { return 0.0; };
}

BoundaryDatum polynomial_boundary(double offset, double slope, double cubic) {
  if (slope < 0.0 || cubic < 0.0) throw ParameterError("pde: boundary datum must be nondecreasing in r");
  return [=](double, double, double r) { return offset + slope * r + cubic * r * r * r; };
}

void validate(const PdeProblem& problem) {
  const MovingInterval& s = interval_of(problem.domain);
  const std::vector<LinearDiffusion> terms = terms_of(problem.op);
  if (!problem.initial) throw ParameterError("pde: initial datum missing");
  if (!problem.boundary) throw ParameterError("pde: boundary datum missing");
  const double T = problem.domain.horizon();
  for (int k = 0; k <= 20; ++k) {
    const double t = T * k / 20.0;
    const double a = s.lower.value(t), b = s.upper.value(t);
    for (int j = 0; j <= 20; ++j) {
      const double x = a + (b - a) * j / 20.0;
      for (const auto& term : terms)
        if (!(term.diffusivity(t, x) >= 0.0)) throw ParameterError("pde: negative diffusivity at a sampled point");
    }
    for (double x : {a, b}) {
      double prev = problem.boundary(t, x, -10.0);
      for (int j = 1; j <= 40; ++j) {
        const double cur = problem.boundary(t, x, -10.0 + 0.5 * j);
        if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev))) throw ParameterError("pde: boundary datum decreases in r");
        prev = cur;
      }
    }
    if (!(gamma(problem.field, problem.domain, t, vec1(a))(0) < 0.0) ||
        !(gamma(problem.field, problem.domain, t, vec1(b))(0) > 0.0))
      throw ParameterError("pde: the boundary field does not point outward");
  }
}

double cfl_bound(const PdeProblem& problem, std::size_t intervals, double t) {
  const Stepper st(problem, intervals);
  return 1.0 / st.rate(t);
}

double PdeSolution::final_value(double xq) const {
  const Eigen::Index last = u.rows() - 1;
  const Eigen::Index n = u.cols();
  if (xq <= x(last, 0)) return u(last, 0);
  if (xq >= x(last, n - 1)) return u(last, n - 1);
  Eigen::Index k = 0;
  while (k + 2 < n && x(last, k + 1) <= xq) ++k;
  const double w = (xq - x(last, k)) / (x(last, k + 1) - x(last, k));
  return (1.0 - w) * u(last, k) + w * u(last, k + 1);
}

PdeSolution solve_oblique_parabolic(const PdeProblem& problem, const PdeGrid& grid) {
  validate(problem);
  const Stepper st(problem, grid.intervals);
  const MovingInterval& shape = interval_of(problem.domain);
  const TimeGrid tg = time_grid(problem, grid, st);
  const std::size_t n = st.nodes();
  const std::size_t stride = std::max<std::size_t>(1, (tg.steps + grid.saved_levels - 2) / std::max<std::size_t>(1, grid.saved_levels - 1));

  PdeSolution sol;
  sol.dt = tg.dt;
  sol.steps = tg.steps;
  sol.xi.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) sol.xi(static_cast<Eigen::Index>(i)) = st.xi(i);

  std::vector<std::vector<double>> levels_u, levels_x;
  const auto save = [&](double t, const std::vector<double>& v) {
    const Frame f = frame_at(shape, t);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = f.a + st.xi(i) * f.L;
    sol.times.push_back(t);
    levels_u.push_back(v);
    levels_x.push_back(std::move(xs));
  };

  std::vector<double> v(n), next;
  {
    const Frame f = frame_at(shape, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i] = problem.initial(f.a + st.xi(i) * f.L);
  }
  const auto [lo, hi] = bracket(v);
  save(0.0, v);
  const double T = problem.domain.horizon();
  for (std::size_t k = 0; k < tg.steps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(tg.steps);
    const double ratio = tg.dt * st.rate(t);
    sol.max_cfl_ratio = std::max(sol.max_cfl_ratio, ratio);
    if (ratio > 1.0 && !grid.allow_cfl_violation) refuse(ratio, tg.dt, t);
    st.step(t, tg.dt, v, next, lo, hi);
    v.swap(next);
    if ((k + 1) % stride == 0 || k + 1 == tg.steps) save(k + 1 == tg.steps ? T : T * static_cast<double>(k + 1) / static_cast<double>(tg.steps), v);
  }
  sol.u.resize(static_cast<Eigen::Index>(levels_u.size()), static_cast<Eigen::Index>(n));
  sol.x.resize(sol.u.rows(), sol.u.cols());
  for (std::size_t r = 0; r < levels_u.size(); ++r)
    for (std::size_t i = 0; i < n; ++i) {
      sol.u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = levels_u[r][i];
      sol.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = levels_x[r][i];
    }
  return sol;
}

double boundary_residual(const PdeProblem& problem, const PdeSolution& sol) {
  const Eigen::Index last = sol.u.rows() - 1, M = sol.u.cols() - 1;
  const double T = sol.times.back();
  const double a = sol.x(last, 0), b = sol.x(last, M);
  const double h = (b - a) / static_cast<double>(M);
  const auto u = [&](Eigen::Index i) { return sol.u(last, i); };
  const double ux_a = (-11.0 * u(0) + 18.0 * u(1) - 9.0 * u(2) + 2.0 * u(3)) / (6.0 * h);
  const double ux_b = (11.0 * u(M) - 18.0 * u(M - 1) + 9.0 * u(M - 2) - 2.0 * u(M - 3)) / (6.0 * h);
  const double ra = end_direction(problem, T, a) * ux_a + problem.boundary(T, a, u(0));
  const double rb = end_direction(problem, T, b) * ux_b + problem.boundary(T, b, u(M));
  return std::max(std::abs(ra), std::abs(rb));
}

PropertyReport check_comparison(const PdeProblem& problem, const PdeGrid& grid, const std::function<double(double)>& u0,
                                const std::function<double(double)>& v0, double tolerance) {
  PdeProblem pu = problem, pv = problem;
  pu.initial = u0;
  pv.initial = v0;
  validate(pu);
  const Stepper su(pu, grid.intervals), sv(pv, grid.intervals);
  const MovingInterval& shape = interval_of(problem.domain);
  const TimeGrid tg = time_grid(pu, grid, su);
  const std::size_t n = su.nodes();
  std::vector<double> u(n), v(n), nu, nv;
  const Frame f0 = frame_at(shape, 0.0);
  double initial = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f0.a + su.xi(i) * f0.L;
    u[i] = u0(x);
    v[i] = v0(x);
    initial = std::max(initial, u[i] - v[i]);
  }
  // One bracket for both runs so the boundary solves see the same interval.
  std::vector<double> both(u);
  both.insert(both.end(), v.begin(), v.end());
  const auto [lo, hi] = bracket(both);
  const double T = problem.domain.horizon();
  double worst = initial, ratio_max = 0.0;
  std::string failure;
  for (std::size_t k = 0; k < tg.steps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(tg.steps);
    const double ratio = tg.dt * su.rate(t);
    ratio_max = std::max(ratio_max, ratio);
    if (ratio > 1.0 && !grid.allow_cfl_violation) refuse(ratio, tg.dt, t);
    try {
      su.step(t, tg.dt, u, nu, lo, hi);
      sv.step(t, tg.dt, v, nv, lo, hi);
    } catch (const BoundarySolveError& e) {
      failure = e.what();
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    u.swap(nu);
    v.swap(nv);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, u[i] - v[i]);
    if (!std::isfinite(worst)) break;
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) margin = std::min(margin, v[i] - u[i]);
  PropertyReport rep{"comparison", {}};
  rep.add("initial_order", n, initial, 0.0, {}, "max (u0 - v0)^+ at the nodes");
  rep.add("cfl", tg.steps, ratio_max - 1.0, 0.0, {{"max_ratio", ratio_max}, {"dt", tg.dt}},
          "dt against the monotonicity bound at every level");
  rep.add("comparison", tg.steps * n, std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity(), tolerance,
          {{"min_margin", margin}}, failure.empty() ? "max (u - v)^+ over all nodes and levels" : failure);
  return rep;
}

FeynmanKacResult feynman_kac_crosscheck(const DomainSpec& domain, double sigma, const Payoff& g, const PdeGrid& grid,
                                        const SdeConfig& mc) {
  interval_of(domain);
  if (!(sigma > 0.0)) throw ParameterError("feynman-kac: sigma must be positive");
  PdeProblem p{domain, LinearDiffusion::constant(0.5 * sigma * sigma), neumann(),
               ReflectionField::inward_normal().outward(), [&g](double x) { return eval_payoff(g, vec1(x)); }};
  const PdeSolution sol = solve_oblique_parabolic(p, grid);
  SdeConfig cfg = mc;
  Mat S(1, 1);
  S(0, 0) = sigma;
  cfg.drift = ConstantDrift{vec1(0.0)};
  cfg.diffusion = ConstantDiffusion{S};
  cfg.noise_dim = 1;
  cfg.lipschitz = 0.0;
  const McEstimate est = mc_expectation(cfg, domain.time_reversed(), ReflectionField::inward_normal(), g);
  FeynmanKacResult out;
  out.u_pde = sol.final_value(mc.x0(0));
  out.u_mc = est.mean;
  out.gap = std::abs(out.u_pde - out.u_mc);
  out.stderr_ = est.stderr_;
  out.paths = est.paths;
  out.failed = est.failed;
  return out;
}

void write_solution_csv(std::ostream& out, const PdeSolution& sol) {
  out << "t,xi,x,u\n";
  for (Eigen::Index r = 0; r < sol.u.rows(); ++r)
    for (Eigen::Index i = 0; i < sol.u.cols(); ++i)
      out << format_double(sol.times[static_cast<std::size_t>(r)]) << ',' << format_double(sol.xi(i)) << ','
          << format_double(sol.x(r, i)) << ',' << format_double(sol.u(r, i)) << '\n';
}

}  // namespace oblique
