#include "oblique/rsde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "oblique/errors.hpp"
#include "oblique/random.hpp"

namespace oblique {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kDeg = 180.0 / M_PI;

double angle_deg(const Vec& a, const Vec& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * kDeg;
}

std::vector<double> grid(double horizon, std::size_t steps) {
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    t[k] = k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps);
  return t;
}

unsigned worker_count(const SdeConfig& cfg, std::size_t jobs) {
  unsigned w = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(w, jobs)));
}

// Runs job(i) for i in [0, jobs) on strided workers; rethrows the first error.
template <class Job>
void parallel_for(unsigned workers, std::size_t jobs, const Job& job) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < jobs; i += workers) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// x_{k+1} = correct(x_k + b(t_k, x_k) dt + sigma(t_k, x_k) dW_k) along a
// grid, with the drift and diffusion evaluated on `along` (the previous
// iterate) or on the new path itself when `along` is null.
struct Walk {
  std::vector<Vec> x;
  std::vector<Vec> lambda;
  std::vector<double> tv;
  double max_violation = 0.0;
  double max_angle = 0.0;
  bool failed = false;
};

Walk walk(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field, const std::vector<double>& t,
          const Vec& x0, const std::vector<double>& noise, const std::vector<Vec>* along) {
  const std::size_t N = t.size() - 1;
  const int m = cfg.noise_dim;
  Walk w;
  w.x.resize(N + 1);
  w.lambda.resize(N + 1);
  w.tv.assign(N + 1, 0.0);
  w.x[0] = x0;
  w.lambda[0] = Vec::Zero(x0.size());
  w.max_violation = distance(domain, 0.0, x0);
  Vec dW(m);
  for (std::size_t k = 0; k < N; ++k) {
    const double dt = t[k + 1] - t[k];
    const Vec& at = along ? (*along)[k] : w.x[k];
    for (int j = 0; j < m; ++j) dW(j) = noise[k * m + j];
    const Vec y = w.x[k] + eval_drift(cfg.drift, t[k], at) * dt + eval_diffusion(cfg.diffusion, t[k], at) * dW;
    Vec next;
    bool ok = false;
    try {
      ok = correct_step(domain, field, t[k + 1], y, cfg.micro_ratio, next);
    } catch (const RegionError&) {
      ok = false;
    }
    if (!ok) {
      w.failed = true;
      return w;
    }
    const Vec dL = next - y;
    w.x[k + 1] = next;
    w.lambda[k + 1] = w.lambda[k] + dL;
    w.tv[k + 1] = w.tv[k] + dL.norm();
    w.max_violation = std::max(w.max_violation, distance(domain, t[k + 1], next));
    if (dL.norm() > 0.0) w.max_angle = std::max(w.max_angle, angle_deg(dL, gamma(field, domain, t[k + 1], next)));
  }
  return w;
}

double sup_gap(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, (a[k] - b[k]).norm());
  return out;
}

}  // namespace

Vec eval_drift(const DriftSpec& spec, double, const Vec& x) {
  return std::visit(overloaded{
                        [&](const ConstantDrift& d) -> Vec { return d.b; },
                        [&](const AffineDrift& d) -> Vec { return d.b0 + d.B * x; },
                        [&](const TableDrift& d) -> Vec {
                          Vec out = Vec::Zero(x.size());
                          for (std::size_t k = 0; k < d.amplitude.size(); ++k)
                            out += d.amplitude[k] * std::sin(d.wave[k].dot(x) + d.phase[k]);
                          return out;
                        },
                    },
                    spec);
}

Mat eval_diffusion(const DiffusionSpec& spec, double, const Vec& x) {
  return std::visit(overloaded{
                        [&](const ConstantDiffusion& d) -> Mat { return d.S; },
                        [&](const AffineDiffusion& d) -> Mat {
                          Mat out = d.S0;
                          for (std::size_t i = 0; i < d.Sx.size(); ++i) out += x(static_cast<Eigen::Index>(i)) * d.Sx[i];
                          return out;
                        },
                        [&](const TableDiffusion& d) -> Mat { return d.S0 + d.S1 * std::sin(d.wave.dot(x) + d.phase); },
                    },
                    spec);
}

namespace {

void check_shapes(const SdeConfig& cfg, int n) {
  const int m = cfg.noise_dim;
  if (m < 1 || m > kMaxDim) throw ParameterError("sde: noise dimension must be between 1 and 3");
  if (cfg.x0.size() != n) throw ParameterError("sde: x0 has the wrong dimension");
  if (cfg.steps == 0 || cfg.paths == 0) throw ParameterError("sde: steps and paths must be positive");
  if (!(cfg.micro_ratio > 0.0)) throw ParameterError("sde: micro_ratio must be positive");
  if (!(cfg.lipschitz >= 0.0) || !std::isfinite(cfg.lipschitz)) throw ParameterError("sde: bad Lipschitz constant");
  const Vec probe = Vec::Zero(n);
  if (eval_drift(cfg.drift, 0.0, probe).size() != n) throw ParameterError("sde: drift has the wrong dimension");
  const Mat s = eval_diffusion(cfg.diffusion, 0.0, probe);
  if (s.rows() != n || s.cols() != m) throw ParameterError("sde: diffusion must be n x m");
  std::visit(overloaded{
                 [&](const ConstantDrift&) {},
                 [&](const AffineDrift& d) {
                   if (d.B.rows() != n || d.B.cols() != n) throw ParameterError("sde: affine drift matrix must be n x n");
                 },
                 [&](const TableDrift& d) {
                   if (d.wave.size() != d.amplitude.size() || d.phase.size() != d.amplitude.size())
                     throw ParameterError("sde: table drift columns differ in length");
                   for (std::size_t k = 0; k < d.amplitude.size(); ++k)
                     if (d.amplitude[k].size() != n || d.wave[k].size() != n)
                       throw ParameterError("sde: table drift entry has the wrong dimension");
                 },
             },
             cfg.drift);
  std::visit(overloaded{
                 [&](const ConstantDiffusion&) {},
                 [&](const AffineDiffusion& d) {
                   if (static_cast<int>(d.Sx.size()) > n) throw ParameterError("sde: too many affine diffusion terms");
                   for (const Mat& S : d.Sx)
                     if (S.rows() != n || S.cols() != m) throw ParameterError("sde: diffusion must be n x m");
                 },
                 [&](const TableDiffusion& d) {
                   if (d.S1.rows() != n || d.S1.cols() != m || d.wave.size() != n)
                     throw ParameterError("sde: table diffusion has the wrong shape");
                 },
             },
             cfg.diffusion);
}

}  // namespace

PropertyRow check_lipschitz(const SdeConfig& cfg, const DomainSpec& domain, std::size_t samples) {
  const int n = domain.dimension();
  const double R = std::min(domain.bounding_radius(), 1e4);
  RngStream rng(cfg.seed, 0x11b5c4ULL);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = rng.uniform(0.0, domain.horizon());
    Vec x(n), dir(n);
    for (int i = 0; i < n; ++i) {
      x(i) = rng.uniform(-R, R);
      dir(i) = rng.normal();
    }
    const double scale = R * std::pow(10.0, -rng.uniform(0.0, 4.0));
    const Vec y = x + scale * dir / dir.norm();
    const double dx = (x - y).norm();
    if (!(dx > 0.0)) continue;
    const double rb = (eval_drift(cfg.drift, t, x) - eval_drift(cfg.drift, t, y)).norm() / dx;
    const double rs = (eval_diffusion(cfg.diffusion, t, x) - eval_diffusion(cfg.diffusion, t, y)).norm() / dx;
    worst = std::max({worst, rb, rs});
  }
  PropertyReport r;
  r.add("lipschitz", samples, worst, 1.05 * cfg.lipschitz, {{"declared_K", cfg.lipschitz}},
        "worst sampled difference ratio against 1.05 K");
  return r.rows.front();
}

void validate(const SdeConfig& cfg, const DomainSpec& domain) {
  check_shapes(cfg, domain.dimension());
  if (distance(domain, 0.0, cfg.x0) > 1e-12) throw InitialConditionError("sde: x0 is outside the closure of Omega_0");
  const PropertyRow row = check_lipschitz(cfg, domain);
  if (!row.passed) {
    std::ostringstream msg;
    msg << "sde: sampled Lipschitz ratio " << row.worst_violation << " exceeds 1.05 * " << cfg.lipschitz;
    throw ParameterError(msg.str());
  }
}

std::vector<double> noise_table(const SdeConfig& cfg, double horizon, std::size_t path) {
  const std::size_t total = cfg.steps * static_cast<std::size_t>(cfg.noise_dim);
  const double h = std::sqrt(horizon / static_cast<double>(cfg.steps));
  const CounterRng rng(cfg.seed, path);
  std::vector<double> out(total);
  for (std::size_t c = 0; c < total; ++c) out[c] = h * rng.normal(c);
  return out;
}

bool correct_step(const DomainSpec& domain, const ReflectionField& field, double t, const Vec& y, double ratio,
                  Vec& out) {
  const double d0 = distance(domain, t, y);
  if (d0 == 0.0) {
    out = y;
    return true;
  }
  const double cap = 10.0 * (domain.bounding_radius() + y.norm()) + 1.0;
  Vec g = gamma(field, domain, t, y);
  double mu = 0.0;
  for (int pass = 0; pass < 8; ++pass) {
    const auto F = [&](double m) { return m - ratio * distance(domain, t, y + m * g); };
    double lo = 0.0, hi = d0;
    while (F(hi) <= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap) return false;
    }
    // Illinois false position on the bracket.
    double flo = F(lo), fhi = F(hi);
    int side = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = std::clamp(hi - fhi * (hi - lo) / (fhi - flo), lo, hi);
      const double fm = F(mid);
      if (fm > 0.0) {
        hi = mid;
        fhi = fm;
        if (side == 1) flo *= 0.5;
        side = 1;
      } else if (fm < 0.0) {
        lo = mid;
        flo = fm;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        lo = hi = mid;
      }
      if (mid == lo && mid == hi) break;
    }
    mu = hi;
    const Vec g_new = gamma(field, domain, t, y + mu * g);
    const double change = (g_new - g).norm();
    g = g_new;
    if (change < 1e-14) break;
  }
  out = y + mu * g;
  return out.allFinite();
}

SampledPath discrete_skorohod_map(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field,
                                  double ratio) {
  if (distance(domain, psi.times.front(), psi.values.front()) > 1e-12)
    throw InitialConditionError("skorohod map: psi(0) is outside the closure of Omega_0");
  std::vector<Vec> phi(psi.size());
  phi[0] = psi.values[0];
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    const Vec y = phi[k] + (psi.values[k + 1] - psi.values[k]);
    if (!correct_step(domain, field, psi.times[k + 1], y, ratio, phi[k + 1]))
      throw StiffnessError("skorohod map: correction diverged at t = " + format_double(psi.times[k + 1]));
  }
  return SampledPath(psi.times, std::move(phi));
}

ReflectedTrajectory simulate_path(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                                  const Vec& x0, const std::vector<double>& noise) {
  if (noise.size() != cfg.steps * static_cast<std::size_t>(cfg.noise_dim))
    throw ParameterError("sde: noise table has the wrong length");
  const std::vector<double> t = grid(domain.horizon(), cfg.steps);
  Walk w = walk(cfg, domain, field, t, x0, noise, nullptr);
  if (w.failed) throw StiffnessError("sde: correction diverged");
  ReflectedTrajectory out{SampledPath(t, std::move(w.x)), SampledPath(t, std::move(w.lambda)), std::move(w.tv), noise,
                          w.max_violation, w.max_angle};
  return out;
}

Ensemble simulate_reflected(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                            const SimulationOptions& options) {
  validate(cfg, domain);
  const std::vector<double> t = grid(domain.horizon(), cfg.steps);
  Ensemble out;
  out.summaries.resize(cfg.paths);
  std::vector<ReflectedTrajectory> kept(options.keep_paths ? cfg.paths : 0);
  std::vector<std::uint8_t> kept_ok(options.keep_paths ? cfg.paths : 0, 0);
  parallel_for(worker_count(cfg, cfg.paths), cfg.paths, [&](std::size_t p) {
    std::vector<double> noise = noise_table(cfg, domain.horizon(), p);
    Walk w = walk(cfg, domain, field, t, cfg.x0, noise, nullptr);
    PathSummary& s = out.summaries[p];
    s.failed = w.failed;
    if (w.failed) return;
    s.X_T = w.x.back();
    s.tv_T = w.tv.back();
    s.max_violation = w.max_violation;
    s.max_angle_deg = w.max_angle;
    if (options.keep_paths) {
      kept[p] = ReflectedTrajectory{SampledPath(t, std::move(w.x)), SampledPath(t, std::move(w.lambda)),
                                    std::move(w.tv), options.keep_noise ? std::move(noise) : std::vector<double>{},
                                    w.max_violation, w.max_angle};
      kept_ok[p] = 1;
    }
  });
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    const PathSummary& s = out.summaries[p];
    if (s.failed) {
      ++out.failed;
      out.failures.push_back("path " + std::to_string(p) + ": correction diverged");
      continue;
    }
    out.max_violation = std::max(out.max_violation, s.max_violation);
    out.max_angle_deg = std::max(out.max_angle_deg, s.max_angle_deg);
    if (options.keep_paths && kept_ok[p]) out.paths.push_back(std::move(kept[p]));
  }
  return out;
}

PicardResult picard_solve(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                          const std::vector<double>& noise, std::size_t n_iter, double tol) {
  if (n_iter < 2) throw ParameterError("picard: need at least two iterations");
  check_shapes(cfg, domain.dimension());
  if (noise.size() != cfg.steps * static_cast<std::size_t>(cfg.noise_dim))
    throw ParameterError("picard: noise table has the wrong length");
  if (distance(domain, 0.0, cfg.x0) > 1e-12) throw InitialConditionError("picard: x0 is outside the closure of Omega_0");
  const std::vector<double> t = grid(domain.horizon(), cfg.steps);
  PicardResult out;
  std::vector<Vec> prev(t.size(), cfg.x0);
  out.iterates.emplace_back(t, prev);
  int rising = 0;
  for (std::size_t k = 0; k < n_iter; ++k) {
    Walk w = walk(cfg, domain, field, t, cfg.x0, noise, &prev);
    if (w.failed) throw StiffnessError("picard: correction diverged in iteration " + std::to_string(k + 1));
    const double gap = sup_gap(w.x, prev);
    out.sup_gaps.push_back(gap);
    out.iterates.emplace_back(t, w.x);
    prev = std::move(w.x);
    if (gap <= tol) {
      out.converged = true;
      break;
    }
    const std::size_t g = out.sup_gaps.size();
    rising = g >= 2 && out.sup_gaps[g - 1] >= out.sup_gaps[g - 2] ? rising + 1 : 0;
    if (rising >= 3) {
      std::ostringstream msg;
      msg << "picard: gaps did not decrease over three consecutive iterations (";
      for (std::size_t i = 0; i < g; ++i) msg << (i ? ", " : "") << out.sup_gaps[i];
      msg << "); shrink the horizon or the Lipschitz constant";
      throw ConvergenceError(msg.str());
    }
  }
  return out;
}

ContractionResult contraction_experiment(const SdeConfig& cfg, const Vec& x0, const Vec& x0_prime,
                                         const DomainSpec& domain, const ReflectionField& field) {
  check_shapes(cfg, domain.dimension());
  if (x0_prime.size() != x0.size()) throw ParameterError("contraction: starting points differ in dimension");
  if (distance(domain, 0.0, x0) > 1e-12 || distance(domain, 0.0, x0_prime) > 1e-12)
    throw InitialConditionError("contraction: starting point outside the closure of Omega_0");
  const std::vector<double> t = grid(domain.horizon(), cfg.steps);
  const std::size_t N = cfg.steps;
  std::vector<double> lhs(cfg.paths, 0.0);
  std::vector<std::vector<double>> running(cfg.paths);
  std::vector<std::uint8_t> failed(cfg.paths, 0);
  parallel_for(worker_count(cfg, cfg.paths), cfg.paths, [&](std::size_t p) {
    const std::vector<double> noise = noise_table(cfg, domain.horizon(), p);
    const std::vector<Vec> c0(t.size(), x0), c1(t.size(), x0_prime);
    const Walk X = walk(cfg, domain, field, t, x0, noise, &c0);
    const Walk Xp = walk(cfg, domain, field, t, x0_prime, noise, &c1);
    if (X.failed || Xp.failed) {
      failed[p] = 1;
      return;
    }
    const Walk Y = walk(cfg, domain, field, t, x0, noise, &X.x);
    const Walk Yp = walk(cfg, domain, field, t, x0_prime, noise, &Xp.x);
    if (Y.failed || Yp.failed) {
      failed[p] = 1;
      return;
    }
    lhs[p] = std::pow(sup_gap(Y.x, Yp.x), 2);
    std::vector<double>& r = running[p];
    r.resize(N + 1);
    double sup = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
      sup = std::max(sup, (X.x[k] - Xp.x[k]).squaredNorm());
      r[k] = sup;
    }
  });
  ContractionResult out;
  std::vector<double> mean_running(N + 1, 0.0);
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    if (failed[p]) continue;
    ++out.pairs;
    out.lhs += lhs[p];
    for (std::size_t k = 0; k <= N; ++k) mean_running[k] += running[p][k];
  }
  if (out.pairs == 0) throw EmptyEnsembleError("contraction: every coupled pair failed");
  out.lhs /= static_cast<double>(out.pairs);
  // Left Riemann sum, matching the Euler integrand.
  for (std::size_t k = 0; k < N; ++k) out.rhs_integral += mean_running[k] / static_cast<double>(out.pairs) * (t[k + 1] - t[k]);
  out.initial_gap_sq = (x0 - x0_prime).squaredNorm();
  const double denom = out.initial_gap_sq + out.rhs_integral;
  out.fitted_C = denom > 0.0 ? out.lhs / denom : 0.0;
  return out;
}

double eval_payoff(const Payoff& payoff, const Vec& x) {
  return std::visit(overloaded{
                        [&](const ConstantPayoff& p) { return p.value; },
                        [&](const CoordinatePayoff& p) { return x(p.index); },
                        [&](const CosinePayoff& p) { return p.amplitude * std::cos(p.frequency * x(p.index) + p.phase); },
                    },
                    payoff);
}

McEstimate mc_expectation(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                          const Payoff& payoff) {
  if (const auto* c = std::get_if<CoordinatePayoff>(&payoff); c && (c->index < 0 || c->index >= domain.dimension()))
    throw ParameterError("payoff: coordinate index out of range");
  if (const auto* c = std::get_if<CosinePayoff>(&payoff); c && (c->index < 0 || c->index >= domain.dimension()))
    throw ParameterError("payoff: coordinate index out of range");
  const Ensemble ens = simulate_reflected(cfg, domain, field, {false, false});
  McEstimate out;
  out.failed = ens.failed;
  std::vector<double> values;
  values.reserve(ens.summaries.size());
  for (const PathSummary& s : ens.summaries)
    if (!s.failed) values.push_back(eval_payoff(payoff, s.X_T));
  out.paths = values.size();
  if (out.paths == 0) throw EmptyEnsembleError("mc: every path failed");
  const double n = static_cast<double>(out.paths);
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (out.paths > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace oblique
