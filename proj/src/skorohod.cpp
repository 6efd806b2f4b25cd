#include "oblique/skorohod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "oblique/errors.hpp"

namespace oblique {

std::vector<double> PenaltyConfig::default_schedule() {
  std::vector<double> out;
  for (int k = 0; k <= 6; ++k) out.push_back(1e-1 * std::pow(4.0, -k));
  return out;
}

void PenaltyConfig::validate() const {
  if (eps_schedule.empty()) throw ParameterError("penalty: empty eps schedule");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0)) throw ParameterError("penalty: eps must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1])) throw ParameterError("penalty: eps schedule must decrease strictly");
  }
  if (!(eta >= 4.0)) throw ParameterError("penalty: eta must be at least 4");
  if (!(boundary_tol >= 0.0) || !(direction_tol_deg >= 0.0) || !(interior_fraction_tol >= 0.0))
    throw ParameterError("penalty: tolerances must be nonnegative");
}

namespace {

void check_inputs(const SampledPath& psi, const DomainSpec& domain) {
  psi.validate();
  if (psi.dimension() != domain.dimension()) throw ParameterError("skorohod: path and domain dimensions differ");
  if (psi.horizon() > domain.horizon() * (1.0 + 1e-12)) throw ParameterError("skorohod: path extends past the domain horizon");
  const double d0 = distance(domain, 0.0, psi.values.front());
  if (d0 > 1e-12) throw InitialConditionError("skorohod: psi(0) lies outside the closure of the domain (distance " + format_double(d0) + ")");
}

std::uint64_t substep_count(double dt, double eps, double eta) {
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(dt * eta / eps * (1.0 - 1e-12))));
}

}  // namespace

PenaltyResult solve_penalty(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field, double eps,
                            const PenaltyConfig& cfg) {
  cfg.validate();
  if (!(eps > 0.0)) throw ParameterError("penalty: eps must be positive");
  check_inputs(psi, domain);
  const std::size_t N = psi.size();
  std::uint64_t total = 0;
  for (std::size_t k = 0; k + 1 < N; ++k) total += substep_count(psi.times[k + 1] - psi.times[k], eps, cfg.eta);
  if (total > cfg.max_substeps)
    throw ParameterError("penalty: eps = " + format_double(eps) + " needs " + std::to_string(total) + " substeps (limit " +
                         std::to_string(cfg.max_substeps) + ")");

  const double bound = 10.0 * std::max(1.0, domain.bounding_radius());
  PenaltyResult out;
  out.eps = eps;
  out.substeps = total;
  std::vector<Vec> values(N);
  Vec phi = psi.values.front();
  values[0] = phi;
  double max_d = 0.0;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double t0 = psi.times[k], dt = psi.times[k + 1] - t0;
    const std::uint64_t m = substep_count(dt, eps, cfg.eta);
    const double h = dt / static_cast<double>(m);
    const Vec drift = (psi.values[k + 1] - psi.values[k]) * (h / dt);
    for (std::uint64_t j = 0; j < m; ++j) {
      const double tau = t0 + static_cast<double>(j) * h;
      const double d = distance(domain, tau, phi);
      max_d = std::max(max_d, d);
      if (d > 0.0) phi += (h / eps * d) * gamma(field, domain, tau, phi);
      phi += drift;
      if (!(phi.norm() <= bound))
        throw StiffnessError("penalty: solution left the bounding box at t = " + format_double(tau) + " (eps = " +
                             format_double(eps) + "); increase eta");
    }
    values[k + 1] = phi;
    max_d = std::max(max_d, distance(domain, psi.times[k + 1], phi));
  }
  out.phi = SampledPath(psi.times, std::move(values));
  out.max_distance = max_d;
  out.K_T = max_d * max_d / eps;
  return out;
}

SkorohodSolution make_solution(const SampledPath& psi, const SampledPath& phi, const DomainSpec& domain,
                               double boundary_tol) {
  if (psi.times != phi.times) throw ParameterError("skorohod: psi and phi grids differ");
  SkorohodSolution sol;
  sol.phi = phi;
  std::vector<Vec> lambda(psi.size());
  sol.tv.assign(psi.size(), 0.0);
  sol.active.assign(psi.size(), 0);
  for (std::size_t k = 0; k < psi.size(); ++k) {
    lambda[k] = phi.values[k] - psi.values[k];
    if (k > 0) sol.tv[k] = sol.tv[k - 1] + (lambda[k] - lambda[k - 1]).norm();
    sol.active[k] = std::abs(signed_distance(domain, psi.times[k], phi.values[k])) <= boundary_tol;
  }
  sol.lambda = SampledPath(psi.times, std::move(lambda));
  return sol;
}

SkorohodSolution solve(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field,
                       const PenaltyConfig& cfg) {
  cfg.validate();
  check_inputs(psi, domain);
  std::ostringstream trace;
  bool found = false;
  SkorohodSolution best;
  for (const double eps : cfg.eps_schedule) {
    trace << "eps=" << format_double(eps) << ": ";
    try {
      const PenaltyResult pr = solve_penalty(psi, domain, field, eps, cfg);
      SkorohodSolution sol = make_solution(psi, pr.phi, domain, cfg.boundary_tol);
      sol.eps = eps;
      const PropertyReport rep = validate_solution(psi, sol, domain, field, cfg);
      for (const PropertyRow& row : rep.rows)
        if (row.check_name != "modulus_fit") trace << row.check_name << '=' << format_double(row.worst_violation) << ' ';
      if (rep.all_passed()) {
        best = std::move(sol);
        found = true;
        trace << "pass\n";
      } else {
        trace << "fail\n";
      }
    } catch (const StiffnessError& e) {
      trace << e.what() << '\n';
    } catch (const ParameterError& e) {
      trace << e.what() << '\n';
    }
  }
  if (!found) throw ConvergenceError("skorohod: no eps in the schedule met the validation tolerances\n" + trace.str());
  return best;
}

std::vector<ModulusRow> modulus_table(const SampledPath& psi, const SampledPath& lambda) {
  if (psi.times != lambda.times) throw ParameterError("modulus: grids differ");
  const double T = psi.horizon();
  const std::size_t N = psi.size();
  std::vector<ModulusRow> out;
  for (int j = 0; j <= 7; ++j) {
    const double len = T * std::ldexp(1.0, -j);
    for (double s = 0.0; s + len <= T * (1.0 + 1e-12); s += 0.5 * len) {
      const auto first = static_cast<std::size_t>(std::lower_bound(psi.times.begin(), psi.times.end(), s - 1e-12 * T) - psi.times.begin());
      auto last = static_cast<std::size_t>(std::upper_bound(psi.times.begin(), psi.times.end(), s + len + 1e-12 * T) - psi.times.begin());
      if (last == 0) continue;
      --last;
      if (first >= N || last <= first) continue;
      ModulusRow row;
      row.s = psi.times[first];
      row.t = psi.times[last];
      row.lambda_modulus = oscillation(lambda, first, last);
      row.psi_modulus = oscillation(psi, first, last);
      const double denom = std::sqrt(row.psi_modulus) + std::pow(row.psi_modulus, 1.5) + std::pow(row.t - row.s, 0.25);
      row.ratio = denom > 0.0 ? row.lambda_modulus / denom : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

PropertyReport validate_solution(const SampledPath& psi, const SkorohodSolution& sol, const DomainSpec& domain,
                                 const ReflectionField& field, const PenaltyConfig& cfg) {
  if (psi.times != sol.phi.times || psi.times != sol.lambda.times || sol.tv.size() != psi.size())
    throw ParameterError("validate_solution: grids differ");
  const std::size_t N = psi.size();
  PropertyReport rep;
  rep.name = "skorohod";

  double sp1 = 0.0, sp2 = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    sp1 = std::max(sp1, (sol.phi.values[k] - psi.values[k] - sol.lambda.values[k]).norm());
    sp2 = std::max(sp2, distance(domain, psi.times[k], sol.phi.values[k]));
  }
  rep.add("SP1", N, sp1, 0.0, {}, "max |phi - psi - lambda|");
  rep.add("SP2", N, sp2, cfg.boundary_tol, {}, "max d(t, phi)");

  bool monotone = true;
  for (std::size_t k = 1; k < N; ++k) monotone = monotone && sol.tv[k] >= sol.tv[k - 1];
  const double tv_T = sol.tv.back();
  const bool sp3_ok = std::isfinite(tv_T) && monotone;
  rep.add("SP3", N, sp3_ok ? 0.0 : std::numeric_limits<double>::infinity(), 0.0,
          {{"tv_T", tv_T}, {"max_grid_step", [&] {
              double m = 0.0;
              for (std::size_t k = 1; k < N; ++k) m = std::max(m, psi.times[k] - psi.times[k - 1]);
              return m;
            }()}},
          "|lambda|(T) finite and nondecreasing");

  std::vector<double> depth(N);
  for (std::size_t k = 0; k < N; ++k) depth[k] = signed_distance(domain, psi.times[k], sol.phi.values[k]);
  double interior = 0.0;
  double worst_angle = 0.0;
  std::size_t angle_samples = 0, skipped = 0;
  const double threshold = 1e-12 * std::max(1.0, tv_T);
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const Vec inc = sol.lambda.values[k + 1] - sol.lambda.values[k];
    const double len = inc.norm();
    if (depth[k] < -cfg.boundary_tol && depth[k + 1] < -cfg.boundary_tol) interior += len;
    if (!(len > threshold)) continue;
    try {
      const Vec g = gamma(field, domain, psi.times[k + 1], sol.phi.values[k + 1]);
      const double c = std::clamp(inc.dot(g) / (len * g.norm()), -1.0, 1.0);
      worst_angle = std::max(worst_angle, std::acos(c) * 180.0 / std::numbers::pi);
      ++angle_samples;
    } catch (const RegionError&) {
      ++skipped;
    }
  }
  const double fraction = tv_T > 0.0 ? interior / tv_T : (interior > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.add("SP4", N - 1, fraction, cfg.interior_fraction_tol, {{"interior_variation", interior}},
          "share of |lambda|(T) accumulated with phi strictly inside");
  rep.add("SP5", angle_samples, worst_angle, cfg.direction_tol_deg, {{"skipped", static_cast<double>(skipped)}},
          "max angle (deg) between lambda increments and gamma(t, phi)");

  const std::vector<ModulusRow> table = modulus_table(psi, sol.lambda);
  double R = 0.0;
  for (const ModulusRow& row : table) R = std::max(R, row.ratio);
  rep.add("modulus_fit", table.size(), 0.0, 0.0, {{"R", R}},
          "R in ||lambda||_{s,t} <= R (||psi||^(1/2) + ||psi||^(3/2) + (t-s)^(1/4))");
  return rep;
}

SkorohodSolution half_line_oracle(const SampledPath& psi, const std::function<double(double)>& a, int refine) {
  psi.validate();
  if (psi.dimension() != 1) throw ParameterError("half_line_oracle: path must be one-dimensional");
  if (refine < 1) throw ParameterError("half_line_oracle: refine must be positive");
  const std::size_t N = psi.size();
  if (psi.values[0](0) < a(0.0) - 1e-12) throw InitialConditionError("half_line_oracle: psi(0) below the barrier");
  SkorohodSolution sol;
  std::vector<Vec> phi(N), lambda(N);
  sol.tv.assign(N, 0.0);
  sol.active.assign(N, 0);
  double running = a(0.0) - psi.values[0](0);
  lambda[0] = vec1(std::max(0.0, running));
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double t0 = psi.times[k], dt = psi.times[k + 1] - t0;
    const double p0 = psi.values[k](0), p1 = psi.values[k + 1](0);
    for (int j = 1; j <= refine; ++j) {
      const double w = static_cast<double>(j) / refine;
      running = std::max(running, a(t0 + w * dt) - ((1.0 - w) * p0 + w * p1));
    }
    lambda[k + 1] = vec1(std::max(0.0, running));
  }
  for (std::size_t k = 0; k < N; ++k) {
    phi[k] = psi.values[k] + lambda[k];
    if (k > 0) sol.tv[k] = sol.tv[k - 1] + std::abs(lambda[k](0) - lambda[k - 1](0));
    const double gap = phi[k](0) - a(psi.times[k]);
    sol.active[k] = gap <= 1e-12 * std::max(1.0, std::abs(phi[k](0)));
  }
  sol.phi = SampledPath(psi.times, std::move(phi));
  sol.lambda = SampledPath(psi.times, std::move(lambda));
  return sol;
}

void write_solution_csv(std::ostream& out, const SkorohodSolution& sol) {
  const int n = sol.phi.dimension();
  out << 't';
  for (int i = 1; i <= n; ++i) out << ",phi" << i;
  for (int i = 1; i <= n; ++i) out << ",lambda" << i;
  out << ",tv\n";
  for (std::size_t k = 0; k < sol.phi.size(); ++k) {
    out << format_double(sol.phi.times[k]);
    for (int i = 0; i < n; ++i) out << ',' << format_double(sol.phi.values[k](i));
    for (int i = 0; i < n; ++i) out << ',' << format_double(sol.lambda.values[k](i));
    out << ',' << format_double(sol.tv[k]) << '\n';
  }
}

}  // namespace oblique
