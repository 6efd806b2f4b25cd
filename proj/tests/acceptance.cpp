#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "oblique/assumptions.hpp"
#include "oblique/config.hpp"
#include "oblique/errors.hpp"
#include "oblique/pde.hpp"
#include "oblique/rsde.hpp"
#include "oblique/skorohod.hpp"
#include "oblique/testfn.hpp"

using namespace oblique;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(OBLIQUE_SOURCE_DIR) / "configs";
constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= budget_s;
  const bool ok = v.passed && in_time;
  if (!ok) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs of %.0fs", secs, budget_s);
  std::cout << "[" << (ok ? "PASS" : "FAIL") << "] " << id << ". " << name << ": " << v.detail << " (" << buf
            << (in_time ? "" : ", over budget") << ")" << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ExperimentConfig config(const std::string& name) { return load_config((kConfigs / (name + ".toml")).string()); }

SampledPath flat(double T, std::size_t N) { return SampledPath::constant(T, N, vec1(0.0)); }

double penalty_slope(const DomainSpec& d, std::size_t N, std::vector<double>& dist) {
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  dist.clear();
  for (double e : eps) dist.push_back(solve_penalty(flat(d.horizon(), N), d, ReflectionField::inward_normal(), e).max_distance);
  return fit_power_law(eps, dist).first;
}

struct Solved {
  std::string name;
  SampledPath psi;
  SkorohodSolution sol;
  DomainSpec domain;
  ReflectionField field;
  PenaltyConfig penalty;
};

std::vector<Solved> solved;

const char* kOracleCases[] = {"skorohod_sine_barrier", "skorohod_falling_input", "skorohod_rising_barrier",
                              "skorohod_random_walk", "skorohod_polynomial_barrier"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::cout << std::unitbuf;

  criterion(1, "penalty distance rate on the sine barrier", 10.0, [] {
    const DomainSpec d = DomainSpec::half_line(kPi, Motion::sine(1.0, 1.0, 0.0, 0.0, kPi));
    std::vector<double> dist;
    const double slope = penalty_slope(d, 2000, dist);
    std::string detail = "slope " + fmt(slope) + " (want [0.45, 0.55]); max d =";
    for (double x : dist) detail += " " + fmt(x);
    return Verdict{slope >= 0.45 && slope <= 0.55, detail};
  });
  {
    // Informational: the square-root barrier attains the sqrt(eps) bound.
    const DomainSpec d = DomainSpec::half_line(1.0, Motion::square_root(0.3));
    std::vector<double> dist;
    const double slope = penalty_slope(d, 2000, dist);
    std::cout << "[INFO] 1. same regression on the barrier 0.3 sqrt(t): slope " << fmt(slope) << std::endl;
  }

  criterion(2, "penalty solve against the running-maximum oracle", 30.0, [] {
    double worst = 0.0;
    std::string detail;
    for (const char* name : kOracleCases) {
      const ExperimentConfig c = config(name);
      const auto& e = std::get<SkorohodExperiment>(c.experiment);
      const SkorohodSolution sol = solve(e.psi, c.domain, c.field, e.penalty);
      const Motion lower = std::get<MovingInterval>(c.domain.shape()).lower;
      const SkorohodSolution ref = half_line_oracle(e.psi, [&](double t) { return lower.value(t); });
      const double err = sup_distance(sol.phi, ref.phi);
      worst = std::max(worst, err);
      detail += std::string(name + 9) + " " + fmt(err) + ", ";
      solved.push_back({name, e.psi, sol, c.domain, c.field, e.penalty});
    }
    const ExperimentConfig c = config("skorohod_shrinking_disk");
    const auto& e = std::get<SkorohodExperiment>(c.experiment);
    const SkorohodSolution sol = solve(e.psi, c.domain, c.field, e.penalty);
    double err = 0.0;
    for (std::size_t k = 0; k < e.psi.size(); ++k)
      err = std::max(err, (sol.phi.values[k] - vec2(std::min(0.9, 1.0 - e.psi.times[k] / 2), 0.0)).norm());
    worst = std::max(worst, err);
    detail += "shrinking_disk " + fmt(err) + "; worst " + fmt(worst) + " (want <= 1e-3) at N = " +
              std::to_string(e.psi.size() - 1);
    solved.push_back({"skorohod_shrinking_disk", e.psi, sol, c.domain, c.field, e.penalty});
    return Verdict{worst <= 1e-3, detail};
  });

  criterion(3, "Skorohod property validator suite", 5.0, [] {
    bool ok = !solved.empty();
    double sp1 = 0, sp2 = 0, sp4 = 0, sp5 = 0;
    {
      const ExperimentConfig c = config("skorohod_interior");
      const auto& e = std::get<SkorohodExperiment>(c.experiment);
      solved.push_back({"skorohod_interior", e.psi, solve(e.psi, c.domain, c.field, e.penalty), c.domain, c.field,
                        e.penalty});
    }
    for (const Solved& s : solved) {
      const PropertyReport r = validate_solution(s.psi, s.sol, s.domain, s.field, s.penalty);
      sp1 = std::max(sp1, r.at("SP1").worst_violation);
      sp2 = std::max(sp2, r.at("SP2").worst_violation);
      sp4 = std::max(sp4, r.at("SP4").worst_violation);
      sp5 = std::max(sp5, r.at("SP5").worst_violation);
      ok = ok && r.at("SP3").passed;
    }
    ok = ok && sp1 == 0.0 && sp2 <= 1e-3 && sp4 <= 1e-2 && sp5 <= 2.0;

    // Corrupted lambda: a bump where phi sits strictly above the barrier.
    const double T = kPi;
    const DomainSpec d = DomainSpec::half_line(T, Motion::sine(1.0, 1.0, 0.0, 0.0, T));
    const SampledPath psi = flat(T, 2000);
    SkorohodSolution bad = half_line_oracle(psi, [](double t) { return std::sin(t); });
    bad.lambda.values[1800](0) += 0.05;
    bad.phi.values[1800](0) += 0.05;
    for (std::size_t j = 1800; j < psi.size(); ++j) bad.tv[j] += j == 1800 ? 0.05 : 0.1;
    const PropertyRow sp4_bad = validate_solution(psi, bad, d, ReflectionField::inward_normal()).at("SP4");
    ok = ok && !sp4_bad.passed;
    return Verdict{ok, std::to_string(solved.size()) + " solutions: SP1 " + fmt(sp1) + ", SP2 " + fmt(sp2) + ", SP4 " +
                           fmt(sp4) + ", SP5 " + fmt(sp5) + " deg; corrupted control SP4 " +
                           fmt(sp4_bad.worst_violation) + (sp4_bad.passed ? " (not flagged)" : " (flagged)")};
  });

  criterion(4, "modulus constant stable under grid refinement", 60.0, [] {
    const double T = 1.0;
    const std::vector<Motion> barriers = {Motion::constant(0.0), Motion::linear(0.0, 0.6),
                                          Motion::sine(0.3, 4.0, 0.0, 0.0, T), Motion::square_root(0.4)};
    const std::vector<std::function<double(double)>> inputs = {
        [](double t) { return -0.8 * t; },
        [](double t) { return 0.2 * std::sin(7.0 * t); },
        [](double t) { return 0.1 - 0.5 * t * t; },
        [](double t) { return 0.15 * std::cos(13.0 * t) - 0.15 + 0.3 * t; },
        [](double t) { return -0.3 * std::sqrt(t) + 0.05 * std::sin(25.0 * t); },
    };
    double worst = 1.0;
    std::size_t cases = 0, contact = 0;
    for (const Motion& a : barriers)
      for (const auto& f : inputs) {
        const DomainSpec d = DomainSpec::half_line(T, a);
        const double lift = std::max(0.0, a.value(0.0) - f(0.0));
        double R[2];
        for (int level = 0; level < 2; ++level) {
          const SampledPath psi = SampledPath::uniform(T, 1000u << level, [&](double t) { return vec1(f(t) + lift); });
          const SkorohodSolution sol = solve(psi, d, ReflectionField::inward_normal());
          R[level] = validate_solution(psi, sol, d, ReflectionField::inward_normal()).at("modulus_fit").constant("R");
        }
        ++cases;
        if (R[0] > 0.0 && R[1] > 0.0) {
          ++contact;
          worst = std::max(worst, std::max(R[0], R[1]) / std::min(R[0], R[1]));
        }
      }
    return Verdict{contact == cases && worst < 2.0, std::to_string(cases) + " cases (" + std::to_string(contact) +
                                                         " with boundary contact), worst R ratio " + fmt(worst) +
                                                         " (want < 2) at N = 1000 vs 2000"};
  });

  criterion(5, "test-function property suite", 60.0, [] {
    struct Case {
      std::string name;
      DomainSpec domain;
      ReflectionField field;
      TestFunctionParams params;
    };
    std::vector<Case> cases;
    cases.push_back({"moving interval",
                     DomainSpec::interval(1.0, Motion::sine(0.2, 3.0, 0.0, 0.0, 1.0), Motion::linear(2.0, 0.5)),
                     ReflectionField::inward_normal(), {}});
    for (const char* name : {"verify_testfn_disk", "verify_testfn_square"}) {
      const ExperimentConfig c = config(name);
      cases.push_back({name, c.domain, c.field, std::get<VerifyTestfnExperiment>(c.experiment).params});
    }
    std::size_t rows = 0;
    std::string failed;
    for (Case& c : cases) {
      TestSampler s;
      s.points = 10000;
      const PropertyReport r = verify_test_properties(c.params, c.field, c.domain, s);
      rows += r.rows.size();
      for (const PropertyRow& row : r.rows)
        if (!row.passed) failed += " " + c.name + ":" + row.check_name;
    }
    return Verdict{failed.empty(), std::to_string(rows) + " rows over " + std::to_string(cases.size()) +
                                       " geometries at 1e4 points" + (failed.empty() ? "" : "; failing" + failed)};
  });

  criterion(6, "reflected Brownian motion law", 30.0, [] {
    const ExperimentConfig c = config("sde_reflected_brownian");
    const auto& e = std::get<SdeExperiment>(c.experiment);
    const McEstimate m = mc_expectation(e.sde, c.domain, c.field, CoordinatePayoff{0});
    const double target = std::sqrt(2.0 / kPi);
    const double bound = 3.0 * m.stderr_ + 5e-3;
    return Verdict{std::abs(m.mean - target) <= bound && m.failed == 0,
                   "mean " + fmt(m.mean) + " vs " + fmt(target) + ", |gap| " + fmt(std::abs(m.mean - target)) +
                       " <= " + fmt(bound) + " at M = " + std::to_string(m.paths) + ", N = " +
                       std::to_string(e.sde.steps)};
  });

  criterion(7, "contraction constant and Picard convergence", 120.0, [] {
    const ExperimentConfig m = config("sde_multiplicative");
    SdeConfig cfg = std::get<SdeExperiment>(m.experiment).sde;
    double lo = INFINITY, hi = 0.0;
    bool bound_ok = true;
    std::string detail = "fitted C";
    for (std::size_t M : {1000, 4000, 16000}) {
      cfg.paths = M;
      const ContractionResult r = contraction_experiment(cfg, vec1(0.6), vec1(-0.4), m.domain, m.field);
      bound_ok = bound_ok && std::isfinite(r.fitted_C) &&
                 r.lhs <= r.fitted_C * (r.initial_gap_sq + r.rhs_integral) * (1.0 + 1e-12);
      lo = std::min(lo, r.fitted_C);
      hi = std::max(hi, r.fitted_C);
      detail += " " + fmt(r.fitted_C);
    }
    const double spread = hi / lo;
    detail += " (spread " + fmt(spread) + ", want < 2); Picard gaps";
    const ExperimentConfig c = config("sde_mean_reverting");
    SdeConfig pc = std::get<SdeExperiment>(c.experiment).sde;
    const PicardResult p = picard_solve(pc, c.domain, c.field, noise_table(pc, c.domain.horizon(), 0), 8);
    bool monotone = true;
    for (std::size_t k = 2; k < p.sup_gaps.size(); ++k) monotone = monotone && p.sup_gaps[k] < p.sup_gaps[k - 1];
    for (double g : p.sup_gaps) detail += " " + fmt(g);
    const bool picard_ok = p.converged && monotone && p.sup_gaps.size() <= 8 && p.sup_gaps.back() <= 1e-4;
    return Verdict{bound_ok && spread < 2.0 && picard_ok, detail};
  });

  criterion(8, "discrete comparison principle", 10.0, [] {
    double worst = 0.0;
    std::size_t cases = 0;
    for (const char* name : {"pde_moving_interval", "pde_robin_boundary", "pde_max_operator"}) {
      const ExperimentConfig c = config(name);
      const auto& e = std::get<PdeExperiment>(c.experiment);
      const Payoff g = *e.compare_with;
      const PropertyReport r = check_comparison(e.problem, e.grid, e.problem.initial,
                                                [g](double x) { return eval_payoff(g, vec1(x)); }, 1e-12);
      if (!r.at("initial_order").passed || !r.at("cfl").passed) worst = INFINITY;
      worst = std::max(worst, r.at("comparison").worst_violation);
      ++cases;
    }
    const ExperimentConfig c = config("pde_cfl_violation");
    const auto& e = std::get<PdeExperiment>(c.experiment);
    const Payoff g = *e.compare_with;
    const PropertyReport control = check_comparison(e.problem, e.grid, e.problem.initial,
                                                    [g](double x) { return eval_payoff(g, vec1(x)); }, 1e-12);
    const bool flagged = !control.at("cfl").passed && !control.all_passed();
    return Verdict{worst <= 1e-12 && flagged, std::to_string(cases) + " cases, max (u - v)^+ = " + fmt(worst) +
                                                   " (want <= 1e-12); CFL control " +
                                                   (flagged ? "flagged" : "not flagged")};
  });

  criterion(9, "heat equation oracle and refinement", 10.0, [] {
    const DomainSpec d = DomainSpec::interval(0.2, Motion::constant(0.0), Motion::constant(1.0));
    const PdeProblem p{d, LinearDiffusion::constant(0.5), neumann(), ReflectionField::inward_normal().outward(),
                       [](double x) { return std::cos(kPi * x); }};
    const auto error = [&](std::size_t M, double dt) {
      PdeGrid g;
      g.intervals = M;
      g.dt = dt;
      g.saved_levels = 2;
      const PdeSolution s = solve_oblique_parabolic(p, g);
      const Eigen::Index last = s.u.rows() - 1;
      double e = 0.0;
      for (Eigen::Index i = 0; i < s.u.cols(); ++i)
        e = std::max(e, std::abs(s.u(last, i) - std::exp(-kPi * kPi * 0.1) * std::cos(kPi * s.x(last, i))));
      return e;
    };
    const double h = 1.0 / 200.0;
    const double coarse = error(200, 0.05 * h * h);
    const double fine = error(400, 0.025 * h * h);
    return Verdict{coarse <= 5e-3 && coarse / fine >= 3.0, "error " + fmt(coarse) + " at M = 200 (want <= 5e-3), " +
                                                               fmt(fine) + " at M = 400, ratio " + fmt(coarse / fine) +
                                                               " (want >= 3)"};
  });

  criterion(10, "Feynman-Kac cross-check on a moving interval", 60.0, [] {
    const ExperimentConfig c = config("crosscheck_moving_interval");
    const auto& e = std::get<CrosscheckExperiment>(c.experiment);
    const FeynmanKacResult r = feynman_kac_crosscheck(c.domain, e.sigma, e.g, e.grid, e.mc);
    const double bound = 3.0 * r.stderr_ + 2e-2;
    return Verdict{r.gap <= bound, "u_pde " + fmt(r.u_pde) + ", u_mc " + fmt(r.u_mc) + ", gap " + fmt(r.gap) +
                                       " <= " + fmt(bound) + " at M = " + std::to_string(r.paths) + ", N = " +
                                       std::to_string(e.mc.steps) + ", " + std::to_string(e.grid.intervals) +
                                       " intervals"};
  });

  criterion(11, "byte-identical reruns across worker counts", 30.0, [] {
    const fs::path root = fs::temp_directory_path() / "oblique_acceptance_determinism";
    fs::remove_all(root);
    std::size_t compared = 0;
    std::string mismatch;
    for (const char* name : {"sde_rotated_disk", "sde_mean_reverting"}) {
      std::vector<fs::path> dirs;
      for (const char* workers : {"1", "1", "4"}) {
        const fs::path out = root / (std::string(name) + "_" + std::to_string(dirs.size()));
        const std::string cmd = std::string("\"") + OBLIQUE_CLI + "\" run \"" + (kConfigs / (std::string(name) + ".toml")).string() +
                                "\" --workers " + workers + " --out \"" + out.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return Verdict{false, std::string("run failed: ") + cmd};
        dirs.push_back(out);
      }
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        if (entry.path().extension() != ".csv") continue;
        const std::string ref = slurp(entry.path());
        for (std::size_t i = 1; i < dirs.size(); ++i) {
          ++compared;
          if (slurp(dirs[i] / entry.path().filename()) != ref) mismatch += " " + entry.path().filename().string();
        }
      }
    }
    return Verdict{compared > 0 && mismatch.empty(), std::to_string(compared) +
                                                         " CSV comparisons (workers 1, 1, 4)" +
                                                         (mismatch.empty() ? ", all identical" : "; differ:" + mismatch)};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
