#include "oblique/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "oblique/errors.hpp"

namespace oblique {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Artifacts {
  fs::path dir;
  std::vector<std::string> files;

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / name).string() + "'");
    files.push_back(name);
    return out;
  }
};

void write_rows_csv(std::ostream& out, const PropertyReport& rep) {
  out << "check,samples,worst_violation,tolerance,passed\n";
  for (const PropertyRow& r : rep.rows)
    out << r.check_name << ',' << r.samples << ',' << format_double(r.worst_violation) << ','
        << format_double(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
}

std::string coords_header(const std::string& prefix, int n) {
  std::string h;
  for (int i = 1; i <= n; ++i) h += "," + prefix + std::to_string(i);
  return h;
}

void run_skorohod(const ExperimentConfig& c, const SkorohodExperiment& e, PropertyReport& rep, json& results,
                  Artifacts& art) {
  {
    std::ofstream out = art.open("psi.csv");
    write_csv(out, e.psi, "psi");
  }
  const SkorohodSolution sol = solve(e.psi, c.domain, c.field, e.penalty);
  rep.append(validate_solution(e.psi, sol, c.domain, c.field, e.penalty));
  results["eps"] = sol.eps;
  results["tv_T"] = sol.tv.back();
  {
    std::ofstream out = art.open("solution.csv");
    write_solution_csv(out, sol);
  }
  if (e.oracle) {
    const Motion lower = std::get<MovingInterval>(c.domain.shape()).lower;
    const SkorohodSolution ref = half_line_oracle(e.psi, [&](double t) { return lower.value(t); });
    rep.add("oracle", e.psi.size(), sup_distance(sol.phi, ref.phi), c.tolerances.oracle, {},
            "sup |phi - phi_oracle| against the half-line running maximum");
    std::ofstream out = art.open("oracle.csv");
    write_solution_csv(out, ref);
  }
}

void run_sde(const ExperimentConfig& c, const SdeExperiment& e, PropertyReport& rep, json& results, Artifacts& art) {
  const SdeConfig& cfg = e.sde;
  validate(cfg, c.domain);
  if (cfg.lipschitz > 0.0) rep.rows.push_back(check_lipschitz(cfg, c.domain));
  SimulationOptions opt;
  opt.keep_paths = e.save_paths > 0;
  const Ensemble ens = simulate_reflected(cfg, c.domain, c.field, opt);
  const int n = c.domain.dimension();
  rep.add("constraint", cfg.paths - ens.failed, ens.max_violation, c.tolerances.boundary_tol, {},
          "max over paths and steps of d(t, X)");
  rep.add("direction", cfg.paths - ens.failed, ens.max_angle_deg, c.tolerances.direction_tol_deg, {},
          "angle between Lambda increments and gamma (degrees)");
  rep.add("failed_paths", cfg.paths, static_cast<double>(ens.failed), 0.0, {},
          ens.failures.empty() ? std::string("paths whose correction diverged") : ens.failures.front());
  results["paths"] = cfg.paths;
  results["failed"] = ens.failed;
  {
    std::ofstream out = art.open("terminal.csv");
    out << "path" << coords_header("x", n) << ",tv,max_violation,failed\n";
    for (std::size_t p = 0; p < ens.summaries.size(); ++p) {
      const PathSummary& s = ens.summaries[p];
      out << p;
      for (int i = 0; i < n; ++i) out << ',' << (s.failed ? "nan" : format_double(s.X_T(i)));
      out << ',' << format_double(s.tv_T) << ',' << format_double(s.max_violation) << ',' << (s.failed ? 1 : 0) << '\n';
    }
  }
  if (e.save_paths > 0) {
    std::ofstream out = art.open("paths.csv");
    out << "path,t" << coords_header("x", n) << coords_header("lambda", n) << ",tv\n";
    for (std::size_t p = 0; p < std::min(e.save_paths, ens.paths.size()); ++p) {
      const ReflectedTrajectory& tr = ens.paths[p];
      if (ens.summaries[p].failed) continue;
      for (std::size_t k = 0; k < tr.X.size(); ++k) {
        out << p << ',' << format_double(tr.X.times[k]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(tr.X.values[k](i));
        for (int i = 0; i < n; ++i) out << ',' << format_double(tr.Lambda.values[k](i));
        out << ',' << format_double(tr.tv[k]) << '\n';
      }
    }
  }
  if (e.payoff) {
    std::vector<double> v;
    for (const PathSummary& s : ens.summaries)
      if (!s.failed) v.push_back(eval_payoff(*e.payoff, s.X_T));
    if (v.empty()) throw EmptyEnsembleError("every path failed; no estimate");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
    results["mean"] = mean;
    results["stderr"] = se;
    if (e.expected) {
      results["expected"] = *e.expected;
      rep.add("expectation", v.size(), std::abs(mean - *e.expected),
              c.tolerances.mc_sigmas * se + c.tolerances.mc_slack, {{"mean", mean}, {"stderr", se}},
              "|mean - expected| against sigmas * stderr + slack");
    }
  }
}

void run_pde(const ExperimentConfig& c, const PdeExperiment& e, PropertyReport& rep, json& results, Artifacts& art) {
  if (e.compare_with) {
    const Payoff g = *e.compare_with;
    const PropertyReport cmp = check_comparison(
        e.problem, e.grid, e.problem.initial, [g](double x) { return eval_payoff(g, vec1(x)); },
        c.tolerances.comparison);
    rep.append(cmp);
  }
  const PdeSolution sol = solve_oblique_parabolic(e.problem, e.grid);
  rep.add("solve.cfl", sol.steps, sol.max_cfl_ratio - 1.0, 0.0, {{"max_ratio", sol.max_cfl_ratio}, {"dt", sol.dt}},
          "dt against the monotonicity bound");
  rep.add("solve.finite", static_cast<std::size_t>(sol.u.size()), sol.u.allFinite() ? 0.0 : 1.0, 0.0, {},
          "every stored value is finite");
  results["dt"] = sol.dt;
  results["steps"] = sol.steps;
  results["boundary_residual"] = boundary_residual(e.problem, sol);
  results["u_min"] = sol.u.minCoeff();
  results["u_max"] = sol.u.maxCoeff();
  {
    std::ofstream out = art.open("solution.csv");
    write_solution_csv(out, sol);
  }
}

void run_crosscheck(const ExperimentConfig& c, const CrosscheckExperiment& e, PropertyReport& rep, json& results,
                    Artifacts& art) {
  const FeynmanKacResult r = feynman_kac_crosscheck(c.domain, e.sigma, e.g, e.grid, e.mc);
  rep.add("feynman_kac", r.paths, r.gap, c.tolerances.mc_sigmas * r.stderr_ + c.tolerances.mc_slack,
          {{"u_pde", r.u_pde}, {"u_mc", r.u_mc}, {"stderr", r.stderr_}},
          "|u_pde(T, x0) - E g(X~_T)| against sigmas * stderr + slack");
  results["u_pde"] = r.u_pde;
  results["u_mc"] = r.u_mc;
  results["stderr"] = r.stderr_;
  results["failed"] = r.failed;
  std::ofstream out = art.open("crosscheck.csv");
  out << "u_pde,u_mc,stderr,paths,failed\n"
      << format_double(r.u_pde) << ',' << format_double(r.u_mc) << ',' << format_double(r.stderr_) << ',' << r.paths
      << ',' << r.failed << '\n';
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  Artifacts art{out_dir, {}};
  PropertyReport rep{config.kind, {}};
  json results = json::object();
  RunOutcome outcome;
  try {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, SkorohodExperiment>) {
            run_skorohod(config, e, rep, results, art);
          } else if constexpr (std::is_same_v<E, SdeExperiment>) {
            run_sde(config, e, rep, results, art);
          } else if constexpr (std::is_same_v<E, PdeExperiment>) {
            run_pde(config, e, rep, results, art);
          } else if constexpr (std::is_same_v<E, CrosscheckExperiment>) {
            run_crosscheck(config, e, rep, results, art);
          } else if constexpr (std::is_same_v<E, VerifyDomainExperiment>) {
            rep.append(verify_assumptions(config.domain, config.field, e.certificate, e.budget));
          } else {
            TestFunctionParams params = e.params;
            rep.append(verify_test_properties(params, config.field, config.domain, e.sampler));
            results["chi"] = params.chi;
            results["C"] = params.C;
          }
        },
        config.experiment);
  } catch (const IoError&) {
    throw;
  } catch (const Error& err) {
    outcome.error_kind = err.kind();
    outcome.error_message = err.what();
  }
  {
    std::ofstream out = art.open("rows.csv");
    write_rows_csv(out, rep);
  }
  outcome.passed = outcome.error_kind.empty() && rep.all_passed();

  json s;
  s["schema_version"] = kSummarySchemaVersion;
  s["experiment"] = config.kind;
  s["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  s["passed"] = outcome.passed;
  s["rows"] = rep.to_json()["rows"];
  s["results"] = results;
  s["error"] = outcome.error_kind.empty() ? json(nullptr)
                                          : json{{"kind", outcome.error_kind}, {"message", outcome.error_message}};
  art.files.push_back("summary.json");
  s["artifacts"] = art.files;
  {
    std::ofstream out(out_dir / "summary.json", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (out_dir / "summary.json").string() + "'");
    out << s.dump(2) << '\n';
  }
  outcome.summary = std::move(s);
  return outcome;
}

namespace {

std::string num(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_number()) return "?";
  std::ostringstream os;
  os << std::setprecision(4) << v.get<double>();
  return os.str();
}

}  // namespace

std::string render_report(const fs::path& dir) {
  const fs::path file = dir / "summary.json";
  std::ifstream in(file);
  if (!in) throw IoError("no summary found in '" + dir.string() + "'");
  json s;
  try {
    s = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("corrupt summary '" + file.string() + "': " + e.what());
  }
  if (!s.is_object() || !s.contains("schema_version") || !s.contains("rows") || !s["rows"].is_array())
    throw ConfigError("corrupt summary '" + file.string() + "': missing schema_version or rows");
  if (s["schema_version"] != kSummarySchemaVersion)
    throw ConfigError("summary '" + file.string() + "' has unsupported schema_version " + s["schema_version"].dump());

  std::vector<json> rows(s["rows"].begin(), s["rows"].end());
  std::stable_partition(rows.begin(), rows.end(), [](const json& r) { return !r.value("passed", false); });

  std::size_t width = 5;
  for (const json& r : rows) width = std::max(width, r.value("check_name", std::string()).size());
  std::ostringstream os;
  os << "experiment: " << s.value("experiment", std::string("?"));
  if (s.contains("seed") && !s["seed"].is_null()) os << "  seed: " << s["seed"].dump();
  os << "  overall: " << (s.value("passed", false) ? "PASS" : "FAIL") << '\n';
  if (s.contains("error") && s["error"].is_object())
    os << "error (" << s["error"].value("kind", std::string()) << "): " << s["error"].value("message", std::string())
       << '\n';
  os << std::left << std::setw(6) << "status" << ' ' << std::setw(static_cast<int>(width)) << "check" << ' '
     << std::right << std::setw(12) << "worst" << ' ' << std::setw(12) << "tolerance" << ' ' << std::setw(12)
     << "margin" << ' ' << std::setw(10) << "samples" << '\n';
  for (const json& r : rows) {
    const json& worst = r.contains("worst_violation") ? r["worst_violation"] : json(nullptr);
    const json& tol = r.contains("tolerance") ? r["tolerance"] : json(nullptr);
    std::string margin = "-";
    if (worst.is_number() && tol.is_number()) margin = num(tol.get<double>() - worst.get<double>());
    else if (worst.is_string() && worst.get<std::string>() == "inf") margin = "-inf";
    os << std::left << std::setw(6) << (r.value("passed", false) ? "PASS" : "FAIL") << ' '
       << std::setw(static_cast<int>(width)) << r.value("check_name", std::string()) << ' ' << std::right << std::setw(12)
       << num(worst) << ' ' << std::setw(12) << num(tol) << ' ' << std::setw(12) << margin << ' ' << std::setw(10)
       << (r.contains("samples") ? r["samples"].dump() : "") << '\n';
  }
  return os.str();
}

}  // namespace oblique
