#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oblique/errors.hpp"
#include "oblique/random.hpp"
#include "oblique/skorohod.hpp"

using namespace oblique;

namespace {

SampledPath line1(double T, std::size_t N, double c0, double c1) {
  return SampledPath::uniform(T, N, [&](double t) { return vec1(c0 + c1 * t); });
}

}  // namespace

TEST_CASE("sampled path basics and csv round trip") {
  const SampledPath p = line1(2.0, 4, 1.0, -0.5);
  CHECK(p.size() == 5);
  CHECK(p.at(0.25)(0) == doctest::Approx(0.875));
  CHECK(p.at(5.0)(0) == 0.0);
  CHECK_THROWS_AS(SampledPath({0.0, 1.0, 1.0}, {vec1(0), vec1(0), vec1(0)}), ParameterError);
  CHECK_THROWS_AS(SampledPath({0.1, 1.0}, {vec1(0), vec1(0)}), ParameterError);
  CHECK_THROWS_AS(SampledPath({0.0, 1.0}, {vec1(0), vec2(0, 0)}), ParameterError);

  const SampledPath q = SampledPath::uniform(1.0, 7, [](double t) { return vec2(std::sin(t) / 3.0, 0.1 * t); });
  std::stringstream ss;
  write_csv(ss, q);
  CHECK(ss.str().rfind("t,x1,x2\n", 0) == 0);
  const SampledPath r = read_csv(ss);
  CHECK(r.times == q.times);
  CHECK(sup_distance(r, q) == 0.0);
  std::stringstream bad("t,x1\n0,1\n0.5,zz\n");
  CHECK_THROWS_AS(read_csv(bad), IoError);
}

TEST_CASE("oscillation is the diameter of the visited set") {
  const SampledPath p = SampledPath::uniform(1.0, 400, [](double t) {
    return vec2(std::cos(2 * M_PI * t), std::sin(2 * M_PI * t));
  });
  CHECK(oscillation(p, 0, 400) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(oscillation(p, 0, 100) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  const SampledPath q = SampledPath::uniform(1.0, 10, [](double t) { return vec1(std::sin(7 * t)); });
  CHECK(oscillation(q, 2, 2) == 0.0);
}

TEST_CASE("half-line oracle examples") {
  const auto zero = [](double) { return 0.0; };
  const SampledPath down = line1(1.0, 100, 0.0, -1.0);
  const SkorohodSolution a = half_line_oracle(down, zero);
  for (std::size_t k = 0; k < down.size(); ++k) {
    CHECK(a.lambda.values[k](0) == doctest::Approx(down.times[k]).epsilon(1e-14));
    CHECK(std::abs(a.phi.values[k](0)) <= 1e-15);
  }
  const SkorohodSolution b = half_line_oracle(line1(1.0, 100, 0.0, 1.0), zero);
  CHECK(b.tv.back() == 0.0);
  const SkorohodSolution c = half_line_oracle(line1(1.0, 100, 0.0, 0.0), [](double t) { return t; });
  CHECK(c.phi.values.back()(0) == doctest::Approx(1.0));
  CHECK(c.lambda.values[50](0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(half_line_oracle(line1(1.0, 10, -0.1, 0.0), zero), InitialConditionError);
}

TEST_CASE("penalty solution of an interior constant path is the path") {
  const DomainSpec d = DomainSpec::interval(1.0, Motion::constant(0.0), Motion::constant(1.0));
  const SampledPath psi = line1(1.0, 50, 0.3, 0.0);
  for (double eps : {1e-1, 1e-3}) {
    const PenaltyResult r = solve_penalty(psi, d, ReflectionField::inward_normal(), eps);
    CHECK(sup_distance(r.phi, psi) == 0.0);
    CHECK(r.max_distance == 0.0);
  }
  CHECK_THROWS_AS(solve_penalty(line1(1.0, 50, 1.5, 0.0), d, ReflectionField::inward_normal(), 1e-2), InitialConditionError);
  PenaltyConfig bad;
  bad.eta = 2.0;
  CHECK_THROWS_AS(solve_penalty(psi, d, ReflectionField::inward_normal(), 1e-2, bad), ParameterError);
}

TEST_CASE("penalty solution on a half-line with a falling input") {
  const DomainSpec d = DomainSpec::half_line(1.0, Motion::constant(0.0));
  const SampledPath psi = line1(1.0, 1000, 0.0, -1.0);
  const PenaltyResult r = solve_penalty(psi, d, ReflectionField::inward_normal(), 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k)
    if (psi.times[k] >= 0.1) worst = std::max(worst, std::abs(r.phi.values[k](0)));
  CHECK(worst <= 0.01);
  CHECK(r.max_distance <= std::sqrt(r.K_T * 1e-3) * (1 + 1e-12));
}

TEST_CASE("solve matches the oracle on the sine barrier") {
  const double T = M_PI;
  const DomainSpec d = DomainSpec::half_line(T, Motion::sine(1.0, 1.0, 0.0, 0.0, T));
  const SampledPath psi = line1(T, 10000, 0.0, 0.0);
  const SkorohodSolution sol = solve(psi, d, ReflectionField::inward_normal());
  const SkorohodSolution oracle = half_line_oracle(psi, [](double t) { return std::sin(t); });
  CHECK(sup_distance(sol.phi, oracle.phi) <= 1e-3);
  CHECK(sol.phi.values.back()(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(oracle.lambda.values.back()(0) == doctest::Approx(1.0).epsilon(1e-9));
  const PropertyReport rep = validate_solution(psi, sol, d, ReflectionField::inward_normal());
  CHECK(rep.at("SP1").worst_violation == 0.0);
  CHECK(rep.at("SP2").worst_violation <= 1e-3);
  CHECK(rep.at("SP4").worst_violation <= 1e-2);
  CHECK(rep.at("SP5").worst_violation <= 2.0);
  CHECK(rep.all_passed());
}

TEST_CASE("solve on the shrinking disk follows the radial oracle") {
  const DomainSpec d = DomainSpec::disk(1.0, Motion::constant(0.0), Motion::constant(0.0), Motion::linear(1.0, -0.5));
  const SampledPath psi = SampledPath::constant(1.0, 10000, vec2(0.9, 0.0));
  const SkorohodSolution sol = solve(psi, d, ReflectionField::inward_normal());
  double err = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double t = psi.times[k];
    err = std::max(err, (sol.phi.values[k] - vec2(std::min(0.9, 1.0 - t / 2), 0.0)).norm());
    if (t < 0.19) CHECK(sol.tv[k] == 0.0);
  }
  CHECK(err <= 1e-3);
  CHECK(sol.tv.back() == doctest::Approx(0.4).epsilon(1e-3));
}

TEST_CASE("interior paths need no correction") {
  const DomainSpec d = DomainSpec::interval(1.0, Motion::linear(0.0, 0.1), Motion::constant(2.0));
  const SampledPath psi = SampledPath::uniform(1.0, 500, [](double t) { return vec1(1.0 + 0.3 * std::sin(5 * t)); });
  const SkorohodSolution sol = solve(psi, d, ReflectionField::inward_normal());
  CHECK(sol.tv.back() == 0.0);
  const PropertyReport rep = validate_solution(psi, sol, d, ReflectionField::inward_normal());
  for (const char* row : {"SP1", "SP2", "SP4", "SP5"}) CHECK(rep.at(row).worst_violation == 0.0);
  CHECK(rep.all_passed());
}

TEST_CASE("a corrupted lambda is flagged by the support check") {
  const double T = M_PI;
  const DomainSpec d = DomainSpec::half_line(T, Motion::sine(1.0, 1.0, 0.0, 0.0, T));
  const SampledPath psi = line1(T, 2000, 0.0, 0.0);
  SkorohodSolution sol = half_line_oracle(psi, [](double t) { return std::sin(t); });
  // A bump of lambda after the peak, where phi = 1 is strictly above the barrier.
  const std::size_t k = 1800;
  REQUIRE(std::sin(psi.times[k]) < 0.5);
  sol.lambda.values[k](0) += 0.05;
  sol.phi.values[k](0) += 0.05;
  for (std::size_t j = k; j < psi.size(); ++j) sol.tv[j] += j == k ? 0.05 : 0.1;
  const PropertyReport rep = validate_solution(psi, sol, d, ReflectionField::inward_normal());
  CHECK(rep.at("SP1").passed);
  CHECK_FALSE(rep.at("SP4").passed);
}

TEST_CASE("monotone loading on the half-line") {
  const DomainSpec d = DomainSpec::half_line(1.0, Motion::constant(0.0));
  RngStream rng(11, 0);
  std::vector<double> walk(2001, 0.0);
  for (std::size_t k = 1; k < walk.size(); ++k) walk[k] = walk[k - 1] + 0.01 * rng.normal();
  const SampledPath hi = SampledPath::uniform(1.0, 2000, [&](double t) { return vec1(walk[std::lround(t * 2000)] + 0.2 * t * t); });
  const SampledPath lo = SampledPath::uniform(1.0, 2000, [&](double t) { return vec1(walk[std::lround(t * 2000)] - 0.3 * t); });
  const auto zero = [](double) { return 0.0; };
  const SkorohodSolution oh = half_line_oracle(hi, zero), ol = half_line_oracle(lo, zero);
  const SkorohodSolution ph = solve(hi, d, ReflectionField::inward_normal());
  const SkorohodSolution pl = solve(lo, d, ReflectionField::inward_normal());
  const double tol = std::max(sup_distance(ph.lambda, oh.lambda), sup_distance(pl.lambda, ol.lambda));
  CHECK(tol <= 1e-3);
  for (std::size_t k = 0; k < hi.size(); ++k) {
    CHECK(ol.lambda.values[k](0) >= oh.lambda.values[k](0));
    CHECK(pl.lambda.values[k](0) >= ph.lambda.values[k](0) - 2 * tol);
  }
}

TEST_CASE("penalty distance constant is stable under grid refinement") {
  const double T = M_PI;
  const DomainSpec d = DomainSpec::half_line(T, Motion::sine(1.0, 1.0, 0.0, 0.0, T));
  const double eps = 1e-3;
  const PenaltyResult a = solve_penalty(line1(T, 2000, 0.0, 0.0), d, ReflectionField::inward_normal(), eps);
  const PenaltyResult b = solve_penalty(line1(T, 4000, 0.0, 0.0), d, ReflectionField::inward_normal(), eps);
  CHECK(a.K_T > 0.0);
  CHECK(std::max(a.K_T, b.K_T) / std::min(a.K_T, b.K_T) < 2.0);
}

TEST_CASE("solve reports convergence failure with a trace") {
  const DomainSpec d = DomainSpec::half_line(1.0, Motion::linear(0.0, 5.0));
  PenaltyConfig cfg;
  cfg.eps_schedule = {1.0};
  try {
    solve(line1(1.0, 100, 0.0, 0.0), d, ReflectionField::inward_normal(), cfg);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("eps=1") != std::string::npos);
  }
}
