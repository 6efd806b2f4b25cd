#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oblique/errors.hpp"
#include "oblique/pde.hpp"

using namespace oblique;

namespace {

const ReflectionField kOut = ReflectionField::inward_normal().outward();

DomainSpec unit(double T) { return DomainSpec::interval(T, Motion::constant(0.0), Motion::constant(1.0)); }

PdeProblem heat(const DomainSpec& d, std::function<double(double)> g) {
  return PdeProblem{d, LinearDiffusion::constant(0.5), neumann(), kOut, std::move(g)};
}

double heat_error(std::size_t M, double dt) {
  const PdeProblem p = heat(unit(0.2), [](double x) { return std::cos(M_PI * x); });
  PdeGrid g;
  g.intervals = M;
  g.dt = dt;
  const PdeSolution s = solve_oblique_parabolic(p, g);
  const Eigen::Index last = s.u.rows() - 1;
  double e = 0.0;
  for (Eigen::Index i = 0; i < s.u.cols(); ++i)
    e = std::max(e, std::abs(s.u(last, i) - std::exp(-M_PI * M_PI * 0.1) * std::cos(M_PI * s.x(last, i))));
  return e;
}

}  // namespace

TEST_CASE("constants are preserved on moving intervals") {
  const std::vector<DomainSpec> domains = {
      unit(1.0),
      DomainSpec::interval(1.0, Motion::linear(0.0, 0.2), Motion::constant(1.0)),
      DomainSpec::interval(1.0, Motion::sine(0.1, 2.0, 0.0, 0.0, 1.0), Motion::linear(1.0, 0.5)),
  };
  for (const DomainSpec& d : domains) {
    const PdeSolution s = solve_oblique_parabolic(heat(d, [](double) { return 3.0; }), PdeGrid{});
    CHECK((s.u.array() - 3.0).abs().maxCoeff() <= 1e-12);
    CHECK(s.max_cfl_ratio <= 1.0);
  }
}

TEST_CASE("heat equation with Neumann data matches separation of variables") {
  const double h = 1.0 / 200.0;
  const double coarse = heat_error(200, 0.05 * h * h);
  const double fine = heat_error(400, 0.025 * h * h);
  CHECK(coarse <= 5e-3);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("discrete maximum principle") {
  const DomainSpec d = DomainSpec::interval(0.5, Motion::linear(0.0, 0.4), Motion::sine(0.2, 3.0, 0.0, 1.2, 0.5));
  PdeProblem p = heat(d, [](double x) { return std::sin(9.0 * x) + 0.3 * x; });
  p.op = LinearDiffusion{[](double t, double x) { return 0.2 + 0.1 * std::sin(x + t); },
                         [](double, double x) { return 0.5 - x; }, 0.0};
  PdeGrid g;
  g.intervals = 80;
  g.saved_levels = 100000;
  const PdeSolution s = solve_oblique_parabolic(p, g);
  const double lo = s.u.row(0).minCoeff(), hi = s.u.row(0).maxCoeff();
  CHECK(s.u.minCoeff() >= lo);
  CHECK(s.u.maxCoeff() <= hi);
}

TEST_CASE("comparison holds for ordered data") {
  const DomainSpec d = DomainSpec::interval(0.3, Motion::linear(0.0, 0.2), Motion::constant(1.0));
  const PdeProblem p = heat(d, [](double x) { return std::cos(M_PI * x); });
  const auto g = [](double x) { return std::cos(M_PI * x); };
  PdeGrid grid;
  grid.intervals = 100;

  const PropertyReport same = check_comparison(p, grid, g, g);
  CHECK(same.at("comparison").worst_violation == 0.0);
  CHECK(same.all_passed());

  const PropertyReport shifted = check_comparison(p, grid, g, [&](double x) { return g(x) + 0.1; });
  CHECK(shifted.all_passed());
  CHECK(shifted.at("comparison").constant("min_margin") >= 0.1 * std::exp(-1e-12 * 0.3) - 1e-12);

  PdeProblem mx = p;
  mx.op = MaxOfLinear{{LinearDiffusion::constant(0.3), LinearDiffusion::constant(0.5)}};
  const PropertyReport bump = check_comparison(mx, grid, g, [&](double x) { return g(x) + 0.5 * std::exp(-50 * (x - 0.05) * (x - 0.05)); });
  CHECK(bump.all_passed());

  PdeProblem robin = p;
  robin.boundary = polynomial_boundary(0.1, 1.0, 0.5);
  const PropertyReport r = check_comparison(robin, grid, g, [&](double x) { return g(x) + 0.2 * x * x; });
  CHECK(r.all_passed());
}

TEST_CASE("a time step above the monotonicity bound is refused or flagged") {
  const PdeProblem p = heat(unit(0.05), [](double x) { return std::cos(M_PI * x); });
  PdeGrid grid;
  grid.intervals = 50;
  grid.dt = 3.0 * cfl_bound(p, 50, 0.0);
  try {
    solve_oblique_parabolic(p, grid);
    FAIL("expected a CFL refusal");
  } catch (const CflError& e) {
    CHECK(std::string(e.what()).find("use dt <=") != std::string::npos);
  }
  grid.allow_cfl_violation = true;
  const PropertyReport rep = check_comparison(p, grid, [](double x) { return std::cos(M_PI * x); },
                                              [](double x) { return std::cos(M_PI * x) + 1e-3 * std::sin(40 * x); });
  CHECK_FALSE(rep.at("cfl").passed);
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("boundary residual decays at second order or better") {
  PdeProblem p = heat(DomainSpec::interval(0.5, Motion::linear(0.0, 0.3), Motion::constant(1.0)),
                      [](double x) { return 1.0 + 0.5 * std::cos(2.0 * x); });
  p.boundary = polynomial_boundary(-0.2, 0.5, 0.1);
  double prev = 0.0;
  for (std::size_t M : {40, 80, 160}) {
    PdeGrid g;
    g.intervals = M;
    g.cfl_fraction = 0.4;
    const double r = boundary_residual(p, solve_oblique_parabolic(p, g));
    if (prev > 0.0) CHECK(std::log2(prev / r) >= 1.8);
    prev = r;
  }
}

TEST_CASE("problem validation") {
  const auto g = [](double) { return 0.0; };
  CHECK_THROWS_AS(validate(heat(DomainSpec::disk(1.0, Motion::constant(0), Motion::constant(0), Motion::constant(1)), g)),
                  UnsupportedError);
  PdeProblem p = heat(unit(1.0), g);
  p.op = LinearDiffusion::constant(-0.1);
  CHECK_THROWS_AS(validate(p), ParameterError);
  p = heat(unit(1.0), g);
  p.boundary = [](double, double, double r) { return -r; };
  CHECK_THROWS_AS(validate(p), ParameterError);
  CHECK_THROWS_AS(polynomial_boundary(0.0, -1.0), ParameterError);
  p = heat(unit(1.0), g);
  p.field = ReflectionField::inward_normal();
  CHECK_THROWS_AS(validate(p), ParameterError);
  p = heat(unit(1.0), g);
  p.op = LinearDiffusion::constant(0.5, 0.0, -1.0);
  CHECK_THROWS_AS(validate(p), ParameterError);
}

TEST_CASE("boundary solve reports a missing bracket") {
  PdeProblem p = heat(unit(0.01), [](double) { return 0.0; });
  p.boundary = polynomial_boundary(1e6, 1.0);
  CHECK_THROWS_AS(solve_oblique_parabolic(p, PdeGrid{}), BoundarySolveError);
}

TEST_CASE("feynman-kac harness on static intervals") {
  SdeConfig mc;
  mc.x0 = vec1(0.3);
  mc.steps = 400;
  mc.paths = 500;
  PdeGrid grid;
  grid.intervals = 100;
  const FeynmanKacResult c = feynman_kac_crosscheck(unit(0.2), 1.0, ConstantPayoff{2.5}, grid, mc);
  CHECK(c.u_mc == 2.5);
  CHECK(c.u_pde == doctest::Approx(2.5).epsilon(1e-12));

  mc.steps = 1000;
  mc.paths = 5000;
  const FeynmanKacResult r = feynman_kac_crosscheck(unit(0.2), 1.0, CosinePayoff{0, 1.0, M_PI, 0.0}, grid, mc);
  CHECK(r.u_pde == doctest::Approx(std::exp(-M_PI * M_PI * 0.1) * std::cos(M_PI * 0.3)).epsilon(1e-3));
  CHECK(r.gap <= 3.0 * r.stderr_ + 5e-3);
  CHECK_THROWS_AS(feynman_kac_crosscheck(DomainSpec::disk(0.2, Motion::constant(0), Motion::constant(0), Motion::constant(1)),
                                         1.0, ConstantPayoff{1.0}, grid, mc),
                  UnsupportedError);
}

TEST_CASE("solution table export") {
  PdeGrid g;
  g.intervals = 10;
  g.saved_levels = 3;
  const PdeSolution s = solve_oblique_parabolic(heat(unit(0.1), [](double x) { return x; }), g);
  CHECK(s.times.size() == 3);
  CHECK(s.times.back() == 0.1);
  std::stringstream ss;
  write_solution_csv(ss, s);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t,xi,x,u");
}
