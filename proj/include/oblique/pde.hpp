#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "oblique/domain.hpp"
#include "oblique/field.hpp"
#include "oblique/report.hpp"
#include "oblique/rsde.hpp"

namespace oblique {

using ScalarField = std::function<double(double t, double x)>;

/// F(t, x, r, p, X) = -a X - mu p + lambda r.
struct LinearDiffusion {
  ScalarField diffusivity;
  ScalarField drift;
  double lambda = 1e-12;

  static LinearDiffusion constant(double a, double mu = 0.0, double lambda = 1e-12);
};

/// F = max_i F_i.
struct MaxOfLinear {
  std::vector<LinearDiffusion> terms;
};

using PdeOperator = std::variant<LinearDiffusion, MaxOfLinear>;

/// f(t, x, r), nondecreasing in r.
using BoundaryDatum = std::function<double(double t, double x, double r)>;

BoundaryDatum neumann();
/// f = offset + slope r + cubic r^3 with slope, cubic >= 0.
BoundaryDatum polynomial_boundary(double offset, double slope, double cubic = 0.0);

/// u_t + F(t, x, u, Du, D^2u) = 0 in Omega_t, <gamma~, Du> + f = 0 on the
/// boundary, u(0, .) = g. MovingInterval domains only.
struct PdeProblem {
  DomainSpec domain;
  PdeOperator op;
  BoundaryDatum boundary = neumann();
  /// Outward field gamma~ (PDE convention).
  ReflectionField field = ReflectionField::inward_normal().outward();
  std::function<double(double x)> initial;
};

/// Throws UnsupportedError for non-interval domains and ParameterError when
/// a sampled diffusivity is negative, f decreases in r, lambda < 0 or the
/// field does not point out of either end. Lambdas below 1e-12 are clamped.
void validate(const PdeProblem& problem);

struct PdeGrid {
  /// Spatial intervals on xi in [0, 1].
  std::size_t intervals = 200;
  /// Time step; 0 picks cfl_fraction times the smallest sampled bound.
  double dt = 0.0;
  double cfl_fraction = 0.5;
  /// Steps anyway when the bound fails (negative controls).
  bool allow_cfl_violation = false;
  /// Stored time levels (the last level is always stored).
  std::size_t saved_levels = 101;
};

/// Largest stable dt at time t: every node satisfies
/// dt (2 a / (L h)^2 + |mu + a' + xi L'| / (L h) + lambda) <= 1.
double cfl_bound(const PdeProblem& problem, std::size_t intervals, double t);

struct PdeSolution {
  Eigen::VectorXd xi;
  std::vector<double> times;
  /// Row k: physical nodes / values at times[k].
  Eigen::MatrixXd x;
  Eigen::MatrixXd u;
  double dt = 0.0;
  std::size_t steps = 0;
  /// max over levels of dt / cfl_bound.
  double max_cfl_ratio = 0.0;

  /// Linear interpolation at the final level.
  double final_value(double x) const;
};

/// Explicit upwind scheme in mapped coordinates xi = (x - a) / (b - a).
/// Boundary nodes use a centred ghost value from the oblique condition, with
/// f taken at the new boundary value (bisection on a bracket, 60 steps).
/// Throws CflError (with a suggested dt) unless allow_cfl_violation and
/// BoundarySolveError when the bracket does not straddle the root.
PdeSolution solve_oblique_parabolic(const PdeProblem& problem, const PdeGrid& grid);

/// |<gamma~, Du> + f| at both ends of the final level, Du by a four-point
/// one-sided difference.
double boundary_residual(const PdeProblem& problem, const PdeSolution& sol);

/// Rows initial_order, cfl and comparison (max (u - v)^+ over all nodes and
/// levels); constant min_margin = min (v - u) at T.
PropertyReport check_comparison(const PdeProblem& problem, const PdeGrid& grid, const std::function<double(double)>& u0,
                                const std::function<double(double)>& v0, double tolerance = 1e-12);

struct FeynmanKacResult {
  double u_pde = 0.0;
  double u_mc = 0.0;
  double gap = 0.0;
  double stderr_ = 0.0;
  std::size_t paths = 0;
  std::size_t failed = 0;
};

/// u_t = sigma^2/2 u_xx with homogeneous Neumann data from g, against
/// E g(X~_T) for normally reflected sigma W in the time-reversed domain
/// started at mc.x0. Drift and diffusion of `mc` are ignored.
FeynmanKacResult feynman_kac_crosscheck(const DomainSpec& domain, double sigma, const Payoff& g, const PdeGrid& grid,
                                        const SdeConfig& mc);

/// Columns t, xi, x, u.
void write_solution_csv(std::ostream& out, const PdeSolution& sol);

}  // namespace oblique
