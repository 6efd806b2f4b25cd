#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "oblique/domain.hpp"
#include "oblique/field.hpp"
#include "oblique/path.hpp"
#include "oblique/report.hpp"

namespace oblique {

struct PenaltyConfig {
  /// Strictly decreasing penalty parameters; default 1e-1 * 4^-k, k = 0..6.
  std::vector<double> eps_schedule = default_schedule();
  /// Stiffness safety: every Euler substep satisfies dt <= eps / eta.
  double eta = 10.0;
  double boundary_tol = 1e-3;
  double direction_tol_deg = 2.0;
  /// Largest admissible share of |lambda|(T) accumulated away from the boundary.
  double interior_fraction_tol = 1e-2;
  /// Refuses solves that would need more substeps than this.
  std::uint64_t max_substeps = 2'000'000'000ULL;

  static std::vector<double> default_schedule();
  /// Throws ParameterError unless the schedule is positive and strictly
  /// decreasing and eta >= 4.
  void validate() const;
};

struct PenaltyResult {
  SampledPath phi;
  double eps = 0.0;
  /// max over all substeps of d(t, phi_eps(t)).
  double max_distance = 0.0;
  /// max_t d(t, phi_eps)^2 / eps, so that max d = sqrt(K_T eps).
  double K_T = 0.0;
  std::uint64_t substeps = 0;
};

/// phi' = (1/eps) d(t, phi) gamma(t, phi) + psi' by explicit Euler, psi' the
/// segment slope of psi, substeps of at most eps/eta. Returns phi on psi's grid.
PenaltyResult solve_penalty(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field, double eps,
                            const PenaltyConfig& cfg = {});

struct SkorohodSolution {
  SampledPath phi;
  SampledPath lambda;
  /// Cumulative sum of |delta lambda| per node.
  std::vector<double> tv;
  /// |signed distance of phi| <= boundary_tol per node.
  std::vector<std::uint8_t> active;
  /// Penalty parameter of the accepted solve (0 for oracle solutions).
  double eps = 0.0;
};

/// Builds lambda = phi - psi, tv and activity flags.
SkorohodSolution make_solution(const SampledPath& psi, const SampledPath& phi, const DomainSpec& domain,
                               double boundary_tol);

/// Penalty solves along the schedule; returns the smallest eps whose
/// validation passes. Throws ConvergenceError with the residual trace when
/// none does.
SkorohodSolution solve(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field,
                       const PenaltyConfig& cfg = {});

/// ||f||_{s,t} = sup_{s <= t1 <= t2 <= t} |f(t2) - f(t1)| on a window.
struct ModulusRow {
  double s = 0.0, t = 0.0;
  double lambda_modulus = 0.0;
  double psi_modulus = 0.0;
  /// lambda_modulus / (psi^(1/2) + psi^(3/2) + (t - s)^(1/4)).
  double ratio = 0.0;
};

/// Windows of length T 2^-j, j = 0..7, at half-overlapping starts.
std::vector<ModulusRow> modulus_table(const SampledPath& psi, const SampledPath& lambda);

/// Rows SP1..SP5 plus `modulus_fit` (fitted R). SP4 counts increments whose
/// both end nodes are deeper inside than boundary_tol; SP5 measures angles
/// of increments with |delta lambda| > 1e-12 max(1, |lambda|(T)).
PropertyReport validate_solution(const SampledPath& psi, const SkorohodSolution& sol, const DomainSpec& domain,
                                 const ReflectionField& field, const PenaltyConfig& cfg = {});

/// lambda(t) = max(0, max_{s <= t} (a(s) - psi(s))) for the half-line
/// [a(t), inf) with normal reflection; the running max is refined on
/// `refine` subpoints per segment.
SkorohodSolution half_line_oracle(const SampledPath& psi, const std::function<double(double)>& a, int refine = 16);

/// Columns t, phi1..n, lambda1..n, tv.
void write_solution_csv(std::ostream& out, const SkorohodSolution& sol);

}  // namespace oblique
