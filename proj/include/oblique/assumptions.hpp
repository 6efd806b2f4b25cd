#pragma once

#include <cstddef>
#include <cstdint>

#include "oblique/domain.hpp"
#include "oblique/field.hpp"
#include "oblique/report.hpp"

namespace oblique {

/// Declared constants of the geometric assumptions: cone opening rho,
/// obliqueness theta with locality radius delta, temporal Hölder constant K.
/// rho is a single constant over [0, T].
struct ConeCertificate {
  double rho = 0.5;
  double theta = 0.9;
  double delta = 0.1;
  double holder_k = 1.0;
};

struct SampleBudget {
  std::size_t boundary_points = 1000;
  std::size_t time_pairs = 1000;
  std::uint64_t seed = 1;
  /// Mollifier width used for the empirical kappa.
  double mollifier_width = 1e-3;
  double cone_tolerance = 1e-9;
};

/// Sampled verification of the exterior (and interior) cone conditions,
/// the obliqueness constant, the temporal Hölder-1/2 regularity of d, and
/// the mollified inequality <grad v_beta, gamma> <= -kappa d_beta.
/// Never throws on a failed property: failures are report rows.
PropertyReport verify_assumptions(const DomainSpec& domain, const ReflectionField& field, const ConeCertificate& cert,
                                  const SampleBudget& budget);

/// Log-log least-squares fit y = c * x^p; returns {p, c}. Pairs with a
/// nonpositive coordinate are skipped.
std::pair<double, double> fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oblique
