#include "oblique/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oblique/errors.hpp"
#include "oblique/mollify.hpp"
#include "oblique/random.hpp"

namespace oblique {

std::pair<double, double> fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return {slope, std::exp(intercept)};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Worst {
  double value = -kInf;
  double t = 0.0;
  Vec x;
  void offer(double v, double tt, const Vec& xx) {
    if (v > value) {
      value = v;
      t = tt;
      x = xx;
    }
  }
  std::vector<std::pair<std::string, double>> where() const {
    std::vector<std::pair<std::string, double>> out{{"worst_t", t}};
    for (int i = 0; i < x.size(); ++i) out.emplace_back("worst_x" + std::to_string(i), x(i));
    return out;
  }
};

void cone_rows(PropertyReport& report, const DomainSpec& domain, const ReflectionField& field,
               const ConeCertificate& cert, const SampleBudget& budget) {
  RngStream rng(budget.seed, 11);
  const double T = domain.horizon();
  Worst exterior, interior, oblique;
  std::size_t samples = 0, region_failures = 0;
  const int zetas = 8;
  for (std::size_t i = 0; i < budget.boundary_points; ++i) {
    // Include the endpoints of the time interval and a sweep of boundary
    // parameters so corners are hit deterministically.
    const double t = i < 2 ? T * static_cast<double>(i) : rng.uniform(0.0, T);
    const double u = budget.boundary_points > 1 ? static_cast<double>(i) / static_cast<double>(budget.boundary_points)
                                                : 0.0;
    const Vec x = boundary_point(domain, t, u);
    Vec g;
    try {
      g = gamma(field, domain, t, x);
    } catch (const RegionError&) {
      ++region_failures;
      exterior.offer(kInf, t, x);
      continue;
    }
    // A linear ladder plus a geometric one: corner violations live at small zeta.
    for (int k = 1; k <= zetas + 21; ++k) {
      const double zeta = k <= zetas ? cert.rho * k / zetas : cert.rho * std::ldexp(1.0, -(k - zetas + 3));
      exterior.offer(zeta * cert.rho - distance(domain, t, x - zeta * g), t, x);
      interior.offer(signed_distance(domain, t, x + zeta * g) + zeta * cert.rho, t, x);
      ++samples;
    }
    // Obliqueness: <y - x, gamma> >= -theta |y - x| for nearby y in the closure.
    for (int k = 0; k < 4; ++k) {
      Vec dir(domain.dimension());
      for (int c = 0; c < dir.size(); ++c) dir(c) = rng.normal();
      dir.normalize();
      const Vec y = x + cert.delta * rng.uniform() * dir;
      if (distance(domain, t, y) > 0.0) continue;
      const Vec yx = y - x;
      oblique.offer(-cert.theta * yx.norm() - yx.dot(g), t, x);
    }
  }
  std::string note = region_failures ? std::to_string(region_failures) + " boundary samples outside the field region"
                                     : std::string{};
  auto ext = exterior.where();
  ext.emplace_back("rho", cert.rho);
  report.add("cone_exterior", samples, std::max(exterior.value, 0.0), budget.cone_tolerance, ext, note);
  report.add("cone_interior", samples, std::max(interior.value, 0.0), budget.cone_tolerance, interior.where());
  auto obl = oblique.where();
  obl.emplace_back("theta", cert.theta);
  obl.emplace_back("delta", cert.delta);
  // The interior-cone argument needs theta^2 > 1 - rho^2 for the declared constant rho.
  const double theta_gap = 1.0 - cert.rho * cert.rho - cert.theta * cert.theta;
  obl.emplace_back("theta_sq_minus_one_minus_rho_sq", -theta_gap);
  report.add("obliqueness_theta", budget.boundary_points, std::max({oblique.value, theta_gap, 0.0}),
             budget.cone_tolerance, obl);
}

void holder_row(PropertyReport& report, const DomainSpec& domain, const ConeCertificate& cert,
                const SampleBudget& budget) {
  RngStream rng(budget.seed, 12);
  const double T = domain.horizon();
  const int lags = 12;
  const std::size_t starts = std::max<std::size_t>(budget.time_pairs / lags, 4);
  const int xs = 16;
  std::vector<double> hs, sups;
  double worst_ratio = 0.0;
  std::size_t samples = 0;
  for (int j = 1; j <= lags; ++j) {
    const double h = T * std::pow(2.0, -j);
    double sup = 0.0;
    for (std::size_t s_i = 0; s_i < starts; ++s_i) {
      const double s = s_i == 0 ? 0.0 : rng.uniform(0.0, T - h);
      for (int k = 0; k < xs; ++k) {
        const double u = (k + 0.5) / xs;
        // A far exterior point (d moves with the whole boundary) and a
        // boundary point (d moves with the local boundary displacement).
        const Vec b = boundary_point(domain, s, u);
        const Vec c = interior_point(domain, s, u, 1.0);
        Vec out = b - c;
        if (out.norm() > 0) out.normalize();
        const Vec far = b + (domain.bounding_radius() + 1.0) * out;
        for (const Vec& x : {b, far}) {
          sup = std::max(sup, std::abs(distance(domain, s, x) - distance(domain, s + h, x)));
          ++samples;
        }
      }
    }
    hs.push_back(h);
    sups.push_back(sup);
    worst_ratio = std::max(worst_ratio, sup / std::sqrt(h));
  }
  const auto [exponent, constant] = fit_power_law(hs, sups);
  report.add("temporal_holder", samples, worst_ratio - cert.holder_k, 0.0,
             {{"fitted_exponent", exponent}, {"fitted_constant", constant}, {"max_ratio_to_sqrt_lag", worst_ratio},
              {"declared_K", cert.holder_k}});
}

void kappa_row(PropertyReport& report, const DomainSpec& domain, const ReflectionField& field,
               const SampleBudget& budget) {
  RngStream rng(budget.seed, 13);
  const double T = domain.horizon();
  const double beta = budget.mollifier_width;
  double kappa = kInf;
  std::size_t samples = 0;
  for (std::size_t i = 0; i < budget.boundary_points; ++i) {
    const double t = rng.uniform(0.0, T);
    const Vec b = boundary_point(domain, t, rng.uniform());
    Vec out = -inward_normal(domain, t, b);
    const Vec x = b + (2.0 * beta * rng.uniform() + 1e-3 * beta) * out;
    if (distance(domain, t, x) <= 0.0) continue;
    const MollifiedDistance m = mollified_distance(domain, t, x, beta);
    if (!(m.d_beta > 0.0)) continue;
    Vec g;
    try {
      g = gamma(field, domain, t, x);
    } catch (const RegionError&) {
      continue;
    }
    kappa = std::min(kappa, -m.grad_v_beta.dot(g) / m.d_beta);
    ++samples;
  }
  report.add("mollified_kappa", samples, samples ? -kappa : kInf, -1e-12,
             {{"empirical_kappa", kappa}, {"beta", beta}});
}

}  // namespace

PropertyReport verify_assumptions(const DomainSpec& domain, const ReflectionField& field, const ConeCertificate& cert,
                                  const SampleBudget& budget) {
  PropertyReport report;
  report.name = "verify-domain";
  cone_rows(report, domain, field, cert, budget);
  holder_row(report, domain, cert, budget);
  kappa_row(report, domain, field, budget);
  return report;
}

}  // namespace oblique
