#include <cmath>

#include "doctest.h"
#include "oblique/assumptions.hpp"
#include "oblique/domain.hpp"
#include "oblique/errors.hpp"
#include "oblique/field.hpp"
#include "oblique/mollify.hpp"
#include "oblique/random.hpp"

using namespace oblique;

namespace {

DomainSpec advancing_interval() { return DomainSpec::interval(2.0, Motion::linear(0.0, 1.0), Motion::linear(2.0, 1.0)); }

DomainSpec shrinking_disk() {
  return DomainSpec::disk(2.0, Motion::constant(0.0), Motion::constant(0.0), Motion::linear(1.0, -0.25));
}

DomainSpec unit_square(double horizon = 1.0) {
  return DomainSpec::polygon(horizon, Motion::constant(0.5), Motion::constant(0.5), Motion::constant(1.0),
                             {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
}

DomainSpec breathing_hexagon() {
  std::vector<Eigen::Vector2d> base;
  for (int k = 0; k < 6; ++k) base.emplace_back(std::cos(k * M_PI / 3), std::sin(k * M_PI / 3));
  return DomainSpec::polygon(1.0, Motion::sine(0.1, 2.0, 0.0, 0.0, 1.0), Motion::constant(0.0),
                             Motion::sine(0.1, 3.0, 0.0, 1.0, 1.0), base);
}

Vec random_point(RngStream& rng, int n, double r) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-r, r);
  return v;
}

}  // namespace

TEST_CASE("interval distance closed forms") {
  const DomainSpec d = advancing_interval();
  CHECK(distance(d, 0.5, vec1(1.7)) == 0.0);
  CHECK(distance(d, 0.5, vec1(0.2)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(distance(d, 0.5, vec1(3.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(signed_distance(d, 0.5, vec1(1.5)) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(distance(d, 2.5, vec1(0.0)), DomainError);
  CHECK_THROWS_AS(distance(d, -0.1, vec1(0.0)), DomainError);
}

TEST_CASE("disk distance closed form") {
  CHECK(distance(shrinking_disk(), 1.0, vec2(1.5, 0.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(distance(shrinking_disk(), 1.0, vec2(0.3, 0.2)) == 0.0);
}

TEST_CASE("polygon distance and construction") {
  const DomainSpec sq = unit_square();
  CHECK(distance(sq, 0.5, vec2(0.5, 0.5)) == 0.0);
  CHECK(distance(sq, 0.5, vec2(1.5, 0.5)) == doctest::Approx(0.5));
  CHECK(distance(sq, 0.5, vec2(2.0, 2.0)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(signed_distance(sq, 0.5, vec2(0.5, 0.4)) == doctest::Approx(-0.4));
  CHECK_THROWS_AS(DomainSpec::polygon(1.0, Motion::constant(0), Motion::constant(0), Motion::constant(1),
                                      {{0, 0}, {0, 1}, {1, 1}, {1, 0}}),
                  ParameterError);
}

TEST_CASE("distance is 1-Lipschitz, zero on the closure, positive outside") {
  RngStream rng(3, 0);
  for (const DomainSpec& d : {advancing_interval(), shrinking_disk(), unit_square(), breathing_hexagon()}) {
    const int n = d.dimension();
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double t = rng.uniform(0.0, d.horizon());
      const Vec x = random_point(rng, n, 3.0), y = random_point(rng, n, 3.0);
      worst = std::max(worst, std::abs(distance(d, t, x) - distance(d, t, y)) - (x - y).norm());
      const Vec z = interior_point(d, t, rng.uniform(), rng.uniform());
      CHECK(distance(d, t, z) == 0.0);
      const Vec b = boundary_point(d, t, rng.uniform());
      CHECK(distance(d, t, b) <= 1e-12);
      const Vec out = b - 1e-3 * inward_normal(d, t, b);
      CHECK(distance(d, t, out) > 0.0);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("gamma examples") {
  const DomainSpec disk = shrinking_disk();
  const Vec e = vec2(0.0, 1.0);
  const Vec g0 = gamma(ReflectionField::constant(e), unit_square(), 0.3, vec2(0.1, 0.7));
  CHECK(g0(0) == 0.0);
  CHECK(g0(1) == 1.0);
  const Vec g1 = gamma(ReflectionField::inward_normal(1e-4), disk, 1.0, vec2(0.75, 0.0));
  CHECK(std::abs(g1(0) + 1.0) <= 1e-8);
  CHECK(std::abs(g1(1)) <= 1e-8);
  const Vec g2 = gamma(ReflectionField::rotated(M_PI / 6, 1e-4), disk, 1.0, vec2(0.75, 0.0));
  CHECK(g2(0) == doctest::Approx(-std::cos(M_PI / 6)).epsilon(1e-12));
  CHECK(g2(1) == doctest::Approx(std::sin(M_PI / 6)).epsilon(1e-12));
  const Vec g3 = gamma(ReflectionField::inward_normal().outward(), disk, 1.0, vec2(0.75, 0.0));
  CHECK(g3(0) == doctest::Approx(1.0));
}

TEST_CASE("gamma field errors") {
  CHECK_THROWS_AS(ReflectionField::constant(vec2(1.0, 1.0)), ParameterError);
  CHECK_THROWS_AS(ReflectionField::inward_normal(0.0), ParameterError);
  CHECK_THROWS_AS(ReflectionField::rotated(2.0), ParameterError);
  const DomainSpec d = advancing_interval();
  CHECK_THROWS_AS(gamma(ReflectionField::inward_normal(), d, 0.0, vec1(1.0)), RegionError);
  CHECK_THROWS_AS(gamma(ReflectionField::inward_normal(1e-2, 0.1), shrinking_disk(), 0.0, vec2(0.5, 0.0)), RegionError);
}

TEST_CASE("gamma is unit and its jet matches finite differences") {
  RngStream rng(5, 0);
  struct Case {
    DomainSpec d;
    ReflectionField f;
  };
  const std::vector<Case> cases{{advancing_interval(), ReflectionField::inward_normal()},
                                {shrinking_disk(), ReflectionField::inward_normal()},
                                {shrinking_disk(), ReflectionField::rotated(0.3)},
                                {unit_square(), ReflectionField::inward_normal(0.05)},
                                {breathing_hexagon(), ReflectionField::rotated(-0.2, 0.05)}};
  for (const Case& c : cases) {
    const int n = c.d.dimension();
    double worst_unit = 0.0, worst_fd = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double t = rng.uniform(0.01, c.d.horizon() - 0.01);
      const Vec x = interior_point(c.d, t, rng.uniform(), 0.4 * rng.uniform());
      const FieldJet j = gamma_jet(c.f, c.d, t, x);
      worst_unit = std::max(worst_unit, std::abs(gamma(c.f, c.d, t, x).norm() - 1.0));
      CHECK((j.value - gamma(c.f, c.d, t, x)).norm() <= 1e-14);
      const double h = 1e-6;
      const Vec dt = (gamma(c.f, c.d, t + h, x) - gamma(c.f, c.d, t - h, x)) / (2 * h);
      double scale = 1.0 + j.jac.norm();
      worst_fd = std::max(worst_fd, (dt - j.dt).norm() / (1.0 + j.dt.norm()));
      for (int k = 0; k < n; ++k) {
        Vec e = Vec::Zero(n);
        e(k) = h;
        const FieldJet jp = gamma_jet(c.f, c.d, t, Vec(x + e)), jm = gamma_jet(c.f, c.d, t, Vec(x - e));
        worst_fd = std::max(worst_fd, (Vec((jp.value - jm.value) / (2 * h)) - Vec(j.jac.col(k))).norm() / scale);
        for (int comp = 0; comp < n; ++comp) {
          const Vec fd = (jp.jac.row(comp) - jm.jac.row(comp)).transpose() / (2 * h);
          const Vec an = j.hess[comp].col(k);
          worst_fd = std::max(worst_fd, (fd - an).norm() / (1.0 + j.hess[comp].norm()));
        }
      }
    }
    CHECK(worst_unit <= 1e-12);
    CHECK(worst_fd <= 1e-6);
  }
}

TEST_CASE("mollified distance") {
  const DomainSpec d = DomainSpec::interval(1.0, Motion::constant(0.0), Motion::constant(2.0));
  const MollifiedDistance m = mollified_distance(d, 0.0, vec1(-0.5), 0.01);
  CHECK(std::abs(m.d_beta - 0.5) <= 1e-4);
  // Dense midpoint-rule oracle of the same convolution.
  double oracle = 0.0, mass = 0.0;
  const int k = 200000;
  for (int i = 0; i < k; ++i) {
    const double z = -0.01 + 0.02 * (i + 0.5) / k;
    const double w = std::pow(1.0 - z * z / 1e-4, 3);
    oracle += w * distance(d, 0.0, vec1(-0.5 - z));
    mass += w;
  }
  CHECK(std::abs(m.d_beta - oracle / mass) <= 1e-12);

  const MollifiedDistance inside = mollified_distance(d, 0.0, vec1(1.0), 0.1);
  CHECK(inside.d_beta == 0.0);
  CHECK(inside.v_beta == 0.0);
  CHECK(inside.grad_v_beta.norm() == 0.0);
  CHECK_THROWS_AS(mollified_distance(d, 0.0, vec1(1.0), 0.0), ParameterError);

  RngStream rng(9, 0);
  for (const DomainSpec& dom : {d, shrinking_disk(), unit_square()}) {
    for (int i = 0; i < 2000; ++i) {
      const double t = rng.uniform(0.0, dom.horizon());
      const Vec x = random_point(rng, dom.dimension(), 2.0);
      for (double beta : {0.05, 0.1}) {
        CHECK(std::abs(mollified_distance(dom, t, x, beta).d_beta - distance(dom, t, x)) <= beta);
      }
    }
  }
}

TEST_CASE("verify_assumptions: disk with inward normal") {
  const DomainSpec disk = shrinking_disk();
  const PropertyReport r =
      verify_assumptions(disk, ReflectionField::inward_normal(), ConeCertificate{0.9, 0.5, 0.1, 1.0}, SampleBudget{});
  CHECK(r.at("cone_exterior").passed);
  CHECK(r.at("cone_exterior").worst_violation == 0.0);
  // The interior cone of opening 0.9 does not fit once the radius drops to 0.5.
  CHECK_FALSE(r.at("cone_interior").passed);
  const PropertyReport r2 =
      verify_assumptions(disk, ReflectionField::inward_normal(), ConeCertificate{0.45, 0.9, 0.1, 1.0}, SampleBudget{});
  CHECK(r2.at("cone_interior").passed);
  CHECK(r.at("obliqueness_theta").passed);
  CHECK(r.at("temporal_holder").passed);
  CHECK(r.at("mollified_kappa").passed);
  CHECK(r.at("mollified_kappa").constant("empirical_kappa") > 0.0);
}

TEST_CASE("verify_assumptions: square-root barrier Hölder exponent") {
  const DomainSpec d = DomainSpec::interval(1.0, Motion::square_root(0.3), Motion::constant(2.0));
  const PropertyReport r = verify_assumptions(d, ReflectionField::inward_normal(), ConeCertificate{0.5, 0.9, 0.1, 0.31},
                                              SampleBudget{});
  const double p = r.at("temporal_holder").constant("fitted_exponent");
  CHECK(p >= 0.45);
  CHECK(p <= 0.55);
  CHECK(r.at("temporal_holder").passed);
}

TEST_CASE("verify_assumptions: unit square cone condition") {
  const DomainSpec sq = unit_square();
  SampleBudget budget;
  const ConeCertificate loose{0.3, 0.96, 0.1, 1.0};
  const PropertyReport ok = verify_assumptions(sq, ReflectionField::inward_normal(0.02), loose, budget);
  CHECK(ok.at("cone_exterior").passed);
  CHECK(ok.at("mollified_kappa").passed);

  const PropertyReport tight = verify_assumptions(sq, ReflectionField::inward_normal(0.02),
                                                  ConeCertificate{0.95, 0.5, 0.1, 1.0}, budget);
  const PropertyRow& row = tight.at("cone_exterior");
  CHECK_FALSE(row.passed);
  // The worst point sits next to a corner.
  const double cx = row.constant("worst_x0"), cy = row.constant("worst_x1");
  const double corner = std::min({std::hypot(cx, cy), std::hypot(cx - 1, cy), std::hypot(cx, cy - 1), std::hypot(cx - 1, cy - 1)});
  CHECK(corner < 0.1);

  // A constant upward field is tangent to the side faces and points out of
  // the top face: the whole cone axis stays in the closure there.
  const PropertyReport up = verify_assumptions(sq, ReflectionField::constant(vec2(0.0, 1.0)), loose, budget);
  CHECK_FALSE(up.at("cone_exterior").passed);
  CHECK(up.at("cone_exterior").worst_violation == doctest::Approx(0.09));
}
