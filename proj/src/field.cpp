#include "oblique/field.hpp"

#include <cmath>

#include "oblique/errors.hpp"

namespace oblique {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

FieldJet zero_jet(int n) {
  FieldJet j;
  j.value = Vec::Zero(n);
  j.dt = Vec::Zero(n);
  j.jac = Mat::Zero(n, n);
  for (auto& h : j.hess) h = Mat::Zero(n, n);
  return j;
}

/// Jet of N = v / |v| given the jet of v (value, time derivative, Jacobian
/// and per-component Hessians).
FieldJet normalize_jet(const FieldJet& v) {
  const int n = static_cast<int>(v.value.size());
  const double s = v.value.norm();
  if (!(s > 1e-300)) throw RegionError("reflection field: normal direction is degenerate");
  FieldJet out = zero_jet(n);
  out.value = v.value / s;
  const Vec& N = out.value;
  // g_b = d|v|/dx_b
  const Vec g = v.jac.transpose() * N;
  out.jac = (v.jac - N * g.transpose()) / s;
  out.dt = (v.dt - N * N.dot(v.dt)) / s;
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < n; ++c) {
      double dgbc = 0.0;  // d g_b / dx_c
      for (int e = 0; e < n; ++e) dgbc += out.jac(e, c) * v.jac(e, b) + N(e) * v.hess[e](b, c);
      for (int a = 0; a < n; ++a) {
        out.hess[a](b, c) = (v.hess[a](b, c) - out.jac(a, c) * g(b) - N(a) * dgbc) / s -
                            (v.jac(a, b) - N(a) * g(b)) * g(c) / (s * s);
      }
    }
  }
  return out;
}

void scale_jet(FieldJet& j, double k) {
  j.value *= k;
  j.dt *= k;
  j.jac *= k;
  for (auto& h : j.hess) h *= k;
}

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
  return R;
}

void rotate_jet(FieldJet& j, double angle) {
  const Eigen::Matrix2d R = rotation(angle);
  const Mat Rm = R;
  j.value = Rm * j.value;
  j.dt = Rm * j.dt;
  j.jac = Rm * j.jac;
  const Mat h0 = j.hess[0], h1 = j.hess[1];
  j.hess[0] = R(0, 0) * h0 + R(0, 1) * h1;
  j.hess[1] = R(1, 0) * h0 + R(1, 1) * h1;
}

void check_tube(const DomainSpec& domain, double t, const Vec& x, double tube) {
  if (std::isfinite(tube) && std::abs(signed_distance(domain, t, x)) > tube) {
    throw RegionError("reflection field evaluated outside its tube around the boundary");
  }
}

/// Outward direction field whose normalization is the (smoothed) outward normal.
FieldJet outward_jet(const DomainSpec& domain, double t, const Vec& x, double width, bool derivatives) {
  const int n = domain.dimension();
  return std::visit(
      overloaded{
          [&](const MovingInterval& s) {
            FieldJet j = zero_jet(n);
            const double mid = 0.5 * (s.lower.value(t) + s.upper.value(t));
            if (x(0) == mid) throw RegionError("reflection field: normal undefined at the interval midpoint");
            j.value(0) = x(0) < mid ? -1.0 : 1.0;
            return j;
          },
          [&](const MovingDisk& s) {
            FieldJet j = zero_jet(n);
            j.value = vec2(x(0) - s.cx.value(t), x(1) - s.cy.value(t));
            if (derivatives) {
              j.dt = vec2(-s.cx.derivative(t), -s.cy.derivative(t));
              j.jac = Mat::Identity(2, 2);
            }
            return j;
          },
          [&](const MovingScaledPolygon& s) {
            FieldJet j = zero_jet(n);
            const std::size_t m = s.normals.size();
            const Eigen::Vector2d c(s.cx.value(t), s.cy.value(t));
            const Eigen::Vector2d p(x(0), x(1));
            const double r = s.scale.value(t);
            std::vector<double> l(m), w(m);
            double lmax = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
              l[i] = s.normals[i].dot(p - c) - r * s.offsets[i];
              lmax = std::max(lmax, l[i]);
            }
            double total = 0.0;
            for (std::size_t i = 0; i < m; ++i) total += (w[i] = std::exp((l[i] - lmax) / width));
            Eigen::Vector2d G = Eigen::Vector2d::Zero();
            for (std::size_t i = 0; i < m; ++i) G += (w[i] /= total) * s.normals[i];
            j.value = vec2(G.x(), G.y());
            if (!derivatives) return j;
            Eigen::Matrix2d H = -G * G.transpose();
            for (std::size_t i = 0; i < m; ++i) H += w[i] * s.normals[i] * s.normals[i].transpose();
            H /= width;
            j.jac = H;
            // d H_aj / dx_k
            for (int a = 0; a < 2; ++a) {
              for (int jj = 0; jj < 2; ++jj) {
                for (int k = 0; k < 2; ++k) {
                  double acc = 0.0;
                  for (std::size_t i = 0; i < m; ++i) {
                    const auto& nu = s.normals[i];
                    acc += w[i] * (nu(k) - G(k)) * nu(a) * nu(jj) / width;
                  }
                  j.hess[a](jj, k) = (acc - H(a, k) * G(jj) - G(a) * H(jj, k)) / width;
                }
              }
            }
            const Eigen::Vector2d cdot(s.cx.derivative(t), s.cy.derivative(t));
            const double rdot = s.scale.derivative(t);
            double lbar = 0.0;
            std::vector<double> ldot(m);
            for (std::size_t i = 0; i < m; ++i) {
              ldot[i] = -s.normals[i].dot(cdot) - rdot * s.offsets[i];
              lbar += w[i] * ldot[i];
            }
            Eigen::Vector2d Gdot = Eigen::Vector2d::Zero();
            for (std::size_t i = 0; i < m; ++i) Gdot += w[i] * (ldot[i] - lbar) / width * s.normals[i];
            j.dt = vec2(Gdot.x(), Gdot.y());
            return j;
          }},
      domain.shape());
}

}  // namespace

ReflectionField::ReflectionField(FieldKind kind, double sign) : kind_(std::move(kind)), sign_(sign) {
  if (sign_ != 1.0 && sign_ != -1.0) throw ParameterError("reflection field: sign must be +1 or -1");
  std::visit(overloaded{[](const ConstantOblique& c) {
                          if (c.direction.size() < 1 || std::abs(c.direction.norm() - 1.0) > 1e-12) {
                            throw ParameterError("constant field: direction must be a unit vector");
                          }
                        },
                        [](const InwardNormalSmoothed& f) {
                          if (!(f.width > 0.0)) throw ParameterError("normal field: width must be positive");
                        },
                        [](const RotatedNormal& f) {
                          if (!(f.width > 0.0)) throw ParameterError("rotated field: width must be positive");
                          if (!(std::abs(f.angle) < M_PI / 2)) {
                            throw ParameterError("rotated field: |angle| must be below pi/2");
                          }
                        }},
             kind_);
}

ReflectionField ReflectionField::constant(Vec direction) { return ReflectionField(ConstantOblique{std::move(direction)}); }

ReflectionField ReflectionField::inward_normal(double width, double tube) {
  return ReflectionField(InwardNormalSmoothed{width, tube});
}

ReflectionField ReflectionField::rotated(double angle, double width, double tube) {
  return ReflectionField(RotatedNormal{angle, width, tube});
}

FieldJet gamma_jet(const ReflectionField& field, const DomainSpec& domain, double t, const Vec& x) {
  domain.check_time(t);
  FieldJet jet = std::visit(overloaded{
                                [&](const ConstantOblique& c) {
                                  if (c.direction.size() != x.size()) {
                                    throw ParameterError("constant field: dimension mismatch");
                                  }
                                  FieldJet j = zero_jet(static_cast<int>(x.size()));
                                  j.value = c.direction;
                                  return j;
                                },
                                [&](const InwardNormalSmoothed& f) {
                                  check_tube(domain, t, x, f.tube);
                                  FieldJet j = normalize_jet(outward_jet(domain, t, x, f.width, true));
                                  scale_jet(j, -1.0);
                                  return j;
                                },
                                [&](const RotatedNormal& f) {
                                  if (domain.dimension() != 2) throw UnsupportedError("rotated field needs a 2D domain");
                                  check_tube(domain, t, x, f.tube);
                                  FieldJet j = normalize_jet(outward_jet(domain, t, x, f.width, true));
                                  scale_jet(j, -1.0);
                                  rotate_jet(j, f.angle);
                                  return j;
                                }},
                            field.kind());
  if (field.sign() < 0) scale_jet(jet, -1.0);
  return jet;
}

Vec gamma(const ReflectionField& field, const DomainSpec& domain, double t, const Vec& x) {
  domain.check_time(t);
  Vec g = std::visit(overloaded{
                         [&](const ConstantOblique& c) {
                           if (c.direction.size() != x.size()) throw ParameterError("constant field: dimension mismatch");
                           return c.direction;
                         },
                         [&](const InwardNormalSmoothed& f) {
                           check_tube(domain, t, x, f.tube);
                           const Vec v = outward_jet(domain, t, x, f.width, false).value;
                           const double s = v.norm();
                           if (!(s > 1e-300)) throw RegionError("reflection field: normal direction is degenerate");
                           return Vec(-v / s);
                         },
                         [&](const RotatedNormal& f) {
                           if (domain.dimension() != 2) throw UnsupportedError("rotated field needs a 2D domain");
                           check_tube(domain, t, x, f.tube);
                           const Vec v = outward_jet(domain, t, x, f.width, false).value;
                           const double s = v.norm();
                           if (!(s > 1e-300)) throw RegionError("reflection field: normal direction is degenerate");
                           const Mat R = rotation(f.angle);
                           return Vec(R * (-v / s));
                         }},
                     field.kind());
  return field.sign() < 0 ? Vec(-g) : g;
}

}  // namespace oblique
