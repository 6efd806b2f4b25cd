#include "oblique/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "oblique/errors.hpp"

namespace oblique {

namespace {

constexpr int kGeometrySamples = 1024;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::Vector2d center_of(const MovingDisk& s, double t) { return {s.cx.value(t), s.cy.value(t)}; }
Eigen::Vector2d center_of(const MovingScaledPolygon& s, double t) { return {s.cx.value(t), s.cy.value(t)}; }

Eigen::Vector2d centroid(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

Eigen::Vector2d closest_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double s = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return a + s * ab;
}

/// Face function max_i(<n_i, q> - h_i) in base coordinates and its argmax.
std::pair<double, std::size_t> max_face(const MovingScaledPolygon& s, const Eigen::Vector2d& q) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.normals.size(); ++i) {
    const double l = s.normals[i].dot(q) - s.offsets[i];
    if (l > best) {
      best = l;
      arg = i;
    }
  }
  return {best, arg};
}

/// Closest boundary point in base coordinates.
Eigen::Vector2d closest_boundary(const MovingScaledPolygon& s, const Eigen::Vector2d& q) {
  const std::size_t n = s.base.size();
  Eigen::Vector2d best = s.base[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d c = closest_on_segment(q, s.base[i], s.base[(i + 1) % n]);
    const double d = (q - c).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Eigen::Vector2d as2(const Vec& x) { return {x(0), x(1)}; }

Vec from2(const Eigen::Vector2d& v) { return vec2(v.x(), v.y()); }

void check_dim(const DomainSpec& domain, const Vec& x) {
  if (x.size() != domain.dimension()) throw ParameterError("point dimension does not match the domain");
}

}  // namespace

MovingScaledPolygon::MovingScaledPolygon(Motion cx_, Motion cy_, Motion scale_, std::vector<Eigen::Vector2d> base_)
    : cx(std::move(cx_)), cy(std::move(cy_)), scale(std::move(scale_)), base(std::move(base_)) {
  const std::size_t n = base.size();
  if (n < 3) throw ParameterError("polygon: need at least three vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = base[(i + 1) % n] - base[i];
    const Eigen::Vector2d f = base[(i + 2) % n] - base[(i + 1) % n];
    if (e.x() * f.y() - e.y() * f.x() <= 0.0) {
      throw ParameterError("polygon: vertices must be strictly convex and counter-clockwise");
    }
    const Eigen::Vector2d nrm = Eigen::Vector2d(e.y(), -e.x()).normalized();
    normals.push_back(nrm);
    offsets.push_back(nrm.dot(base[i]));
  }
}

DomainSpec::DomainSpec(double horizon, Shape shape) : horizon_(horizon), shape_(std::move(shape)) {
  if (!(horizon_ > 0.0)) throw ParameterError("domain: horizon must be positive");
  dimension_ = std::holds_alternative<MovingInterval>(shape_) ? 1 : 2;

  double radius = 0.0;
  double width = std::numeric_limits<double>::infinity();
  double speed = 0.0;
  for (int i = 0; i <= kGeometrySamples; ++i) {
    const double t = horizon_ * i / kGeometrySamples;
    std::visit(overloaded{
                   [&](const MovingInterval& s) {
                     const double a = s.lower.value(t), b = s.upper.value(t);
                     radius = std::max({radius, std::abs(a), std::abs(b)});
                     width = std::min(width, b - a);
                     speed = std::max({speed, std::abs(s.lower.derivative(t)), std::abs(s.upper.derivative(t))});
                   },
                   [&](const MovingDisk& s) {
                     const double r = s.radius.value(t);
                     radius = std::max(radius, center_of(s, t).norm() + r);
                     width = std::min(width, r);
                     speed = std::max(speed, std::hypot(s.cx.derivative(t), s.cy.derivative(t)) +
                                                 std::abs(s.radius.derivative(t)));
                   },
                   [&](const MovingScaledPolygon& s) {
                     const double r = s.scale.value(t);
                     double vmax = 0.0, inr = std::numeric_limits<double>::infinity();
                     const Eigen::Vector2d ctr = centroid(s.base);
                     for (std::size_t k = 0; k < s.base.size(); ++k) {
                       vmax = std::max(vmax, s.base[k].norm());
                       inr = std::min(inr, s.offsets[k] - s.normals[k].dot(ctr));
                     }
                     radius = std::max(radius, center_of(s, t).norm() + r * vmax);
                     width = std::min(width, r * inr);
                     speed = std::max(speed, std::hypot(s.cx.derivative(t), s.cy.derivative(t)) +
                                                 std::abs(s.scale.derivative(t)) * vmax);
                   }},
               shape_);
  }
  if (!(width > 0.0)) throw ParameterError("domain: time sections must be nonempty (width/radius > 0)");
  bounding_radius_ = radius;
  min_width_ = width;
  max_boundary_speed_ = speed;
}

DomainSpec DomainSpec::interval(double horizon, Motion lower, Motion upper) {
  return DomainSpec(horizon, MovingInterval{std::move(lower), std::move(upper)});
}

DomainSpec DomainSpec::disk(double horizon, Motion cx, Motion cy, Motion radius) {
  return DomainSpec(horizon, MovingDisk{std::move(cx), std::move(cy), std::move(radius)});
}

DomainSpec DomainSpec::polygon(double horizon, Motion cx, Motion cy, Motion scale, std::vector<Eigen::Vector2d> base) {
  return DomainSpec(horizon, MovingScaledPolygon(std::move(cx), std::move(cy), std::move(scale), std::move(base)));
}

DomainSpec DomainSpec::half_line(double horizon, Motion lower, double width) {
  Motion upper = lower.plus(width);
  return interval(horizon, std::move(lower), std::move(upper));
}

void DomainSpec::check_time(double t) const {
  const double slack = 1e-12 * std::max(1.0, horizon_);
  if (!(t >= -slack && t <= horizon_ + slack)) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }
}

DomainSpec DomainSpec::time_reversed() const {
  const double T = horizon_;
  return std::visit(overloaded{
                        [&](const MovingInterval& s) {
                          return interval(T, s.lower.reversed(T), s.upper.reversed(T));
                        },
                        [&](const MovingDisk& s) {
                          return disk(T, s.cx.reversed(T), s.cy.reversed(T), s.radius.reversed(T));
                        },
                        [&](const MovingScaledPolygon& s) {
                          return polygon(T, s.cx.reversed(T), s.cy.reversed(T), s.scale.reversed(T), s.base);
                        }},
                    shape_);
}

double signed_distance(const DomainSpec& domain, double t, const Vec& x) {
  domain.check_time(t);
  check_dim(domain, x);
  return std::visit(overloaded{
                        [&](const MovingInterval& s) {
                          const double a = s.lower.value(t), b = s.upper.value(t);
                          return std::max(a - x(0), x(0) - b);
                        },
                        [&](const MovingDisk& s) { return (as2(x) - center_of(s, t)).norm() - s.radius.value(t); },
                        [&](const MovingScaledPolygon& s) {
                          const double r = s.scale.value(t);
                          const Eigen::Vector2d q = (as2(x) - center_of(s, t)) / r;
                          const double face = max_face(s, q).first;
                          if (face <= 0.0) return r * face;
                          return r * (q - closest_boundary(s, q)).norm();
                        }},
                    domain.shape());
}

double distance(const DomainSpec& domain, double t, const Vec& x) {
  return std::max(0.0, signed_distance(domain, t, x));
}

Vec project(const DomainSpec& domain, double t, const Vec& x) {
  domain.check_time(t);
  check_dim(domain, x);
  return std::visit(overloaded{
                        [&](const MovingInterval& s) {
                          return vec1(std::clamp(x(0), s.lower.value(t), s.upper.value(t)));
                        },
                        [&](const MovingDisk& s) {
                          const Eigen::Vector2d c = center_of(s, t);
                          const Eigen::Vector2d v = as2(x) - c;
                          const double r = s.radius.value(t), n = v.norm();
                          if (n <= r) return Vec(x);
                          return from2(c + v * (r / n));
                        },
                        [&](const MovingScaledPolygon& s) {
                          const double r = s.scale.value(t);
                          const Eigen::Vector2d c = center_of(s, t);
                          const Eigen::Vector2d q = (as2(x) - c) / r;
                          if (max_face(s, q).first <= 0.0) return Vec(x);
                          return from2(c + r * closest_boundary(s, q));
                        }},
                    domain.shape());
}

Vec distance_gradient(const DomainSpec& domain, double t, const Vec& x) {
  const Vec p = project(domain, t, x);
  const Vec diff = x - p;
  const double n = diff.norm();
  if (n == 0.0) return Vec::Zero(x.size());
  return diff / n;
}

Vec inward_normal(const DomainSpec& domain, double t, const Vec& x) {
  domain.check_time(t);
  check_dim(domain, x);
  return std::visit(overloaded{
                        [&](const MovingInterval& s) {
                          const double mid = 0.5 * (s.lower.value(t) + s.upper.value(t));
                          return vec1(x(0) < mid ? 1.0 : -1.0);
                        },
                        [&](const MovingDisk& s) {
                          const Eigen::Vector2d v = as2(x) - center_of(s, t);
                          const double n = v.norm();
                          if (n == 0.0) throw RegionError("inward normal undefined at the disk center");
                          return from2(-v / n);
                        },
                        [&](const MovingScaledPolygon& s) {
                          const double r = s.scale.value(t);
                          const Eigen::Vector2d q = (as2(x) - center_of(s, t)) / r;
                          const auto [face, arg] = max_face(s, q);
                          if (face > 1e-9) {
                            const Eigen::Vector2d c = closest_boundary(s, q);
                            return from2(-(q - c).normalized());
                          }
                          return from2(-s.normals[arg]);
                        }},
                    domain.shape());
}

Vec boundary_point(const DomainSpec& domain, double t, double u) {
  domain.check_time(t);
  return std::visit(overloaded{
                        [&](const MovingInterval& s) {
                          return vec1(u < 0.5 ? s.lower.value(t) : s.upper.value(t));
                        },
                        [&](const MovingDisk& s) {
                          const double a = 2.0 * std::numbers::pi * u;
                          return from2(center_of(s, t) + s.radius.value(t) * Eigen::Vector2d(std::cos(a), std::sin(a)));
                        },
                        [&](const MovingScaledPolygon& s) {
                          const std::size_t n = s.base.size();
                          double total = 0.0;
                          for (std::size_t i = 0; i < n; ++i) total += (s.base[(i + 1) % n] - s.base[i]).norm();
                          double target = std::clamp(u, 0.0, 1.0) * total;
                          for (std::size_t i = 0; i < n; ++i) {
                            const Eigen::Vector2d e = s.base[(i + 1) % n] - s.base[i];
                            const double len = e.norm();
                            if (target <= len || i + 1 == n) {
                              const Eigen::Vector2d q = s.base[i] + std::min(target / len, 1.0) * e;
                              return from2(center_of(s, t) + s.scale.value(t) * q);
                            }
                            target -= len;
                          }
                          return from2(center_of(s, t) + s.scale.value(t) * s.base[0]);
                        }},
                    domain.shape());
}

Vec interior_point(const DomainSpec& domain, double t, double u, double depth) {
  const Vec b = boundary_point(domain, t, u);
  const Vec c = std::visit(overloaded{
                               [&](const MovingInterval& s) {
                                 return vec1(0.5 * (s.lower.value(t) + s.upper.value(t)));
                               },
                               [&](const MovingDisk& s) { return from2(center_of(s, t)); },
                               [&](const MovingScaledPolygon& s) {
                                 return from2(center_of(s, t) + s.scale.value(t) * centroid(s.base));
                               }},
                           domain.shape());
  return b + std::clamp(depth, 0.0, 1.0) * (c - b);
}

}  // namespace oblique
