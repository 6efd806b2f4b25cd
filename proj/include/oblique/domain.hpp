#pragma once

#include <variant>
#include <vector>

#include "oblique/motion.hpp"
#include "oblique/types.hpp"

namespace oblique {

/// Omega_t = (lower(t), upper(t)).
struct MovingInterval {
  Motion lower;
  Motion upper;
};

/// Omega_t = open disk of radius r(t) around (cx(t), cy(t)).
struct MovingDisk {
  Motion cx;
  Motion cy;
  Motion radius;
};

/// Omega_t = c(t) + r(t) * P for a fixed convex polygon P (vertices in
/// counter-clockwise order). Corners make the time sections non-smooth.
struct MovingScaledPolygon {
  MovingScaledPolygon(Motion cx_, Motion cy_, Motion scale_, std::vector<Eigen::Vector2d> base_);

  Motion cx;
  Motion cy;
  Motion scale;
  std::vector<Eigen::Vector2d> base;
  /// Unit outward normal of edge i (from vertex i to i+1) and its support
  /// value <normal_i, base_i>, so that x is inside iff <normal_i, x> < offset_i.
  std::vector<Eigen::Vector2d> normals;
  std::vector<double> offsets;
};

using Shape = std::variant<MovingInterval, MovingDisk, MovingScaledPolygon>;

/// A time-dependent domain on [0, horizon]. Immutable after construction.
class DomainSpec {
 public:
  DomainSpec(double horizon, Shape shape);

  static DomainSpec interval(double horizon, Motion lower, Motion upper);
  static DomainSpec disk(double horizon, Motion cx, Motion cy, Motion radius);
  static DomainSpec polygon(double horizon, Motion cx, Motion cy, Motion scale,
                            std::vector<Eigen::Vector2d> base);
  /// [lower(t), lower(t) + width]: a bounded stand-in for the half-line.
  static DomainSpec half_line(double horizon, Motion lower, double width = 1.0e3);

  double horizon() const { return horizon_; }
  int dimension() const { return dimension_; }
  const Shape& shape() const { return shape_; }

  /// Largest |x| over the closure of the domain on [0, T] (sampled).
  double bounding_radius() const { return bounding_radius_; }
  /// Smallest width (interval) or inradius (disk, polygon) over [0, T] (sampled).
  double min_width() const { return min_width_; }
  /// Sup of the normal boundary speed over [0, T] (sampled); infinite for
  /// square-root motions.
  double max_boundary_speed() const { return max_boundary_speed_; }

  /// Throws DomainError if t is outside [0, T].
  void check_time(double t) const;

  /// Same domain with time reversed: Omega~_s = Omega_{T-s}.
  DomainSpec time_reversed() const;

 private:
  double horizon_;
  Shape shape_;
  int dimension_;
  double bounding_radius_ = 0.0;
  double min_width_ = 0.0;
  double max_boundary_speed_ = 0.0;
};

/// Euclidean distance from x to the closure of Omega_t (0 inside).
double distance(const DomainSpec& domain, double t, const Vec& x);

/// Signed distance to the boundary: negative inside, positive outside.
double signed_distance(const DomainSpec& domain, double t, const Vec& x);

/// Gradient of distance(t, .) at x; zero inside the closure.
Vec distance_gradient(const DomainSpec& domain, double t, const Vec& x);

/// Nearest point of the closure of Omega_t.
Vec project(const DomainSpec& domain, double t, const Vec& x);

/// Inward unit normal of the boundary piece nearest to x (for polygons, of
/// the nearest edge). Used by alpha profiles and samplers.
Vec inward_normal(const DomainSpec& domain, double t, const Vec& x);

/// Boundary point parameterized by u in [0, 1): the two interval endpoints
/// (u < 1/2 lower), the circle by angle, the polygon by arclength fraction.
Vec boundary_point(const DomainSpec& domain, double t, double u);

/// Interior point parameterized by u in [0,1)^2; `depth` in [0,1] runs from
/// the boundary (0) to the center (1).
Vec interior_point(const DomainSpec& domain, double t, double u, double depth);

}  // namespace oblique
