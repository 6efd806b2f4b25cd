#pragma once

#include <array>
#include <limits>
#include <variant>

#include "oblique/domain.hpp"
#include "oblique/types.hpp"

namespace oblique {

/// gamma = direction everywhere.
struct ConstantOblique {
  Vec direction;
};

/// Inward unit normal, smoothed so that it is C^{1,2}: exact for intervals
/// and disks, a soft-max of edge normals with width `width` for polygons.
/// `tube` bounds the evaluation region |signed distance| <= tube.
struct InwardNormalSmoothed {
  double width = 1e-2;
  double tube = std::numeric_limits<double>::infinity();
};

/// The smoothed inward normal rotated clockwise by `angle` (2D only).
struct RotatedNormal {
  double angle = 0.0;
  double width = 1e-2;
  double tube = std::numeric_limits<double>::infinity();
};

using FieldKind = std::variant<ConstantOblique, InwardNormalSmoothed, RotatedNormal>;

/// Unit reflection field gamma(t, x). The SDE convention (inward) is the
/// default; outward() gives gamma~ = -gamma for the PDE convention.
class ReflectionField {
 public:
  explicit ReflectionField(FieldKind kind, double sign = 1.0);

  static ReflectionField constant(Vec direction);
  static ReflectionField inward_normal(double width = 1e-2, double tube = std::numeric_limits<double>::infinity());
  static ReflectionField rotated(double angle, double width = 1e-2,
                                 double tube = std::numeric_limits<double>::infinity());

  ReflectionField outward() const { return ReflectionField(kind_, -sign_); }

  const FieldKind& kind() const { return kind_; }
  double sign() const { return sign_; }

 private:
  FieldKind kind_;
  double sign_;
};

/// gamma and its derivatives at one point. hess[i](j, k) = d^2 gamma_i / dx_j dx_k.
struct FieldJet {
  Vec value;
  Vec dt;
  Mat jac;
  std::array<Mat, kMaxDim> hess;
};

/// Direction of reflection. Throws RegionError outside the evaluation region.
Vec gamma(const ReflectionField& field, const DomainSpec& domain, double t, const Vec& x);

/// Direction of reflection with first time derivative and first/second space derivatives.
FieldJet gamma_jet(const ReflectionField& field, const DomainSpec& domain, double t, const Vec& x);

}  // namespace oblique
