#pragma once

#include "oblique/domain.hpp"

namespace oblique {

/// Spatial convolutions of d and v = d^2 with a compactly supported
/// polynomial bump of radius beta.
struct MollifiedDistance {
  double d_beta = 0.0;
  double v_beta = 0.0;
  Vec grad_v_beta;
  Vec grad_d_beta;
};

/// Fixed-order quadrature over the mollifier ball: 8 Gauss-Legendre nodes
/// per axis in 1D, 8 radial x 8 angular nodes in 2D. The discrete weights
/// sum to one exactly, so |d_beta - d| <= beta holds at every point.
MollifiedDistance mollified_distance(const DomainSpec& domain, double t, const Vec& x, double beta);

/// The normalized bump phi(z) = c (1 - |z|^2 / beta^2)^3 on the ball of radius beta.
double mollifier(const Vec& z, double beta);

}  // namespace oblique
