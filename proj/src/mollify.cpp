#include "oblique/mollify.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "oblique/errors.hpp"

namespace oblique {

namespace {

constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

double bump(double s2) { return s2 < 1.0 ? (1.0 - s2) * (1.0 - s2) * (1.0 - s2) : 0.0; }

struct Rule {
  std::vector<Vec> nodes;  // on the unit ball
  std::vector<double> weights;
};

Rule make_rule(int dim) {
  Rule rule;
  if (dim == 1) {
    for (int i = 0; i < 8; ++i) {
      rule.nodes.push_back(vec1(kGaussNodes[i]));
      rule.weights.push_back(kGaussWeights[i] * bump(kGaussNodes[i] * kGaussNodes[i]));
    }
  } else {
    for (int i = 0; i < 8; ++i) {
      const double r = 0.5 * (kGaussNodes[i] + 1.0);
      const double wr = 0.5 * kGaussWeights[i] * r * bump(r * r);
      for (int j = 0; j < 8; ++j) {
        const double a = 2.0 * std::numbers::pi * (j + 0.5) / 8.0;
        rule.nodes.push_back(vec2(r * std::cos(a), r * std::sin(a)));
        rule.weights.push_back(wr);
      }
    }
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

const Rule& rule_for(int dim) {
  static const Rule one = make_rule(1);
  static const Rule two = make_rule(2);
  if (dim == 1) return one;
  if (dim == 2) return two;
  throw UnsupportedError("mollified distance supports dimensions 1 and 2");
}

}  // namespace

double mollifier(const Vec& z, double beta) {
  if (!(beta > 0.0)) throw ParameterError("mollifier width must be positive");
  const int n = static_cast<int>(z.size());
  // Normalizing constants of (1 - s^2)^3 on the unit ball: 32/35 in 1D, pi/4 in 2D.
  const double mass = n == 1 ? 32.0 / 35.0 : std::numbers::pi / 4.0;
  return bump(z.squaredNorm() / (beta * beta)) / (mass * std::pow(beta, n));
}

MollifiedDistance mollified_distance(const DomainSpec& domain, double t, const Vec& x, double beta) {
  if (!(beta > 0.0)) throw ParameterError("mollified distance: beta must be positive");
  const Rule& rule = rule_for(domain.dimension());
  MollifiedDistance out;
  out.grad_v_beta = Vec::Zero(x.size());
  out.grad_d_beta = Vec::Zero(x.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vec y = x - beta * rule.nodes[i];
    const double d = distance(domain, t, y);
    if (d == 0.0) continue;
    const Vec g = distance_gradient(domain, t, y);
    const double w = rule.weights[i];
    out.d_beta += w * d;
    out.v_beta += w * d * d;
    out.grad_d_beta += w * g;
    out.grad_v_beta += (2.0 * w * d) * g;
  }
  return out;
}

}  // namespace oblique
