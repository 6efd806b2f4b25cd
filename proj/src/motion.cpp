#include "oblique/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oblique/errors.hpp"

namespace oblique {

Motion::Motion(std::vector<double> knots, std::vector<Coefficients> coefficients, double sqrt_scale)
    : knots_(std::move(knots)), coeffs_(std::move(coefficients)), sqrt_scale_(sqrt_scale) {
  if (knots_.size() < 2 || coeffs_.size() + 1 != knots_.size()) {
    throw ParameterError("motion: need K+1 knots for K coefficient rows");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) throw ParameterError("motion: knots must be strictly increasing");
  }
}

Motion Motion::constant(double value) { return polynomial({value}); }

Motion Motion::linear(double value, double slope) { return polynomial({value, slope}); }

Motion Motion::polynomial(const std::vector<double>& c) {
  if (c.empty() || c.size() > 4) throw ParameterError("motion: polynomial needs 1..4 coefficients");
  Coefficients row{0.0, 0.0, 0.0, 0.0};
  std::copy(c.begin(), c.end(), row.begin());
  return Motion({0.0, 1.0}, {row});
}

Motion Motion::hermite(const std::vector<double>& knots, const std::vector<double>& values,
                       const std::vector<double>& derivatives) {
  if (knots.size() != values.size() || knots.size() != derivatives.size()) {
    throw ParameterError("motion: hermite needs matching knots, values and derivatives");
  }
  std::vector<Coefficients> rows;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double h = knots[k + 1] - knots[k];
    const double y0 = values[k], y1 = values[k + 1];
    const double m0 = derivatives[k], m1 = derivatives[k + 1];
    const double c2 = (3.0 * (y1 - y0) / h - 2.0 * m0 - m1) / h;
    const double c3 = (m0 + m1 - 2.0 * (y1 - y0) / h) / (h * h);
    rows.push_back({y0, m0, c2, c3});
  }
  return Motion(knots, std::move(rows));
}

Motion Motion::sampled(const std::function<double(double)>& f, const std::function<double(double)>& df,
                       double horizon, int segments) {
  if (segments < 1 || !(horizon > 0.0)) throw ParameterError("motion: sampled needs horizon > 0, segments >= 1");
  std::vector<double> t(segments + 1), y(segments + 1), dy(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    t[k] = horizon * k / segments;
    y[k] = f(t[k]);
    dy[k] = df(t[k]);
  }
  return hermite(t, y, dy);
}

Motion Motion::sine(double amplitude, double frequency, double phase, double offset, double horizon,
                    int segments) {
  return sampled([=](double t) { return offset + amplitude * std::sin(frequency * t + phase); },
                 [=](double t) { return amplitude * frequency * std::cos(frequency * t + phase); }, horizon,
                 segments);
}

Motion Motion::square_root(double scale, double offset) {
  return Motion({0.0, 1.0}, {Coefficients{offset, 0.0, 0.0, 0.0}}, scale);
}

std::size_t Motion::segment(double t) const {
  const auto it = std::upper_bound(knots_.begin() + 1, knots_.end() - 1, t);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double Motion::value(double t) const {
  const std::size_t k = segment(t);
  const double s = t - knots_[k];
  const auto& c = coeffs_[k];
  double v = c[0] + s * (c[1] + s * (c[2] + s * c[3]));
  if (sqrt_scale_ != 0.0) v += sqrt_scale_ * std::sqrt(std::max(t, 0.0));
  return v;
}

double Motion::derivative(double t) const {
  const std::size_t k = segment(t);
  const double s = t - knots_[k];
  const auto& c = coeffs_[k];
  double v = c[1] + s * (2.0 * c[2] + s * 3.0 * c[3]);
  if (sqrt_scale_ != 0.0) {
    v += t > 0.0 ? 0.5 * sqrt_scale_ / std::sqrt(t) : std::copysign(std::numeric_limits<double>::infinity(), sqrt_scale_);
  }
  return v;
}

Motion Motion::reversed(double horizon) const {
  if (sqrt_scale_ != 0.0) throw UnsupportedError("motion: cannot reverse a square-root motion");
  // Only the part of the table covering [0, horizon] matters; pad with the
  // extrapolating end segments so the reversed table covers it too.
  std::vector<double> knots = knots_;
  std::vector<Coefficients> rows = coeffs_;
  knots.front() = std::min(knots.front(), 0.0);
  if (knots.back() < horizon) {
    // Extend the last segment to horizon by re-centering is unnecessary: the
    // polynomial already extrapolates, only the knot moves.
    knots.back() = horizon;
  }
  // Re-express the first segment relative to its (possibly moved) left knot.
  if (knots.front() != knots_.front()) {
    const double shift = knots.front() - knots_.front();
    const auto& c = coeffs_.front();
    rows.front() = {c[0] + shift * (c[1] + shift * (c[2] + shift * c[3])),
                    c[1] + shift * (2.0 * c[2] + 3.0 * shift * c[3]), c[2] + 3.0 * shift * c[3], c[3]};
  }
  const std::size_t segs = rows.size();
  std::vector<double> out_knots(segs + 1);
  std::vector<Coefficients> out_rows(segs);
  for (std::size_t k = 0; k < segs; ++k) {
    // Segment k covers [t_k, t_{k+1}]; in reversed time s = horizon - t it
    // covers [horizon - t_{k+1}, horizon - t_k] with local var q = s - (horizon - t_{k+1}),
    // so t - t_k = h - q.
    const double h = knots[k + 1] - knots[k];
    const auto& c = rows[k];
    // p(h - q) expanded in q.
    const double a0 = c[0] + h * (c[1] + h * (c[2] + h * c[3]));
    const double a1 = -(c[1] + 2.0 * c[2] * h + 3.0 * c[3] * h * h);
    const double a2 = c[2] + 3.0 * c[3] * h;
    const double a3 = -c[3];
    const std::size_t j = segs - 1 - k;
    out_rows[j] = {a0, a1, a2, a3};
    out_knots[j] = horizon - knots[k + 1];
    out_knots[j + 1] = horizon - knots[k];
  }
  return Motion(std::move(out_knots), std::move(out_rows));
}

Motion Motion::plus(double offset) const {
  Motion m = *this;
  for (auto& row : m.coeffs_) row[0] += offset;
  return m;
}

double Motion::max_speed(double horizon, int samples) const {
  if (sqrt_scale_ != 0.0) return std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) best = std::max(best, std::abs(derivative(horizon * i / samples)));
  for (double k : knots_) {
    if (k >= 0.0 && k <= horizon) best = std::max(best, std::abs(derivative(k)));
  }
  return best;
}

}  // namespace oblique
