#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "oblique/types.hpp"

namespace oblique {

/// Piecewise-linear path in R^n on a strictly increasing grid starting at 0.
struct SampledPath {
  std::vector<double> times;
  std::vector<Vec> values;

  SampledPath() = default;
  SampledPath(std::vector<double> times_, std::vector<Vec> values_);

  /// `intervals` equal steps on [0, horizon], values from f.
  static SampledPath uniform(double horizon, std::size_t intervals, const std::function<Vec(double)>& f);
  static SampledPath constant(double horizon, std::size_t intervals, const Vec& value);

  std::size_t size() const { return times.size(); }
  int dimension() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  double horizon() const { return times.back(); }

  /// Throws ParameterError unless the grid is strictly increasing from 0 and
  /// the dimension is constant and at most kMaxDim.
  void validate() const;

  /// Linear interpolation; clamps outside the grid.
  Vec at(double t) const;
};

/// max_k |a(t_k) - b(t_k)| on matching grids.
double sup_distance(const SampledPath& a, const SampledPath& b);

/// Diameter of the values on nodes [first, last]: the modulus
/// sup_{s <= t1 <= t2 <= t} |f(t2) - f(t1)| of a piecewise-linear path.
double oscillation(const SampledPath& path, std::size_t first, std::size_t last);

/// Full double precision ("%.17g").
std::string format_double(double v);

/// CSV with header `t,<prefix>1..<prefix>n`.
void write_csv(std::ostream& out, const SampledPath& path, const std::string& prefix = "x");
/// Reads what write_csv writes; throws IoError on malformed input.
SampledPath read_csv(std::istream& in);

}  // namespace oblique
