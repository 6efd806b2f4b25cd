#include "oblique/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "oblique/errors.hpp"

namespace oblique {

SampledPath::SampledPath(std::vector<double> times_, std::vector<Vec> values_)
    : times(std::move(times_)), values(std::move(values_)) {
  validate();
}

SampledPath SampledPath::uniform(double horizon, std::size_t intervals, const std::function<Vec(double)>& f) {
  if (!(horizon > 0.0) || intervals == 0) throw ParameterError("path: need a positive horizon and at least one interval");
  std::vector<double> t(intervals + 1);
  std::vector<Vec> v(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    t[k] = k == intervals ? horizon : horizon * static_cast<double>(k) / static_cast<double>(intervals);
    v[k] = f(t[k]);
  }
  return SampledPath(std::move(t), std::move(v));
}

SampledPath SampledPath::constant(double horizon, std::size_t intervals, const Vec& value) {
  return uniform(horizon, intervals, [&](double) { return value; });
}

void SampledPath::validate() const {
  if (times.size() < 2) throw ParameterError("path: need at least two nodes");
  if (times.size() != values.size()) throw ParameterError("path: times and values differ in length");
  if (times.front() != 0.0) throw ParameterError("path: grid must start at 0");
  const Eigen::Index n = values.front().size();
  if (n < 1 || n > kMaxDim) throw ParameterError("path: dimension must be between 1 and 3");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (values[k].size() != n) throw ParameterError("path: dimension changes along the path");
    if (!values[k].allFinite()) throw ParameterError("path: non-finite value");
    if (k > 0 && !(times[k] > times[k - 1])) throw ParameterError("path: grid must be strictly increasing");
  }
}

Vec SampledPath::at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return Vec((1.0 - w) * values[k] + w * values[k + 1]);
}

double sup_distance(const SampledPath& a, const SampledPath& b) {
  if (a.times != b.times) throw ParameterError("sup_distance: grids differ");
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, (a.values[k] - b.values[k]).norm());
  return out;
}

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

}  // namespace

double oscillation(const SampledPath& path, std::size_t first, std::size_t last) {
  if (first > last || last >= path.size()) throw ParameterError("oscillation: bad node range");
  const int n = path.dimension();
  if (n == 1) {
    double lo = path.values[first](0), hi = lo;
    for (std::size_t k = first; k <= last; ++k) {
      lo = std::min(lo, path.values[k](0));
      hi = std::max(hi, path.values[k](0));
    }
    return hi - lo;
  }
  if (n == 2) {
    // Diameter over the convex hull (monotone chain).
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(last - first + 1);
    for (std::size_t k = first; k <= last; ++k) pts.emplace_back(path.values[k](0), path.values[k](1));
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t h = 0;
    for (const auto& p : pts) {
      while (h >= 2 && cross(hull[h - 2], hull[h - 1], p) <= 0.0) --h;
      hull[h++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = h + 1; i-- > 0;) {
      while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
      hull[h++] = pts[i];
    }
    hull.resize(std::max<std::size_t>(h, 1));
    double out = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
      for (std::size_t j = i + 1; j < hull.size(); ++j) out = std::max(out, (hull[i] - hull[j]).norm());
    return out;
  }
  double out = 0.0;
  for (std::size_t i = first; i <= last; ++i)
    for (std::size_t j = i + 1; j <= last; ++j) out = std::max(out, (path.values[i] - path.values[j]).norm());
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const SampledPath& path, const std::string& prefix) {
  out << 't';
  for (int i = 1; i <= path.dimension(); ++i) out << ',' << prefix << i;
  out << '\n';
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << format_double(path.times[k]);
    for (int i = 0; i < path.dimension(); ++i) out << ',' << format_double(path.values[k](i));
    out << '\n';
  }
}

SampledPath read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("path csv: empty input");
  const int n = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (n < 1 || n > kMaxDim || line.rfind("t,", 0) != 0) throw IoError("path csv: bad header '" + line + "'");
  std::vector<double> times;
  std::vector<Vec> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError("path csv: line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(cells.size()) != n + 1)
      throw IoError("path csv: line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) + " fields");
    times.push_back(cells[0]);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = cells[i + 1];
    values.push_back(v);
  }
  try {
    return SampledPath(std::move(times), std::move(values));
  } catch (const ParameterError& e) {
    throw IoError(std::string("path csv: ") + e.what());
  }
}

}  // namespace oblique
