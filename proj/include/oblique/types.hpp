#pragma once

#include <Eigen/Dense>

namespace oblique {

/// Largest spatial dimension the library allocates for. Points and small
/// matrices use Eigen's dynamic size with fixed maximum storage, so they
/// never touch the heap in inner loops.
inline constexpr int kMaxDim = 3;

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Joint (x, y) blocks of a two-point function.
template <typename Scalar>
using PairMatT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;
using PairMat = PairMatT<double>;

inline Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace oblique
