#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace rarelab {

template <class T>
using Vector3 = std::array<T, 3>;
using Vec3 = Vector3<double>;

/// Dense row-major 3x3 matrix over a scalar (double or Jet).
template <class T>
struct Matrix3 {
  std::array<std::array<T, 3>, 3> m{};

  constexpr T& operator()(std::size_t i, std::size_t j) { return m[i][j]; }
  constexpr const T& operator()(std::size_t i, std::size_t j) const { return m[i][j]; }

  static constexpr Matrix3 identity() {
    Matrix3 r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = T(i == j ? 1.0 : 0.0);
    return r;
  }

  constexpr Vector3<T> row(std::size_t i) const { return m[i]; }
  constexpr Vector3<T> column(std::size_t j) const { return {m[0][j], m[1][j], m[2][j]}; }
};
using Mat3 = Matrix3<double>;

template <class T>
Matrix3<T> operator*(const Matrix3<T>& a, const Matrix3<T>& b) {
  Matrix3<T> r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      T s = a(i, 0) * b(0, j);
      s += a(i, 1) * b(1, j);
      s += a(i, 2) * b(2, j);
      r(i, j) = s;
    }
  return r;
}

template <class T>
Vector3<T> operator*(const Matrix3<T>& a, const Vector3<T>& v) {
  Vector3<T> r;
  for (std::size_t i = 0; i < 3; ++i) r[i] = a(i, 0) * v[0] + a(i, 1) * v[1] + a(i, 2) * v[2];
  return r;
}

template <class T>
T dot(const Vector3<T>& a, const Vector3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
T determinant(const Matrix3<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Adjugate inverse. Caller guarantees a non-singular argument.
template <class T>
Matrix3<T> inverse(const Matrix3<T>& a) {
  Matrix3<T> r;
  r(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  r(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  r(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  r(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  r(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  r(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  r(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  r(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  r(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  T det = a(0, 0) * r(0, 0) + a(0, 1) * r(1, 0) + a(0, 2) * r(2, 0);
  for (auto& row : r.m)
    for (auto& e : row) e = e / det;
  return r;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) e = std::max(e, std::abs(a(i, j) - b(i, j)));
  return e;
}

}  // namespace rarelab
