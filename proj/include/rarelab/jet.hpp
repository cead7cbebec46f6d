#pragma once

#include <cmath>
#include <type_traits>

namespace rarelab {

/// Forward-mode dual number: a value and one directional derivative.
///
/// Nesting (`Jet<Jet<double>>`) carries second derivatives. Arithmetic with
/// plain arithmetic scalars is supported for any nesting depth.
template <class T>
struct Jet {
  T val{};
  T der{};

  constexpr Jet() = default;
  constexpr Jet(T v, T d) : val(v), der(d) {}
  template <class S>
    requires std::is_arithmetic_v<S>
  constexpr Jet(S v) : val(static_cast<T>(v)), der(0) {}  // NOLINT(google-explicit-constructor)

  /// A variable seeded with unit derivative.
  static constexpr Jet variable(T v) { return Jet(v, T(1)); }

  constexpr Jet& operator+=(const Jet& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  constexpr Jet& operator-=(const Jet& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  constexpr Jet& operator*=(const Jet& o) {
    der = der * o.val + val * o.der;
    val *= o.val;
    return *this;
  }
  constexpr Jet& operator/=(const Jet& o) {
    der = (der * o.val - val * o.der) / (o.val * o.val);
    val /= o.val;
    return *this;
  }
};

template <class T>
struct is_jet : std::false_type {};
template <class T>
struct is_jet<Jet<T>> : std::true_type {};

template <class T>
constexpr Jet<T> operator-(const Jet<T>& a) {
  return {-a.val, -a.der};
}
template <class T>
constexpr Jet<T> operator+(Jet<T> a, const Jet<T>& b) {
  return a += b;
}
template <class T>
constexpr Jet<T> operator-(Jet<T> a, const Jet<T>& b) {
  return a -= b;
}
template <class T>
constexpr Jet<T> operator*(Jet<T> a, const Jet<T>& b) {
  return a *= b;
}
template <class T>
constexpr Jet<T> operator/(Jet<T> a, const Jet<T>& b) {
  return a /= b;
}

#define RARELAB_JET_SCALAR_OP(op)                                  \
  template <class T, class S>                                      \
    requires std::is_arithmetic_v<S>                               \
  constexpr Jet<T> operator op(const Jet<T>& a, S s) {             \
    return a op Jet<T>(s);                                         \
  }                                                                \
  template <class T, class S>                                      \
    requires std::is_arithmetic_v<S>                               \
  constexpr Jet<T> operator op(S s, const Jet<T>& a) {             \
    return Jet<T>(s) op a;                                         \
  }
RARELAB_JET_SCALAR_OP(+)
RARELAB_JET_SCALAR_OP(-)
RARELAB_JET_SCALAR_OP(*)
RARELAB_JET_SCALAR_OP(/)
#undef RARELAB_JET_SCALAR_OP

template <class T>
Jet<T> sqrt(const Jet<T>& a) {
  using std::sqrt;
  T s = sqrt(a.val);
  return {s, a.der / (2.0 * s)};
}

template <class T>
Jet<T> pow(const Jet<T>& a, double e) {
  using std::pow;
  return {pow(a.val, e), e * pow(a.val, e - 1.0) * a.der};
}

template <class T>
Jet<T> log(const Jet<T>& a) {
  using std::log;
  return {log(a.val), a.der / a.val};
}

template <class T>
Jet<T> exp(const Jet<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, e * a.der};
}

template <class T>
Jet<T> tanh(const Jet<T>& a) {
  using std::tanh;
  T th = tanh(a.val);
  return {th, (1.0 - th * th) * a.der};
}

template <class T>
Jet<T> sin(const Jet<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.val), cos(a.val) * a.der};
}

template <class T>
Jet<T> cos(const Jet<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.val), -sin(a.val) * a.der};
}

/// Innermost value of a possibly nested jet.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Jet<T>& j) {
  return value_of(j.val);
}

/// Seed a second-order jet from a value and its first two derivatives.
inline Jet<Jet<double>> second_order_jet(double f, double fx, double fxx) {
  return {Jet<double>(f, fx), Jet<double>(fx, fxx)};
}

using Jet3 = Jet<Jet<Jet<double>>>;

/// Third-order analogue: access f''' as r.der.der.der.
inline Jet3 third_order_jet(double f, double f1, double f2, double f3) {
  return {second_order_jet(f, f1, f2), second_order_jet(f1, f2, f3)};
}

}  // namespace rarelab
