#pragma once
/// Ideal polytropic gas: thermodynamics, the 1D Euler eigensystem and the
/// 3-Riemann invariants.

#include <array>
#include <cmath>
#include <string>

#include "rarelab/errors.hpp"
#include "rarelab/linalg.hpp"

namespace rarelab {

/// Fluid constants. Physical dissipation is `eps` times (mu, lambda, kappa).
struct GasModel {
  double gamma = 1.4;
  double R = 1.0;
  double A = 1.0;
  double mu = 1.0;
  double lambda = 0.0;
  double kappa = 1.0;

  /// Coefficient of u_xx in planar flow: 2 mu + lambda.
  double planar_viscosity() const { return 2.0 * mu + lambda; }
  double cv() const { return R / (gamma - 1.0); }

  void validate() const {
    if (!(gamma > 1.0)) throw ConfigError("gas.gamma", "must exceed 1");
    if (!(R > 0.0)) throw ConfigError("gas.R", "must be positive");
    if (!(A > 0.0)) throw ConfigError("gas.A", "must be positive");
    if (!(kappa > 0.0)) throw ConfigError("gas.kappa", "must be positive");
    if (!(mu > 0.0)) throw ConfigError("gas.mu", "must be positive");
    if (!(2.0 * mu + 3.0 * lambda >= 0.0)) throw ConfigError("gas.lambda", "requires 2 mu + 3 lambda >= 0");
  }
};

/// (rho, v, theta). `v2` is the transverse velocity of the slab mode; zero in 1D.
struct PrimitiveState {
  double rho = 1.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double theta = 1.0;
};

/// (rho, m, energy) with energy = rho (R theta / (gamma - 1) + |v|^2 / 2).
struct ConservedState {
  double rho = 1.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double energy = 0.0;
};

namespace detail {

inline void require_positive(double rho, double theta, const char* where) {
  if (!(rho > 0.0) || !(theta > 0.0) || !std::isfinite(rho) || !std::isfinite(theta))
    throw DomainError(std::string(where) + ": requires rho > 0 and theta > 0 (rho=" + std::to_string(rho) +
                      ", theta=" + std::to_string(theta) + ")");
}

inline constexpr double kVacuumSoundSpeedSq = 1e-12;

}  // namespace detail

inline double pressure(const GasModel& gas, double rho, double theta) {
  detail::require_positive(rho, theta, "pressure");
  return gas.R * rho * theta;
}

inline double entropy(const GasModel& gas, double rho, double theta) {
  detail::require_positive(rho, theta, "entropy");
  const double cv = gas.cv();
  return -gas.R * std::log(rho) + cv * std::log(theta) + cv * std::log(gas.R / gas.A);
}

/// p(rho, S) = A rho^gamma exp((gamma - 1) S / R).
inline double pressure_from_entropy(const GasModel& gas, double rho, double S) {
  if (!(rho > 0.0)) throw DomainError("pressure_from_entropy: requires rho > 0");
  return gas.A * std::pow(rho, gas.gamma) * std::exp((gas.gamma - 1.0) * S / gas.R);
}

inline double sound_speed(const GasModel& gas, double rho, double theta) {
  detail::require_positive(rho, theta, "sound_speed");
  return std::sqrt(gas.gamma * gas.R * theta);
}

/// (v1 - c, v1, v1 + c).
inline std::array<double, 3> eigenvalues(const GasModel& gas, const PrimitiveState& s) {
  const double c = sound_speed(gas, s.rho, s.theta);
  return {s.v1 - c, s.v1, s.v1 + c};
}

struct RiemannInvariants {
  double sigma1;  ///< v1 - 2c / (gamma - 1)
  double sigma2;  ///< entropy
};

inline RiemannInvariants riemann_invariants_3(const GasModel& gas, const PrimitiveState& s) {
  const double c = sound_speed(gas, s.rho, s.theta);
  return {s.v1 - 2.0 * c / (gas.gamma - 1.0), entropy(gas, s.rho, s.theta)};
}

inline ConservedState prim_to_cons(const GasModel& gas, const PrimitiveState& s) {
  detail::require_positive(s.rho, s.theta, "prim_to_cons");
  const double kinetic = 0.5 * (s.v1 * s.v1 + s.v2 * s.v2);
  return {s.rho, s.rho * s.v1, s.rho * s.v2, s.rho * (gas.cv() * s.theta + kinetic)};
}

inline PrimitiveState cons_to_prim(const GasModel& gas, const ConservedState& u) {
  if (!(u.rho > 0.0) || !std::isfinite(u.rho)) throw DomainError("cons_to_prim: non-positive density");
  const double v1 = u.m1 / u.rho;
  const double v2 = u.m2 / u.rho;
  const double internal = u.energy - 0.5 * u.rho * (v1 * v1 + v2 * v2);
  if (!(internal > 0.0) || !std::isfinite(internal))
    throw DomainError("cons_to_prim: non-positive internal energy");
  return {u.rho, v1, v2, internal / (u.rho * gas.cv())};
}

/// Partials of p(rho, m1, E) = (gamma - 1)(E - m1^2 / (2 rho)).
struct PressurePartials {
  double p, p_rho, p_m1, p_energy;
};

inline PressurePartials pressure_partials(const GasModel& gas, const ConservedState& u) {
  const double g1 = gas.gamma - 1.0;
  const double v = u.m1 / u.rho;
  return {g1 * (u.energy - 0.5 * u.m1 * v), 0.5 * g1 * v * v, -g1 * v, g1};
}

/// Flux Jacobian of the 1D Euler system in (rho, m1, E), entry by entry from
/// the closed-form pressure partials.
inline Mat3 conservative_jacobian(const GasModel& gas, const ConservedState& u) {
  const auto s = cons_to_prim(gas, u);  // admissibility check
  (void)s;
  const auto [p, p_rho, p_m, p_e] = pressure_partials(gas, u);
  const double rho = u.rho, m = u.m1, e = u.energy;
  Mat3 a;
  a(0, 0) = 0.0;
  a(0, 1) = 1.0;
  a(0, 2) = 0.0;
  a(1, 0) = -m * m / (rho * rho) + p_rho;
  a(1, 1) = 2.0 * m / rho + p_m;
  a(1, 2) = p_e;
  a(2, 0) = -m * e / (rho * rho) + (m / rho) * p_rho - p * m / (rho * rho);
  a(2, 1) = e / rho + (m / rho) * p_m + p / rho;
  a(2, 2) = m / rho + (m / rho) * p_e;
  return a;
}

/// Right eigenvectors of the conservative Jacobian as columns, from primitive
/// variables. Acoustic columns carry unit density component; the contact
/// column is the image of (p_S, 0, -p_rho) in (rho, v1, S) coordinates, i.e.
/// p_S (1, v1, v1^2 / 2) with p_S = (gamma - 1) rho theta.
/// Generic in the scalar so jets can differentiate it.
template <class T>
Matrix3<T> right_eigenvectors(const GasModel& gas, const T& rho, const T& v1, const T& theta) {
  using std::sqrt;
  const T c = sqrt(gas.gamma * gas.R * theta);
  const T enthalpy = gas.gamma / (gas.gamma - 1.0) * gas.R * theta + 0.5 * v1 * v1;
  const T p_s = (gas.gamma - 1.0) * rho * theta;
  Matrix3<T> r;
  r(0, 0) = T(1.0);
  r(1, 0) = v1 - c;
  r(2, 0) = enthalpy - v1 * c;
  r(0, 1) = p_s;
  r(1, 1) = p_s * v1;
  r(2, 1) = p_s * 0.5 * v1 * v1;
  r(0, 2) = T(1.0);
  r(1, 2) = v1 + c;
  r(2, 2) = enthalpy + v1 * c;
  return r;
}

/// L A R = diag(lambda), L R = I with L the exact inverse of R.
struct Eigensystem {
  Mat3 L;
  Vec3 lambda;
  Mat3 R;
};

inline Eigensystem eigendecompose_jacobian(const GasModel& gas, const ConservedState& u) {
  const auto s = cons_to_prim(gas, u);
  const double c2 = gas.gamma * gas.R * s.theta;
  if (c2 < detail::kVacuumSoundSpeedSq)
    throw ConditioningError("eigendecompose_jacobian: sound speed below vacuum threshold");
  Eigensystem e;
  e.R = right_eigenvectors<double>(gas, s.rho, s.v1, s.theta);
  e.L = inverse(e.R);
  const double c = std::sqrt(c2);
  e.lambda = {s.v1 - c, s.v1, s.v1 + c};
  return e;
}

}  // namespace rarelab
