#pragma once

// Built-in parametric systems, selectable by name from configs.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/simulator.hpp"

namespace impulsive::systems {

namespace detail {

inline ComparisonFunction cst(double c) { return ComparisonFunction::constant(c); }

// Envelopes for f = A(t) xi + B mu, g = C xi + D mu with |A(t)| <= a, |B| <= b,
// |C| <= c, |D| <= d in operator norm.
inline AssumptionData linear_envelopes(double a, double b, double c, double d) {
  using CF = ComparisonFunction;
  AssumptionData e;
  // (a r + 1)(1 + b s) >= a r + b s; with b = 0 the factor 1 is not needed
  e.N_f = b > 0.0 ? CF::affine_power(a, 1.0, 1.0) : CF::linear(a);
  e.nu_f = b > 0.0 ? CF::linear(b) : CF::identity();
  e.N_g = d > 0.0 ? CF::affine_power(c, 1.0, 1.0) : CF::linear(c);
  e.nu_g = d > 0.0 ? CF::linear(d) : CF::identity();
  e.L_R = cst(a);
  e.omega_R = CF::linear(c);
  e.phitilde_f = CF::identity();
  e.N_f_B = cst(b);
  e.O_f = cst(0.0);
  e.eta_f = CF::linear(a > 0.0 ? a : 1.0);
  e.P_f = cst(a > 0.0 ? 1.0 : 0.0);
  e.phi_f = CF::identity();
  e.Lf = cst(a > 0.0 ? a : 1.0);
  e.phitilde_g = CF::identity();
  e.N_g_B = cst(d);
  e.O_g = cst(0.0);
  e.eta_g = CF::linear(c > 0.0 ? c : 1.0);
  e.P_g = cst(c > 0.0 ? 1.0 : 0.0);
  e.phi_g = CF::identity();
  return e;
}

}  // namespace detail

/// x' = (a0 + a1 sin(omega t)) x + b u,  x(tau) = x(tau-) + c x(tau-) + d u(tau).
inline SystemModel scalar_linear(double a0, double a1, double omega, double b, double c, double d) {
  SystemModel s;
  s.name = "scalar-linear";
  s.n = s.m = 1;
  s.flow = [=](double t, const Vector& xi, const Vector& mu) {
    return Vector{(a0 + a1 * std::sin(omega * t)) * xi[0] + b * mu[0]};
  };
  s.jump = [=](double, const Vector& xi, const Vector& mu) { return Vector{c * xi[0] + d * mu[0]}; };
  s.assumptions = detail::linear_envelopes(std::abs(a0) + std::abs(a1), std::abs(b), std::abs(c), std::abs(d));
  return s;
}

/// x' = -x, jumps halve the state.
inline SystemModel s1() {
  auto s = scalar_linear(-1.0, 0.0, 0.0, 0.0, -0.5, 0.0);
  s.name = "S1";
  return s;
}

/// x' = -x + u, jumps halve the state.
inline SystemModel s2() {
  auto s = scalar_linear(-1.0, 0.0, 0.0, 1.0, -0.5, 0.0);
  s.name = "S2";
  return s;
}

/// x' = x without jumps: no stability estimate holds.
inline SystemModel unstable() {
  auto s = scalar_linear(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  s.name = "unstable";
  return s;
}

/// x' = (A + sin(omega t) A1) x + B u,  jump increment C x + D u, with
/// 2x2 matrices given row-major and B, D of size 2 (scalar input).
inline SystemModel planar_linear(std::vector<double> A, std::vector<double> A1, double omega, std::vector<double> B,
                                 std::vector<double> C, std::vector<double> D) {
  if (A.size() != 4 || A1.size() != 4 || C.size() != 4 || B.size() != 2 || D.size() != 2) {
    throw ConfigError("planar-linear: A, A1, C need 4 entries and B, D need 2");
  }
  auto opnorm = [](const std::vector<double>& M) {
    // spectral norm of a 2x2 matrix
    const double a = M[0], b = M[1], c = M[2], d = M[3];
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4 * det * det))));
  };
  SystemModel s;
  s.name = "planar-linear";
  s.n = 2;
  s.m = 1;
  s.flow = [=](double t, const Vector& x, const Vector& u) {
    const double k = std::sin(omega * t);
    return Vector{(A[0] + k * A1[0]) * x[0] + (A[1] + k * A1[1]) * x[1] + B[0] * u[0],
                  (A[2] + k * A1[2]) * x[0] + (A[3] + k * A1[3]) * x[1] + B[1] * u[0]};
  };
  s.jump = [=](double, const Vector& x, const Vector& u) {
    return Vector{C[0] * x[0] + C[1] * x[1] + D[0] * u[0], C[2] * x[0] + C[3] * x[1] + D[1] * u[0]};
  };
  const double bn = std::hypot(B[0], B[1]), dn = std::hypot(D[0], D[1]);
  s.assumptions = detail::linear_envelopes(opnorm(A) + opnorm(A1), bn, opnorm(C), dn);
  return s;
}

/// x' = a1 x + a3 x^3 + b u,  jump increment c x + d u. Envelopes are set
/// for a3 <= 0 only where they are global; L_R grows like |a1| + 3|a3| R^2.
inline SystemModel scalar_polynomial(double a1, double a3, double b, double c, double d) {
  using CF = ComparisonFunction;
  SystemModel s;
  s.name = "scalar-polynomial";
  s.n = s.m = 1;
  s.flow = [=](double, const Vector& x, const Vector& u) { return Vector{a1 * x[0] + a3 * x[0] * x[0] * x[0] + b * u[0]}; };
  s.jump = [=](double, const Vector& x, const Vector& u) { return Vector{c * x[0] + d * u[0]}; };
  AssumptionData e;
  const double ab = std::abs(b);
  CF growth = CF::sum(CF::linear(std::abs(a1)), CF::affine_power(std::abs(a3), 3.0));
  e.N_f = ab > 0.0 ? CF::sum(growth, CF::constant(1.0)) : growth;
  e.nu_f = ab > 0.0 ? CF::linear(ab) : CF::identity();
  e.N_g = std::abs(d) > 0.0 ? CF::affine_power(std::abs(c), 1.0, 1.0) : CF::linear(std::abs(c));
  e.nu_g = std::abs(d) > 0.0 ? CF::linear(std::abs(d)) : CF::identity();
  e.L_R = CF::affine_power(3.0 * std::abs(a3), 2.0, std::abs(a1));
  e.omega_R = CF::linear(std::abs(c));
  s.assumptions = e;
  return s;
}

/// x' = -a x + b tanh(u),  jump increment c x + d tanh(u).
inline SystemModel bounded_nonlinearity(double a, double b, double c, double d) {
  SystemModel s;
  s.name = "bounded-nonlinearity";
  s.n = s.m = 1;
  s.flow = [=](double, const Vector& x, const Vector& u) { return Vector{-a * x[0] + b * std::tanh(u[0])}; };
  s.jump = [=](double, const Vector& x, const Vector& u) { return Vector{c * x[0] + d * std::tanh(u[0])}; };
  // tanh is 1-Lipschitz, so the linear envelopes stay valid
  s.assumptions = detail::linear_envelopes(std::abs(a), std::abs(b), std::abs(c), std::abs(d));
  return s;
}

/// Builds a library system from its name and parameter map; missing
/// parameters default to 0 (bounded-nonlinearity: a = 1).
inline SystemModel from_name(const std::string& name, const std::map<std::string, double>& p) {
  auto get = [&](const char* k, double def = 0.0) {
    auto it = p.find(k);
    return it == p.end() ? def : it->second;
  };
  if (name == "S1") return s1();
  if (name == "S2") return s2();
  if (name == "unstable") return unstable();
  if (name == "scalar-linear") {
    return scalar_linear(get("a0"), get("a1"), get("omega"), get("b"), get("c"), get("d"));
  }
  if (name == "scalar-polynomial") return scalar_polynomial(get("a1"), get("a3"), get("b"), get("c"), get("d"));
  if (name == "bounded-nonlinearity") return bounded_nonlinearity(get("a", 1.0), get("b"), get("c"), get("d"));
  if (name == "planar-linear") {
    auto vec = [&](const char* prefix, std::size_t k) {
      std::vector<double> v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = get((std::string(prefix) + std::to_string(i)).c_str());
      return v;
    };
    return planar_linear(vec("A", 4), vec("A1_", 4), get("omega"), vec("B", 2), vec("C", 4), vec("D", 2));
  }
  throw ConfigError("unknown system '" + name + "'");
}

}  // namespace impulsive::systems
