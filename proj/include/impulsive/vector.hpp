#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "impulsive/errors.hpp"

namespace impulsive {

/// Dense state or input vector. Dimensions in this library are small (n, m
/// of order 1-4), so a plain vector keeps call sites simple.
using Vector = std::vector<double>;

inline double norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DomainError("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Vector operator+(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vector operator-(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vector operator*(double s, Vector a) {
  for (double& x : a) x *= s;
  return a;
}

/// y += s * x
inline void axpy(double s, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

}  // namespace impulsive
