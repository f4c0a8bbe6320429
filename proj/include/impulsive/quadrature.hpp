#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace impulsive {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;  ///< keeps huge integrands from exhausting the depth budget
  int max_depth = 48;
  /// Uniform panels refined independently; guards against a first Simpson
  /// estimate that aliases a periodic integrand.
  int min_panels = 32;
};

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol || !(m > a && m < b)) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction on [a, b].
template <class F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  const int n = std::max(1, opt.min_panels);
  const double h = (b - a) / n;
  double total = 0.0;
  double x0 = a, f0 = f(a);
  for (int i = 0; i < n; ++i) {
    const double x1 = i + 1 == n ? b : a + h * (i + 1);
    const double f1 = f(x1), fm = f(0.5 * (x0 + x1));
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    const double tol = std::max(opt.abs_tol / n, opt.rel_tol * std::abs(whole));
    total += detail::simpson_recurse(f, x0, x1, f0, fm, f1, whole, tol, opt.max_depth);
    x0 = x1;
    f0 = f1;
  }
  return total;
}

/// Integral over [a, b] split at every breakpoint strictly inside; the
/// tolerance budget is shared in proportion to piece length.
template <class F>
double integrate_piecewise(const F& f, double a, double b, std::span<const double> breaks,
                           const QuadratureOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double c : breaks) {
    if (c > a && c < b && c > cuts.back()) cuts.push_back(c);
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    QuadratureOptions o = opt;
    o.abs_tol = opt.abs_tol * (cuts[i + 1] - cuts[i]) / (b - a);
    total += integrate(f, cuts[i], cuts[i + 1], o);
  }
  return total;
}

}  // namespace impulsive
