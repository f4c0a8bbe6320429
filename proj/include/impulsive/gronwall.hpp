#pragma once

// Gronwall-type bounds for functions that grow by an integral term between
// discontinuities and by c_k omega(y(s_k-)) at them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/quadrature.hpp"
#include "impulsive/signals.hpp"

namespace impulsive {

/// Nonnegative rate a(t): piecewise constant (exact integrals) or a general
/// piecewise-continuous function with declared breakpoints.
class RateFunction {
 public:
  RateFunction() : values_{0.0} {}

  static RateFunction constant(double a) { return piecewise_constant({}, {a}); }

  /// a = values[i] on [breaks[i-1], breaks[i]) with breaks[-1] = -inf.
  static RateFunction piecewise_constant(std::vector<double> breaks, std::vector<double> values) {
    if (values.size() != breaks.size() + 1) throw DomainError("piecewise-constant rate: need breaks + 1 values");
    for (double v : values) {
      if (!(v >= 0.0)) throw DomainError("rate values must be nonnegative");
    }
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      if (!(breaks[i] > breaks[i - 1])) throw DomainError("rate breakpoints must increase");
    }
    RateFunction r;
    r.breaks_ = std::move(breaks);
    r.values_ = std::move(values);
    return r;
  }

  static RateFunction from_function(std::function<double(double)> fn, std::vector<double> breaks = {}) {
    RateFunction r;
    r.fn_ = std::move(fn);
    r.breaks_ = std::move(breaks);
    std::sort(r.breaks_.begin(), r.breaks_.end());
    return r;
  }

  bool piecewise_constant_form() const { return !fn_; }
  bool is_constant() const { return !fn_ && values_.size() == 1; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const {
    if (fn_) return fn_(t);
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
  }

  /// int_a^b rate
  double integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    if (fn_) return integrate_piecewise(fn_, a, b, breaks_, {1e-13, 1e-13, 48});
    double total = 0.0, lo = a;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
    while (lo < b) {
      const double hi = it == breaks_.end() ? b : std::min(b, *it);
      total += values_[static_cast<std::size_t>(it - breaks_.begin())] * (hi - lo);
      lo = hi;
      if (it != breaks_.end()) ++it;
    }
    return total;
  }

 private:
  std::function<double(double)> fn_;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

struct GronwallProblem {
  double p = 0.0;
  RateFunction a;
  std::vector<double> c_seq;  ///< c_1, c_2, ...
  ComparisonFunction omega = ComparisonFunction::identity();
  ImpulseSequence sigma = ImpulseSequence::empty(1.0);  ///< discontinuity points s_1 < ... < s_N
  double t0 = 0.0;
  double T = 1.0;
};

namespace detail {

template <class G>
std::pair<double, double> golden_argmax(const G& g, double lo, double hi, double rel_tol = 1e-10) {
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  std::pair<double, double> best{lo, g(lo)};
  const double fhi = g(hi);
  if (fhi > best.second) best = {hi, fhi};
  const double scale = std::max(1.0, std::abs(hi));
  for (int i = 0; i < 100 && hi - lo > rel_tol * scale; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = g(x1);
    }
    if (f1 > best.second) best = {x1, f1};
    if (f2 > best.second) best = {x2, f2};
  }
  return best;
}

}  // namespace detail

/// The functions h_j^{t0}(p, t) on [t0, T] for j = 0..levels.
///
/// With A(t) = int_{t0}^t a and H_j = h_j e^{-A}, the recursion reads
/// H_0 = p, H_j(t) = H_{j-1}(t) + c_j sup_{t0<=s<=t} q_j(s) where
/// q_j(s) = omega(e^{A(s)} H_{j-1}(s)) e^{-A(s)}. Each running sup is
/// tabulated on a grid (256 uniform points plus breakpoints) with every
/// local grid maximum refined by golden-section search.
class GronwallBound {
 public:
  explicit GronwallBound(GronwallProblem prob, std::optional<std::size_t> levels = {}, std::size_t grid = 256)
      : prob_(std::move(prob)) {
    if (!(prob_.p >= 0.0)) throw DomainError("gronwall: p must be nonnegative");
    if (!(prob_.T >= prob_.t0)) throw DomainError("gronwall: T must not precede t0");
    if (prob_.omega.kind() != FunctionKind::KInf) throw ValidationError("gronwall: omega must be class K-infinity");
    if (!validate(prob_.omega, 256).ok()) throw ValidationError("gronwall: omega fails class validation");
    for (double c : prob_.c_seq) {
      if (!(c >= 0.0)) throw DomainError("gronwall: c_k must be nonnegative");
    }
    const auto in = prob_.sigma.in_interval(prob_.t0, prob_.T);
    const std::size_t below = prob_.sigma.size() - prob_.sigma.in_interval(prob_.t0, prob_.sigma.horizon()).size();
    if (below != 0) throw DomainError("gronwall: discontinuity points must lie after t0");
    levels_ = levels.value_or(in.size());
    if (prob_.c_seq.size() < levels_) throw DomainError("gronwall: fewer c_k than jumps");
    build_grid(grid);
    build_levels();
  }

  const GronwallProblem& problem() const { return prob_; }
  std::size_t levels() const { return levels_; }

  /// int_{t0}^t a
  double A(double t) const {
    check(t);
    if (prob_.a.piecewise_constant_form()) return prob_.a.integral(prob_.t0, t);
    const std::size_t m = cell(t);
    return A_grid_[m] + prob_.a.integral(grid_[m], t);
  }

  /// h_j^{t0}(p, t)
  double h(std::size_t j, double t) const {
    check(t);
    if (j > levels_) throw DomainError("gronwall: level beyond the tabulated range");
    return H(j, t, A(t)) * std::exp(A(t));
  }

  /// h_k^{t0}(p, t) with k the number of discontinuity points in (t0, t].
  double operator()(double t) const {
    check(t);
    return h(count_impulses(prob_.sigma, prob_.t0, std::min(t, prob_.sigma.horizon())), t);
  }

 private:
  struct Level {
    std::vector<double> H;       ///< H_j on the grid
    std::vector<double> prefix;  ///< running sup of q_j on the grid, refined peaks included
    std::vector<std::pair<double, double>> peaks;  ///< (s, q_j(s)) at refined local maxima
  };

  void check(double t) const {
    if (t < prob_.t0 || t > prob_.T) throw DomainError("gronwall: t outside [t0, T]");
  }

  std::size_t cell(double t) const {
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    return it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  }

  void build_grid(std::size_t n) {
    const double t0 = prob_.t0, T = prob_.T;
    grid_.push_back(t0);
    if (T > t0) {
      for (std::size_t i = 1; i <= n; ++i) grid_.push_back(t0 + (T - t0) * static_cast<double>(i) / static_cast<double>(n));
      for (double b : prob_.a.breaks()) {
        if (b > t0 && b < T) grid_.push_back(b);
      }
      for (double s : prob_.sigma.times()) {
        if (s > t0 && s < T) grid_.push_back(s);
      }
      std::sort(grid_.begin(), grid_.end());
      grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
      grid_.back() = T;
    }
    A_grid_.resize(grid_.size(), 0.0);
    for (std::size_t i = 1; i < grid_.size(); ++i) A_grid_[i] = A_grid_[i - 1] + prob_.a.integral(grid_[i - 1], grid_[i]);
  }

  double q(std::size_t j, double s, double As) const {
    return prob_.omega(std::exp(As) * H(j - 1, s, As)) * std::exp(-As);
  }

  double S(std::size_t j, double t, double At) const {
    const Level& L = lv_[j];
    const std::size_t m = cell(t);
    if (grid_[m] == t) return L.prefix[m];
    double best = std::max(L.prefix[m], q(j, t, At));
    for (auto it = std::upper_bound(L.peaks.begin(), L.peaks.end(), std::make_pair(grid_[m], std::numeric_limits<double>::infinity()));
         it != L.peaks.end() && it->first <= t; ++it) {
      best = std::max(best, it->second);
    }
    return best;
  }

  double H(std::size_t j, double t, double At) const {
    const std::size_t m = cell(t);
    if (grid_[m] == t) return lv_[j].H[m];
    double v = prob_.p;
    for (std::size_t i = 1; i <= j; ++i) v += prob_.c_seq[i - 1] * S(i, t, At);
    return v;
  }

  void build_levels() {
    const std::size_t M = grid_.size();
    lv_.resize(levels_ + 1);
    lv_[0].H.assign(M, prob_.p);
    for (std::size_t j = 1; j <= levels_; ++j) {
      Level& L = lv_[j];
      std::vector<double> qv(M);
      for (std::size_t m = 0; m < M; ++m) qv[m] = prob_.omega(std::exp(A_grid_[m]) * lv_[j - 1].H[m]) * std::exp(-A_grid_[m]);
      for (std::size_t m = 0; m < M; ++m) {
        const bool left_ok = m == 0 || qv[m] >= qv[m - 1];
        const bool right_ok = m + 1 == M || qv[m] >= qv[m + 1];
        if (!(left_ok && right_ok) || M < 2) continue;
        const double lo = grid_[m == 0 ? 0 : m - 1], hi = grid_[std::min(M - 1, m + 1)];
        auto g = [&](double s) { return q(j, s, A(s)); };
        auto pk = detail::golden_argmax(g, lo, hi);
        if (pk.second > qv[m]) L.peaks.push_back(pk);
      }
      std::sort(L.peaks.begin(), L.peaks.end());
      L.prefix.resize(M);
      std::size_t pi = 0;
      double run = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        run = std::max(run, qv[m]);
        while (pi < L.peaks.size() && L.peaks[pi].first <= grid_[m]) run = std::max(run, L.peaks[pi++].second);
        L.prefix[m] = run;
      }
      L.H.resize(M);
      for (std::size_t m = 0; m < M; ++m) L.H[m] = lv_[j - 1].H[m] + prob_.c_seq[j - 1] * L.prefix[m];
    }
  }

  GronwallProblem prob_;
  std::size_t levels_ = 0;
  std::vector<double> grid_;
  std::vector<double> A_grid_;
  std::vector<Level> lv_;
};

/// h_k^{t0}(p, t) with k the number of discontinuity points in (t0, t].
inline double h_bound(const GronwallProblem& prob, double t) { return GronwallBound(prob)(t); }

/// h_j^0(p, dt) for a constant rate L (shift invariant in t0).
inline double h_bound_const(double p, double L, const std::vector<double>& c_seq, const ComparisonFunction& omega,
                            std::size_t j, double dt) {
  if (!(dt >= 0.0)) throw DomainError("h_bound_const: dt must be nonnegative");
  if (p == 0.0) return 0.0;
  GronwallProblem prob;
  prob.p = p;
  prob.a = RateFunction::constant(L);
  prob.c_seq = c_seq;
  prob.omega = omega;
  prob.t0 = 0.0;
  prob.T = dt;
  prob.sigma = ImpulseSequence::empty(std::max(dt, 1.0));
  return GronwallBound(prob, j).h(j, dt);
}

struct OracleReport {
  bool pass = true;
  std::size_t trials = 0;         ///< sub-extremal trajectories, besides the extremal one
  std::size_t points_checked = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max of y - h
  double worst_relative = -std::numeric_limits<double>::infinity();  ///< max of (y - h) / (1 + h)
  double worst_t = 0.0;
  long worst_trial = -1;  ///< -1 is the extremal trajectory
};

/// Builds functions y satisfying the integral inequality on a grid and
/// compares them with h. The extremal one takes equality at every step;
/// the others scale the right-hand side by random factors in [0, 1].
/// Integrals are left-Riemann sums, which under-approximate the continuous
/// extremal solution, so the comparison stays sound.
inline OracleReport domination_oracle(const GronwallProblem& prob, std::size_t grid, std::size_t trials,
                                      std::uint64_t seed) {
  if (grid < 16) throw ConfigError("domination oracle: grid must have at least 16 cells");
  const double t0 = prob.t0, T = prob.T;
  const double dt = (T - t0) / static_cast<double>(grid);
  const auto s = prob.sigma.in_interval(t0, T);
  {
    double prev = t0;
    for (double sk : s) {
      if (sk - prev < 2.0 * dt) throw ConfigError("domination oracle: grid too coarse for the discontinuity spacing");
      prev = sk;
    }
  }
  std::vector<double> ts;
  for (std::size_t i = 0; i <= grid; ++i) ts.push_back(t0 + dt * static_cast<double>(i));
  for (double b : prob.a.breaks()) {
    if (b > t0 && b < T) ts.push_back(b);
  }
  for (double sk : s) ts.push_back(sk);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  ts.back() = T;

  GronwallBound hb(prob);
  std::vector<double> h_right(ts.size()), h_left(ts.size());
  std::vector<bool> is_jump(ts.size(), false);
  std::size_t k = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (k < s.size() && s[k] == ts[i]) {
      is_jump[i] = true;
      h_left[i] = hb.h(k, ts[i]);
      ++k;
    }
    h_right[i] = hb.h(k, ts[i]);
  }

  OracleReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto compare = [&](double y, double h, double t, long trial) {
    ++rep.points_checked;
    const double ex = y - h;
    const double rel = ex / (1.0 + h);
    if (ex > rep.worst_excess) {
      rep.worst_excess = ex;
      rep.worst_t = t;
      rep.worst_trial = trial;
    }
    rep.worst_relative = std::max(rep.worst_relative, rel);
    if (rel > 1e-7) rep.pass = false;
  };
  for (long trial = -1; trial < static_cast<long>(trials); ++trial) {
    const bool extremal = trial < 0;
    auto theta = [&]() { return extremal ? 1.0 : (u01(rng) < 0.2 ? 1.0 : u01(rng)); };
    double rhs = prob.p;  // p + sum a y dt + sum c omega(y-)
    double y = theta() * rhs;
    std::size_t kk = 0;
    compare(y, h_right[0], ts[0], trial);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      rhs += prob.a(ts[i]) * y * (ts[i + 1] - ts[i]);
      if (is_jump[i + 1]) {
        const double y_left = theta() * rhs;
        compare(y_left, h_left[i + 1], ts[i + 1], trial);
        rhs += prob.c_seq[kk++] * prob.omega(y_left);
      }
      y = theta() * rhs;
      compare(y, h_right[i + 1], ts[i + 1], trial);
    }
  }
  rep.trials = trials;
  return rep;
}

/// Bound of the form
///   beta(|x0|, t - t0 + n) + h_n^0((t - t0 + n) eta + kappa ||u_(t0,t]||_{chi_f,chi_g,gamma}, t - t0)
/// with n the number of impulses in (t0, t], a == L and c_j == 1.
inline double decay_envelope(const KLFunction& beta, double L, double kappa, double eta,
                             const ComparisonFunction& omega, const ComparisonFunction& chi_f,
                             const ComparisonFunction& chi_g, const ImpulseSequence& gamma, double t0, double t,
                             double x0_norm, const InputSignal& u) {
  const std::size_t n = count_impulses(gamma, t0, t);
  const double hyb = (t - t0) + static_cast<double>(n);
  const double energy = energy_norm(u, t0, t, gamma, chi_f, chi_g);
  const double p = hyb * eta + kappa * energy;
  return beta(x0_norm, hyb) + h_bound_const(p, L, std::vector<double>(n, 1.0), omega, n, t - t0);
}

}  // namespace impulsive
