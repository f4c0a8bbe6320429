#pragma once

// Trajectories of x' = f(t, x, u) between impulse times and
// x(tau) = x(tau-) + g(tau, x(tau-), u(tau)) at them.
//
// Only the solution produced by this deterministic stepper is computed; when
// solutions are not unique under nonzero inputs, results speak for that one.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/vector.hpp"

namespace impulsive {

using VectorField = std::function<Vector(double t, const Vector& xi, const Vector& mu)>;

/// Declared bounds on f and g. Any member may be absent; checks that need
/// an absent member raise ConfigError.
struct AssumptionData {
  // flow and jump growth: |f| <= N_f(|xi|)(1 + nu_f(|mu|)), likewise for g
  std::optional<ComparisonFunction> N_f, nu_f, N_g, nu_g;
  /// Lipschitz constant of f(t, ., 0) on the ball of radius R, as a function of R
  std::optional<ComparisonFunction> L_R;
  /// modulus of continuity of g(t, ., 0) on the sampled ball
  std::optional<ComparisonFunction> omega_R;
  // two-point envelopes
  std::optional<ComparisonFunction> phitilde_f, N_f_B, O_f, eta_f, P_f, phi_f, Lf;
  std::optional<ComparisonFunction> phitilde_g, N_g_B, O_g, eta_g, P_g, phi_g;
};

struct SystemModel {
  std::string name;
  std::size_t n = 1;  ///< state dimension
  std::size_t m = 1;  ///< input dimension
  VectorField flow;
  VectorField jump;  ///< increment: x(tau) = x(tau-) + jump(tau, x(tau-), u(tau))
  AssumptionData assumptions;
};

struct IntegratorOptions {
  enum class Method { RK45, RK4 };
  Method method = Method::RK45;
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = 0.02;
  double initial_step = 1e-3;
  double fixed_step = 1e-3;  ///< RK4 only
  double blowup = 1e12;
  double escape_resolution = 1e-6;
  std::size_t max_steps = 5'000'000;
};

struct TrajectoryNode {
  double t;
  Vector x;
  Vector dx;
};

/// Flow piece on [start, end] with its accepted step nodes.
struct FlowSegment {
  double start = 0.0;
  double end = 0.0;
  std::vector<TrajectoryNode> nodes;
};

struct JumpRecord {
  double tau;
  Vector left;
  Vector post;
  Vector input;
};

namespace detail {

inline Vector hermite(const TrajectoryNode& a, const TrajectoryNode& b, double t) {
  const double h = b.t - a.t;
  if (!(h > 0.0)) return a.x;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  Vector out(a.x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * a.x[i] + h10 * h * a.dx[i] + h01 * b.x[i] + h11 * h * b.dx[i];
  }
  return out;
}

inline Vector segment_eval(const FlowSegment& seg, double t) {
  const auto& nd = seg.nodes;
  if (t <= nd.front().t) return nd.front().x;
  if (t >= nd.back().t) return nd.back().x;
  auto it = std::upper_bound(nd.begin(), nd.end(), t, [](double v, const TrajectoryNode& n) { return v < n.t; });
  const std::size_t i = static_cast<std::size_t>(it - nd.begin());
  return hermite(nd[i - 1], nd[i], t);
}

}  // namespace detail

/// Right-continuous state path on [t0, end] (or [t0, escape_time) after a
/// finite escape) with left limits recorded at every jump.
class Trajectory {
 public:
  double t0 = 0.0;
  double end = 0.0;  ///< last time covered (horizon, or last good time before escape)
  bool escaped = false;
  std::optional<double> escape_time;  ///< T_x estimate when escaped
  std::vector<FlowSegment> segments;
  std::vector<JumpRecord> jumps;

  std::size_t dimension() const { return segments.front().nodes.front().x.size(); }

  bool in_domain(double t) const { return t >= t0 && t <= end; }

  /// x(t), right-continuous.
  Vector eval(double t) const {
    if (!in_domain(t)) throw DomainError("trajectory evaluated outside its domain");
    if (const auto* j = jump_at(t)) return j->post;
    // last segment whose start <= t
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const FlowSegment& s) { return v < s.start; });
    return detail::segment_eval(*(it - 1), t);
  }

  /// lim_{s -> t-} x(s).
  Vector eval_left(double t) const {
    if (!(t > t0) || t > end) throw DomainError("left limit requested outside (t0, end]");
    // first segment whose end >= t
    auto it = std::lower_bound(segments.begin(), segments.end(), t,
                               [](const FlowSegment& s, double v) { return s.end < v; });
    if (it == segments.end()) --it;
    return detail::segment_eval(*it, t);
  }

  const JumpRecord* jump_at(double t) const {
    auto it = std::lower_bound(jumps.begin(), jumps.end(), t, [](const JumpRecord& j, double v) { return j.tau < v; });
    if (it != jumps.end() && it->tau == t) return &*it;
    return nullptr;
  }

  /// Every stored node time, in order, with duplicates at breakpoints.
  std::vector<double> node_times() const {
    std::vector<double> ts;
    for (const auto& s : segments) {
      for (const auto& n : s.nodes) ts.push_back(n.t);
    }
    return ts;
  }

  std::size_t step_count() const {
    std::size_t k = 0;
    for (const auto& s : segments) k += s.nodes.size() - 1;
    return k;
  }
};

namespace detail {

struct StepResult {
  Vector x;
  Vector dx_end;
  double err;
};

// Dormand-Prince 5(4); dx0 is f at the start (FSAL).
template <class F>
StepResult dopri_step(const F& f, double t, const Vector& x, const Vector& dx0, double h, const IntegratorOptions& o) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  const std::size_t n = x.size();
  auto stage = [&](std::initializer_list<std::pair<double, const Vector*>> terms) {
    Vector y = x;
    for (const auto& [a, k] : terms) axpy(h * a, *k, y);
    return y;
  };
  const Vector& k1 = dx0;
  const Vector k2 = f(t + c2 * h, stage({{a21, &k1}}));
  const Vector k3 = f(t + c3 * h, stage({{a31, &k1}, {a32, &k2}}));
  const Vector k4 = f(t + c4 * h, stage({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vector k5 = f(t + c5 * h, stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vector k6 = f(t + h, stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  Vector y = stage({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  Vector k7 = f(t + h, y);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = o.abs_tol + o.rel_tol * std::max(std::abs(x[i]), std::abs(y[i]));
    err += (e / sc) * (e / sc);
  }
  err = n ? std::sqrt(err / static_cast<double>(n)) : 0.0;
  return {std::move(y), std::move(k7), err};
}

template <class F>
Vector rk4_step(const F& f, double t, const Vector& x, const Vector& k1, double h) {
  Vector y2 = x, y3 = x, y4 = x;
  axpy(0.5 * h, k1, y2);
  const Vector k2 = f(t + 0.5 * h, y2);
  axpy(0.5 * h, k2, y3);
  const Vector k3 = f(t + 0.5 * h, y3);
  axpy(h, k3, y4);
  const Vector k4 = f(t + h, y4);
  Vector y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return y;
}

inline bool blown_up(const Vector& x, double threshold) {
  for (double v : x) {
    if (!std::isfinite(v)) return true;
  }
  return norm(x) > threshold;
}

struct FlowOutcome {
  FlowSegment seg;
  bool escaped = false;
  double escape_time = 0.0;
};

/// Integrates x' = rhs(t, x) on [a, b] from xa. On blow-up the segment ends
/// at the last accepted state and the threshold crossing time is refined by
/// bisection on the length of the failing final stretch.
template <class F>
FlowOutcome integrate_flow(const F& rhs, double a, double b, Vector xa, const IntegratorOptions& o,
                           std::size_t& budget, bool refine_escape = true) {
  FlowOutcome out;
  out.seg.start = a;
  Vector dx = rhs(a, xa);
  out.seg.nodes.push_back({a, xa, dx});
  double t = a;
  Vector x = std::move(xa);
  double h = std::min({o.initial_step, o.max_step, b - a});
  if (o.method == IntegratorOptions::Method::RK4) h = std::min(o.fixed_step, b - a);
  auto fail_escape = [&](double lo_len, double hi_len) {
    // lo_len reaches the threshold safely, hi_len does not
    if (refine_escape) {
      while (hi_len - lo_len > o.escape_resolution) {
        const double mid = 0.5 * (lo_len + hi_len);
        std::size_t inner_budget = budget;
        auto probe = integrate_flow(rhs, t, t + mid, x, o, inner_budget, false);
        (probe.escaped ? hi_len : lo_len) = mid;
      }
    }
    out.escaped = true;
    out.escape_time = t + hi_len;
    out.seg.end = t;
  };
  while (t < b) {
    if (budget == 0) throw NumericalError("integrator step budget exhausted near t = " + std::to_string(t));
    --budget;
    const bool last = t + h >= b || b - (t + h) < 1e-12 * std::max(1.0, std::abs(b));
    const double step = last ? b - t : h;
    const double t_next = last ? b : t + step;
    if (o.method == IntegratorOptions::Method::RK4) {
      Vector y = rk4_step(rhs, t, x, dx, step);
      if (blown_up(y, o.blowup)) {
        fail_escape(0.0, step);
        return out;
      }
      dx = rhs(t_next, y);
      x = std::move(y);
      t = t_next;
      out.seg.nodes.push_back({t, x, dx});
      continue;
    }
    StepResult r = dopri_step(rhs, t, x, dx, step, o);
    const bool bad = blown_up(r.x, o.blowup);
    if (bad && norm(x) > 1e-3 * o.blowup) {
      fail_escape(0.0, step);
      return out;
    }
    if (bad || !std::isfinite(r.err) || r.err > 1.0) {
      const double factor = std::isfinite(r.err) && !bad ? std::max(0.2, 0.9 * std::pow(r.err, -0.2)) : 0.2;
      h = step * factor;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        if (blown_up(r.x, o.blowup) || norm(x) > 1e-6 * o.blowup) {
          fail_escape(0.0, step);
          return out;
        }
        throw NumericalError("step size underflow at t = " + std::to_string(t) + ", |x| = " + std::to_string(norm(x)));
      }
      continue;
    }
    t = t_next;
    x = std::move(r.x);
    dx = std::move(r.dx_end);
    out.seg.nodes.push_back({t, x, dx});
    const double grow = r.err > 0.0 ? std::min(5.0, 0.9 * std::pow(r.err, -0.2)) : 5.0;
    h = std::min(o.max_step, step * grow);
    if (last) h = std::min(o.max_step, std::max(h, step));
  }
  out.seg.end = b;
  return out;
}

}  // namespace detail

/// Solves the impulsive system from (t0, x0) on [t0, horizon]. Impulse times
/// and input breakpoints are hard integration breakpoints; jumps are applied
/// at every tau in gamma with t0 < tau <= horizon.
inline Trajectory simulate(const SystemModel& sys, const ImpulseSequence& gamma, double t0, const Vector& x0,
                           const InputSignal& u, double horizon, const IntegratorOptions& opt = {}) {
  if (!(t0 >= 0.0)) throw DomainError("simulate: t0 must be nonnegative");
  if (!(horizon > t0)) throw DomainError("simulate: horizon must exceed t0");
  if (x0.size() != sys.n) throw DomainError("simulate: x0 dimension mismatch");
  if (u.dimension() != sys.m) throw DomainError("simulate: input dimension mismatch");
  if (u.horizon() < horizon) throw DomainError("simulate: input shorter than the simulation horizon");

  std::vector<double> impulses = gamma.in_interval(t0, horizon);
  std::vector<double> cuts{t0, horizon};
  for (double b : u.breakpoints()) {
    if (b > t0 && b < horizon) cuts.push_back(b);
  }
  for (double tau : impulses) {
    if (tau < horizon) cuts.push_back(tau);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Trajectory traj;
  traj.t0 = t0;
  std::size_t budget = opt.max_steps;
  Vector x = x0;
  std::size_t next_jump = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const std::size_t piece = u.segment_index(0.5 * (a + b));
    auto rhs = [&](double t, const Vector& xi) { return sys.flow(t, xi, u.piece_value(piece, t)); };
    auto res = detail::integrate_flow(rhs, a, b, x, opt, budget);
    traj.segments.push_back(std::move(res.seg));
    if (res.escaped) {
      traj.escaped = true;
      traj.escape_time = res.escape_time;
      traj.end = traj.segments.back().end;
      return traj;
    }
    x = traj.segments.back().nodes.back().x;
    if (next_jump < impulses.size() && impulses[next_jump] == b) {
      const Vector mu = u.value_at(b);
      Vector post = x + sys.jump(b, x, mu);
      traj.jumps.push_back({b, x, post, mu});
      ++next_jump;
      if (detail::blown_up(post, opt.blowup)) {
        traj.escaped = true;
        traj.escape_time = b;
        traj.jumps.pop_back();
        traj.end = std::nextafter(b, -std::numeric_limits<double>::infinity());
        traj.segments.back().end = b;
        return traj;
      }
      x = std::move(post);
    }
  }
  traj.end = horizon;
  return traj;
}

namespace detail {

inline constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                   0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                     0.4786286704993665, 0.2369268850561891};

}  // namespace detail

/// Largest deviation from the integral identity
///   x(t) = x(t0) + int_{t0}^t f(s, x(s), u(s)) ds + sum_{tau in gamma, t0 < tau <= t} g(tau, x(tau-), u(tau))
/// over the node grid (and step midpoints) of the trajectory. The flow
/// integral uses 5-point Gauss-Legendre on the dense interpolant.
inline double residual(const Trajectory& traj, const SystemModel& sys, const ImpulseSequence& gamma,
                       const InputSignal& u) {
  const Vector x0 = traj.segments.front().nodes.front().x;
  const std::size_t n = x0.size();
  Vector integral(n, 0.0);
  std::vector<double> taus = gamma.in_interval(traj.t0, traj.end);
  std::vector<Vector> jump_terms;
  for (double tau : taus) jump_terms.push_back(sys.jump(tau, traj.eval_left(tau), u.value_at(tau)));
  double worst = 0.0;
  auto check = [&](double t, const Vector& xt, bool left) {
    Vector r = xt - x0 - integral;
    for (std::size_t k = 0; k < taus.size(); ++k) {
      if (taus[k] < t || (!left && taus[k] == t)) r = r - jump_terms[k];
    }
    worst = std::max(worst, norm(r));
  };
  for (const auto& seg : traj.segments) {
    const auto& nd = seg.nodes;
    if (nd.size() < 2) continue;
    const std::size_t piece = u.segment_index(0.5 * (seg.start + seg.end));
    auto fx = [&](double s) { return sys.flow(s, detail::segment_eval(seg, s), u.piece_value(piece, s)); };
    auto gauss = [&](double a, double b) {
      const double c = 0.5 * (a + b), r = 0.5 * (b - a);
      for (std::size_t q = 0; q < 5; ++q) axpy(r * detail::kGaussWeights[q], fx(c + r * detail::kGaussNodes[q]), integral);
    };
    check(nd.front().t, nd.front().x, false);
    for (std::size_t i = 0; i + 1 < nd.size(); ++i) {
      const double a = nd[i].t, b = nd[i + 1].t, mid = 0.5 * (a + b);
      gauss(a, mid);
      check(mid, detail::hermite(nd[i], nd[i + 1], mid), false);
      gauss(mid, b);
      check(b, nd[i + 1].x, i + 2 == nd.size());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sampled assumption checks

enum class AssumptionCheck {
  Blanket,        ///< f(t,0,0) = 0 and g(t,0,0) = 0
  FlowGrowth,     ///< |f| <= N_f(|xi|)(1 + nu_f(|mu|))
  JumpGrowth,     ///< |g| <= N_g(|xi|)(1 + nu_g(|mu|))
  FlowInputCont,  ///< |f(t,xi,mu) - f(t,xi,0)| <= eta + kappa nu_f(|mu|)
  JumpInputCont,  ///< same for g with nu_g
  FlowLipschitz,  ///< |f(t,xi1,0) - f(t,xi2,0)| <= L_R(R)|xi1 - xi2|
  JumpContinuity, ///< |g(t,xi1,0) - g(t,xi2,0)| <= omega_R(|xi1 - xi2|)
  FlowB1,
  FlowB2,
  FlowB3,  ///< eta_f(s) <= Lf(M) s on [0, M]
  JumpB1,
  JumpB2,
};

inline const char* to_string(AssumptionCheck c) {
  switch (c) {
    case AssumptionCheck::Blanket: return "blanket";
    case AssumptionCheck::FlowGrowth: return "flow-growth";
    case AssumptionCheck::JumpGrowth: return "jump-growth";
    case AssumptionCheck::FlowInputCont: return "flow-input-continuity";
    case AssumptionCheck::JumpInputCont: return "jump-input-continuity";
    case AssumptionCheck::FlowLipschitz: return "flow-lipschitz";
    case AssumptionCheck::JumpContinuity: return "jump-continuity";
    case AssumptionCheck::FlowB1: return "flow-B1";
    case AssumptionCheck::FlowB2: return "flow-B2";
    case AssumptionCheck::FlowB3: return "flow-B3";
    case AssumptionCheck::JumpB1: return "jump-B1";
    case AssumptionCheck::JumpB2: return "jump-B2";
  }
  return "?";
}

struct SampleSpec {
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  double t_max = 10.0;
  double state_radius = 2.0;  ///< R: states are drawn from the closed ball B_R
  double input_radius = 2.0;
  double eta = 0.1;    ///< input-continuity surrogate
  double kappa = 1.0;
  double tol = 1e-10;  ///< lhs <= rhs + tol (1 + rhs)
  /// Empty: every check whose envelopes are declared, plus Blanket.
  std::vector<AssumptionCheck> checks;
};

struct CheckResult {
  AssumptionCheck check;
  bool pass = true;
  std::size_t samples = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max of lhs - rhs
  std::string witness;  ///< description of the worst violating sample
};

struct AssumptionReport {
  std::vector<CheckResult> results;
  bool pass() const {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
  }
  const CheckResult* find(AssumptionCheck c) const {
    for (const auto& r : results) {
      if (r.check == c) return &r;
    }
    return nullptr;
  }
};

namespace detail {

inline Vector sample_ball(std::mt19937_64& rng, std::size_t dim, double radius) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(dim);
  for (double& x : v) x = g(rng);
  const double nv = norm(v);
  const double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(dim));
  if (nv == 0.0) return Vector(dim, 0.0);
  for (double& x : v) x *= r / nv;
  return v;
}

inline std::string describe(const Vector& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace detail

/// Randomized check of the declared growth, continuity, Lipschitz and
/// two-point envelope inequalities.
inline AssumptionReport validate_assumptions(const SystemModel& sys, const SampleSpec& spec = {}) {
  const auto& A = sys.assumptions;
  std::vector<AssumptionCheck> checks = spec.checks;
  if (checks.empty()) {
    checks.push_back(AssumptionCheck::Blanket);
    if (A.N_f && A.nu_f) checks.push_back(AssumptionCheck::FlowGrowth);
    if (A.N_g && A.nu_g) checks.push_back(AssumptionCheck::JumpGrowth);
    if (A.nu_f) checks.push_back(AssumptionCheck::FlowInputCont);
    if (A.nu_g) checks.push_back(AssumptionCheck::JumpInputCont);
    if (A.L_R) checks.push_back(AssumptionCheck::FlowLipschitz);
    if (A.omega_R) checks.push_back(AssumptionCheck::JumpContinuity);
    if (A.phitilde_f && A.N_f_B && A.O_f) checks.push_back(AssumptionCheck::FlowB1);
    if (A.eta_f && A.P_f && A.phi_f) checks.push_back(AssumptionCheck::FlowB2);
    if (A.eta_f && A.Lf) checks.push_back(AssumptionCheck::FlowB3);
    if (A.phitilde_g && A.N_g_B && A.O_g) checks.push_back(AssumptionCheck::JumpB1);
    if (A.eta_g && A.P_g && A.phi_g) checks.push_back(AssumptionCheck::JumpB2);
  }
  auto need = [&](const std::optional<ComparisonFunction>& f, const char* what, AssumptionCheck c) -> const ComparisonFunction& {
    if (!f) throw ConfigError(std::string("assumption check ") + to_string(c) + " needs envelope " + what);
    return *f;
  };

  AssumptionReport rep;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ut(0.0, spec.t_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double R = spec.state_radius, U = spec.input_radius;

  for (AssumptionCheck c : checks) {
    CheckResult res;
    res.check = c;
    auto record = [&](double lhs, double rhs, const std::string& where) {
      ++res.samples;
      const double excess = lhs - rhs;
      if (excess > res.worst_excess) {
        res.worst_excess = excess;
        if (lhs > rhs + spec.tol * (1.0 + std::abs(rhs))) res.witness = where;
      }
      if (lhs > rhs + spec.tol * (1.0 + std::abs(rhs))) res.pass = false;
    };
    const Vector zx(sys.n, 0.0), zu(sys.m, 0.0);
    for (std::size_t k = 0; k < spec.samples; ++k) {
      const double t = ut(rng);
      Vector xi1 = detail::sample_ball(rng, sys.n, R), xi2 = detail::sample_ball(rng, sys.n, R);
      Vector mu1 = detail::sample_ball(rng, sys.m, U), mu2 = detail::sample_ball(rng, sys.m, U);
      // close pairs probe local slopes
      if (k % 3 == 1) {
        const double shrink = std::pow(10.0, -6.0 * u01(rng));
        for (std::size_t i = 0; i < sys.n; ++i) xi2[i] = xi1[i] + shrink * (xi2[i] - xi1[i]);
        for (std::size_t i = 0; i < sys.m; ++i) mu2[i] = mu1[i] + shrink * (mu2[i] - mu1[i]);
        if (norm(xi2) > R) xi2 = (R / norm(xi2)) * xi2;
      }
      auto where = [&](std::string extra = {}) {
        return "t=" + std::to_string(t) + " xi=" + detail::describe(xi1) + " xi'=" + detail::describe(xi2) +
               " mu=" + detail::describe(mu1) + " mu'=" + detail::describe(mu2) + extra;
      };
      switch (c) {
        case AssumptionCheck::Blanket:
          record(norm(sys.flow(t, zx, zu)), 0.0, "flow at t=" + std::to_string(t));
          record(norm(sys.jump(t, zx, zu)), 0.0, "jump at t=" + std::to_string(t));
          break;
        case AssumptionCheck::FlowGrowth:
        case AssumptionCheck::JumpGrowth: {
          const bool fl = c == AssumptionCheck::FlowGrowth;
          const auto& N = need(fl ? A.N_f : A.N_g, fl ? "N_f" : "N_g", c);
          const auto& nu = need(fl ? A.nu_f : A.nu_g, fl ? "nu_f" : "nu_g", c);
          const Vector v = fl ? sys.flow(t, xi1, mu1) : sys.jump(t, xi1, mu1);
          record(norm(v), N(norm(xi1)) * (1.0 + nu(norm(mu1))), where());
          break;
        }
        case AssumptionCheck::FlowInputCont:
        case AssumptionCheck::JumpInputCont: {
          const bool fl = c == AssumptionCheck::FlowInputCont;
          const auto& nu = need(fl ? A.nu_f : A.nu_g, fl ? "nu_f" : "nu_g", c);
          const VectorField& F = fl ? sys.flow : sys.jump;
          record(distance(F(t, xi1, mu1), F(t, xi1, zu)), spec.eta + spec.kappa * nu(norm(mu1)), where());
          break;
        }
        case AssumptionCheck::FlowLipschitz: {
          const double L = need(A.L_R, "L_R", c)(R);
          record(distance(sys.flow(t, xi1, zu), sys.flow(t, xi2, zu)), L * distance(xi1, xi2), where());
          break;
        }
        case AssumptionCheck::JumpContinuity: {
          const auto& w = need(A.omega_R, "omega_R", c);
          record(distance(sys.jump(t, xi1, zu), sys.jump(t, xi2, zu)), w(distance(xi1, xi2)), where());
          break;
        }
        case AssumptionCheck::FlowB1:
        case AssumptionCheck::JumpB1: {
          const bool fl = c == AssumptionCheck::FlowB1;
          const auto& pt = need(fl ? A.phitilde_f : A.phitilde_g, "phitilde", c);
          const auto& N = need(fl ? A.N_f_B : A.N_g_B, "N (B1)", c);
          const auto& O = need(fl ? A.O_f : A.O_g, "O", c);
          const VectorField& F = fl ? sys.flow : sys.jump;
          const double lhs = distance(F(t, xi1, mu1), F(t, xi1, mu2));
          const double rhs = pt(distance(mu1, mu2)) * (N(norm(xi1)) + O(std::min(norm(mu1), norm(mu2))));
          record(lhs, rhs, where());
          break;
        }
        case AssumptionCheck::FlowB2:
        case AssumptionCheck::JumpB2: {
          const bool fl = c == AssumptionCheck::FlowB2;
          const auto& eta = need(fl ? A.eta_f : A.eta_g, "eta", c);
          const auto& P = need(fl ? A.P_f : A.P_g, "P", c);
          const auto& phi = need(fl ? A.phi_f : A.phi_g, "phi", c);
          const VectorField& F = fl ? sys.flow : sys.jump;
          const double lhs = distance(F(t, xi1, mu1), F(t, xi2, mu1));
          const double rhs = eta(distance(xi1, xi2)) * (P(std::min(norm(xi1), norm(xi2))) + phi(norm(mu1)));
          record(lhs, rhs, where());
          break;
        }
        case AssumptionCheck::FlowB3: {
          const auto& eta = need(A.eta_f, "eta_f", c);
          const auto& Lf = need(A.Lf, "Lf", c);
          const double M = 2.0 * R * u01(rng);
          const double s = M * u01(rng);
          record(eta(s), Lf(M) * s, "M=" + std::to_string(M) + " s=" + std::to_string(s));
          break;
        }
      }
    }
    rep.results.push_back(std::move(res));
  }
  return rep;
}

}  // namespace impulsive
