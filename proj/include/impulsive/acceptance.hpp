#pragma once

// The acceptance battery: eleven property checks at desk scale. Each
// criterion returns a pass flag and a one-line summary of what it measured.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "impulsive/certify.hpp"
#include "impulsive/compfun.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/gronwall.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/simulator.hpp"
#include "impulsive/systems.hpp"

namespace impulsive::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;   ///< short tag usable with --only
  std::string title;
  std::function<CriterionResult(std::uint64_t)> run;
};

namespace detail {

inline std::string fmt_g(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline ImpulseSequence integer_impulses(int last, double horizon) {
  std::vector<double> ts;
  for (int i = 1; i <= last; ++i) ts.push_back(i);
  return ImpulseSequence(ts, horizon);
}

/// Random Gronwall instance: up to 5 discontinuities, a piecewise constant
/// and <= 2, omega from {id, sqrt, min(id, sqrt), min(2 id, 1 + ...)}.
inline GronwallProblem random_gronwall(std::mt19937_64& rng, double p_max = 2.0) {
  using CF = ComparisonFunction;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GronwallProblem g;
  g.t0 = 3.0 * U(rng);
  g.T = g.t0 + 1.0 + 3.0 * U(rng);
  g.p = p_max * U(rng);
  const auto jumps = static_cast<std::size_t>(rng() % 6);
  std::vector<double> s;
  // jumps at least 0.1 apart and away from t0
  while (s.size() < jumps) {
    const double c = g.t0 + 0.1 + (g.T - g.t0 - 0.1) * U(rng);
    bool ok = true;
    for (double v : s) ok = ok && std::abs(v - c) >= 0.1;
    if (ok) s.push_back(c);
  }
  std::sort(s.begin(), s.end());
  g.sigma = ImpulseSequence(s, g.T);
  const auto nb = static_cast<std::size_t>(rng() % 4);
  std::vector<double> breaks, values;
  for (std::size_t i = 0; i < nb; ++i) breaks.push_back(g.t0 + (g.T - g.t0) * U(rng));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (std::size_t i = 0; i <= breaks.size(); ++i) values.push_back(2.0 * U(rng));
  g.a = RateFunction::piecewise_constant(breaks, values);
  for (std::size_t i = 0; i < 5; ++i) g.c_seq.push_back(2.0 * U(rng));
  switch (rng() % 4) {
    case 0: g.omega = CF::identity(); break;
    case 1: g.omega = CF::affine_power(1.0, 0.5); break;
    case 2: g.omega = CF::min_of(CF::identity(), CF::affine_power(1.0, 0.5)); break;
    default: g.omega = CF::min_of(CF::linear(2.0), CF::affine_power(1.0, 0.5)); break;
  }
  return g;
}

inline InputSignal random_signal(std::mt19937_64& rng, double horizon, const ImpulseSequence& gamma) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const InputShape shapes[] = {InputShape::Step, InputShape::Sinusoid, InputShape::ImpulsivePoint};
  InputSignal u = make_input(shapes[rng() % 3], rng, 1, horizon, 0.5 + 3.0 * U(rng), gamma.times());
  if (rng() % 2 == 0) {
    // add a tabulated piece so every segment kind is exercised
    const double s = horizon * (0.3 + 0.4 * U(rng));
    std::vector<double> ts{s, s + 0.25 * (horizon - s), s + 0.5 * (horizon - s)};
    std::vector<Vector> vs{{3.0 * U(rng)}, {-3.0 * U(rng)}, {3.0 * U(rng)}};
    const auto& seg0 = u.segments().front();
    u = InputSignal(1, {{0.0, s, seg0.shape}, {s, horizon, SegmentShape::tabulated(ts, vs, rng() % 2 == 0)}},
                    u.point_values());
  }
  return u;
}

}  // namespace detail

/// 1. S1 closed form and equation residual.
inline CriterionResult closed_form(std::uint64_t) {
  CriterionResult r{1, "closed-form", false, "", 0.0};
  const auto gamma = detail::integer_impulses(9, 10.0);
  const auto sys = systems::s1();
  const InputSignal u = InputSignal::zero(10.0, 1);
  const Trajectory tr = simulate(sys, gamma, 0.0, {1.0}, u, 10.0);
  // independent closed form with the jump count taken directly from the list
  auto exact = [&](double t, bool left) {
    int n = 0;
    for (double tau : gamma.times()) n += (left ? tau < t : tau <= t) ? 1 : 0;
    return std::exp(-t) * std::pow(0.5, n);
  };
  double err = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = 10.0 * i / 4000.0;
    err = std::max(err, std::abs(tr.eval(t)[0] - exact(t, false)));
  }
  for (double tau : gamma.times()) err = std::max(err, std::abs(tr.eval_left(tau)[0] - exact(tau, true)));
  const double res = residual(tr, sys, gamma, u);
  r.pass = err <= 1e-8 && res <= 1e-6;
  r.detail = "max error " + detail::fmt_g(err) + ", residual " + detail::fmt_g(res);
  return r;
}

/// 2. Generalized Gronwall bound dominates the extremal and randomized sub-solutions.
inline CriterionResult gronwall_domination(std::uint64_t seed) {
  CriterionResult r{2, "gronwall", true, "", 0.0};
  std::mt19937_64 rng(seed);
  double worst = -1.0;
  std::size_t trials = 0;
  for (int i = 0; i < 200; ++i) {
    const auto prob = detail::random_gronwall(rng);
    const auto rep = domination_oracle(prob, 400, 200, seed + static_cast<std::uint64_t>(i));
    worst = std::max(worst, rep.worst_relative);
    trials += rep.trials + 1;
    if (rep.worst_relative > 1e-7) r.pass = false;
  }
  double zero_max = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto prob = detail::random_gronwall(rng);
    prob.p = 0.0;
    const GronwallBound hb(prob);
    for (int k = 0; k <= 20; ++k) {
      zero_max = std::max(zero_max, std::abs(hb(std::min(prob.T, prob.t0 + (prob.T - prob.t0) * k / 20.0))));
    }
  }
  r.pass = r.pass && zero_max == 0.0;
  r.detail = std::to_string(trials) + " sub-solutions, worst relative excess " + detail::fmt_g(worst) +
             ", p=0 max " + detail::fmt_g(zero_max);
  return r;
}

/// 3. h_k(p, r) e^{int_r^t a} <= h_k(p, t).
inline CriterionResult semigroup(std::uint64_t seed) {
  CriterionResult r{3, "semigroup", true, "", 0.0};
  std::mt19937_64 rng(seed + 1000);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  std::size_t checks = 0;
  for (int i = 0; i < 100; ++i) {
    const auto prob = detail::random_gronwall(rng);
    const GronwallBound hb(prob);
    for (int k = 0; k < 10; ++k) {
      double a = std::min(prob.T, prob.t0 + (prob.T - prob.t0) * U(rng));
      double b = std::min(prob.T, prob.t0 + (prob.T - prob.t0) * U(rng));
      if (a > b) std::swap(a, b);
      for (std::size_t j = 0; j <= hb.levels(); ++j) {
        const double lhs = hb.h(j, a) * std::exp(hb.A(b) - hb.A(a));
        const double rhs = hb.h(j, b);
        ++checks;
        if (lhs > rhs * (1.0 + 1e-9)) r.pass = false;
        if (rhs > 0.0) worst = std::max(worst, lhs / rhs - 1.0);
      }
    }
  }
  r.detail = std::to_string(checks) + " pairs, worst ratio - 1 = " + detail::fmt_g(worst);
  return r;
}

/// 4. Constant-rate bound depends on t - t0 only.
inline CriterionResult shift_invariance(std::uint64_t seed) {
  CriterionResult r{4, "shift", true, "", 0.0};
  std::mt19937_64 rng(seed + 2000);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto prob = detail::random_gronwall(rng);
    const double L = 2.0 * U(rng);
    prob.a = RateFunction::constant(L);
    const GronwallBound hb(prob);
    for (int k = 1; k <= 10; ++k) {
      const double t = std::min(prob.T, prob.t0 + (prob.T - prob.t0) * k / 10.0);
      const std::size_t j = count_impulses(prob.sigma, prob.t0, t);
      const double a = hb(t);
      const double b = h_bound_const(prob.p, L, prob.c_seq, prob.omega, j, t - prob.t0);
      const double d = std::abs(a - b) / std::max(1.0, std::abs(b));
      worst = std::max(worst, d);
      if (d > 1e-9) r.pass = false;
    }
  }
  r.detail = "50 instances, worst relative difference " + detail::fmt_g(worst);
  return r;
}

/// 5. Strong 0-GUAS for S1 and a too-fast decay rate.
inline CriterionResult guas_certificate(std::uint64_t seed) {
  CriterionResult r{5, "guas", false, "", 0.0};
  const auto gamma = detail::integer_impulses(9, 10.0);
  const Ensemble fam{{systems::s1(), gamma}};
  ScenarioSpec ss;
  ss.count = 50;
  ss.seed = seed;
  ss.t0_max = 3.0;
  ss.x0_max = 10.0;
  ss.point_times = gamma.times();
  const auto sc = make_scenarios(ss);
  EstimateSpec good;
  good.kind = EstimateKind::ZeroGUAS;
  good.beta = KLFunction::exponential(1.0, std::numbers::ln2);
  const auto ok = check_estimate(fam, good, sc);
  EstimateSpec bad = good;
  bad.beta = KLFunction::exponential(1.0, 2.0);
  const auto no = check_estimate(fam, bad, sc);
  bool between = false;
  double wt = 0.0;
  if (no.flow_witness && no.worst_flow_margin < -1e-7) {
    wt = no.flow_witness->t;
    const auto& ts = gamma.times();
    const auto hi = std::upper_bound(ts.begin(), ts.end(), wt);
    const double left = hi == ts.begin() ? 0.0 : *(hi - 1);
    const double right = hi == ts.end() ? gamma.horizon() : *hi;
    between = wt > left && wt < right && !gamma.contains(wt);
  }
  r.pass = ok.pass && !no.pass && between;
  r.detail = "correct beta margin " + detail::fmt_g(ok.worst_margin) + " over " + std::to_string(ok.checks) +
             " points; fast beta margin " + detail::fmt_g(no.worst_margin) + ", flow witness at t=" + detail::fmt_g(wt);
  return r;
}

/// 6. Strong ISS for S2, re-checked on an independent dense grid.
inline CriterionResult iss_certificate(std::uint64_t seed) {
  CriterionResult r{6, "iss", false, "", 0.0};
  const auto gamma = detail::integer_impulses(9, 10.0);
  const Ensemble fam{{systems::s2(), gamma}};
  ScenarioSpec ss;
  ss.count = 100;
  ss.seed = seed + 6;
  ss.shapes = {InputShape::Step, InputShape::Sinusoid, InputShape::ImpulsivePoint};
  ss.point_times = gamma.times();
  const auto sc = make_scenarios(ss);
  EstimateSpec iss;
  iss.kind = EstimateKind::ISS;
  iss.beta = KLFunction::exponential(1.0, std::numbers::ln2);
  iss.rho = ComparisonFunction::linear(2.0);
  const auto rep = check_estimate(fam, iss, sc);

  // independent check: fresh norms from t0 at every point of a uniform grid
  double dense = std::numeric_limits<double>::infinity();
  for (const auto& s : sc) {
    const Trajectory tr = simulate(fam[0].sys, gamma, s.t0, s.x0, s.u, 10.0);
    const double x0n = norm(s.x0);
    for (int i = 0; i <= 300; ++i) {
      const double t = std::min(10.0, s.t0 + (10.0 - s.t0) * i / 300.0);
      double n = 0.0;
      for (double tau : gamma.times()) n += (tau > s.t0 && tau <= t) ? 1.0 : 0.0;
      const double bound = x0n * std::exp(-std::numbers::ln2 * (t - s.t0 + n)) + 2.0 * sup_norm(s.u, s.t0, t, gamma);
      dense = std::min(dense, bound - std::abs(tr.eval(t)[0]));
    }
  }
  r.pass = rep.pass && dense >= -1e-7;
  r.detail = "checker margin " + detail::fmt_g(rep.worst_margin) + " over " + std::to_string(rep.checks) +
             " points, dense-grid margin " + detail::fmt_g(dense);
  return r;
}

/// 7. Norm identities: additivity, worked value, truncation, Chebyshev bounds.
inline CriterionResult norm_identities(std::uint64_t seed) {
  using CF = ComparisonFunction;
  CriterionResult r{7, "norms", true, "", 0.0};
  std::mt19937_64 rng(seed + 7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const ImpulseSequence one({1.0}, 10.0);
  const double worked = energy_norm(InputSignal::constant(10.0, {3.0}), 0.0, 2.0, one, CF::identity(), CF::identity());
  const bool worked_ok = worked == 9.0;
  double add_err = 0.0, trunc_excess = -1.0, cheb1 = -1.0, cheb2 = -1.0;
  const CF chi1 = CF::affine_power(1.0, 2.0), chi2 = CF::identity();
  for (int i = 0; i < 100; ++i) {
    const auto gamma = gen_dwell(0.5 + U(rng), 10.0, rng());
    const InputSignal u = detail::random_signal(rng, 10.0, gamma);
    const double a = 2.0 * U(rng), c = 8.0 + 2.0 * U(rng), b = a + (c - a) * U(rng);
    const double whole = energy_norm(u, a, c, gamma, chi1, chi2);
    const double parts = energy_norm(u, a, b, gamma, chi1, chi2) + energy_norm(u, b, c, gamma, chi1, chi2);
    add_err = std::max(add_err, std::abs(whole - parts) / std::max(1.0, whole));
    const double level = 3.0 * U(rng);
    trunc_excess = std::max(trunc_excess, sup_norm(truncate(u, level), 0.0, 10.0, gamma) - level);
    const double E = energy_norm(u, 0.0, 10.0, gamma, chi1, chi2);
    const auto ex = exceedance(u, level, gamma);
    cheb1 = std::max(cheb1, ex.measure * chi1(level) - E);
    cheb2 = std::max(cheb2, static_cast<double>(ex.impulse_count) * chi2(level) - E);
  }
  r.pass = worked_ok && add_err <= 1e-9 && trunc_excess <= 1e-12 && cheb1 <= 1e-9 && cheb2 <= 1e-9;
  r.detail = "worked value " + detail::fmt_g(worked) + ", additivity error " + detail::fmt_g(add_err) +
             ", truncation excess " + detail::fmt_g(trunc_excess) + ", Chebyshev excess " +
             detail::fmt_g(std::max(cheb1, cheb2));
  return r;
}

/// 8. Gain synthesis machinery.
inline CriterionResult gain_synthesis(std::uint64_t) {
  using CF = ComparisonFunction;
  CriterionResult r{8, "gains", true, "", 0.0};
  const IssCertificateData cert{KLFunction::exponential(1.0, 1.0), CF::identity()};
  const double tr = T_r(cert, 3.0);
  const bool tr_ok = std::abs(tr - (1.0 + std::log(3.0))) <= 1e-6;

  // P_f = 1 makes h_2^f = 1; L^f = 1, T = 1, s = 0, p = 1
  const RadiusData d{3.0, 1.0, 1.0, 1.0, 1.0, 1.0, tr};
  AssumptionEnvelopes env = AssumptionEnvelopes::from(systems::s2().assumptions);
  const double h0 = tilde_h(0, 1.0, 1.0, 0.0, d, env);
  const bool h0_ok = std::abs(h0 - std::numbers::e) <= 1e-12;

  bool p_ok = true;
  const double rs[] = {0.5, 1.0, 2.0, 4.0, 8.0}, ss[] = {0.0, 0.5, 1.0, 2.0, 4.0};
  for (double rr : rs) {
    const RadiusData dd = radius_data(rr, env, cert);
    const auto jmax = static_cast<std::size_t>(std::floor(dd.T_r));
    for (double s : ss) {
      const auto res = tilde_p_certified(rr, s, env, cert);
      bool feas = res.p > 0.0, infeas = false;
      for (std::size_t j = 0; j <= jmax; ++j) {
        const double T = dd.T_r - static_cast<double>(j);
        feas = feas && tilde_h(j, res.p, T, s, dd, env) <= dd.M_r / 2.0;
        infeas = infeas || tilde_h(j, res.infeasible, T, s, dd, env) > dd.M_r / 2.0;
      }
      p_ok = p_ok && feas && infeas && res.infeasible <= res.p * (1.0 + 1e-9) * (1.0 + 1e-12);
    }
  }

  const double e1 = ell(2.0, env, cert, 64), e10 = ell(2.0, env, cert, 640);
  const bool ell_ok = std::abs(e1 - e10) <= 0.02 * e10;

  GainGridSpec gs;
  gs.r_max = 12.0;
  const auto g = synthesize_ubebs_gain(env, cert, gs);
  const double hint = g.r_max / 3.0;
  bool cls = validate(g.kappa, 512).ok();
  for (const CF* f : {&g.alpha, &g.chi1, &g.chi2}) cls = cls && validate(f->with_domain_hint(hint), 512).ok();
  bool dom = true;
  for (int i = 0; i <= 400; ++i) {
    const double b = hint * i / 400.0;
    const double a2 = g.alpha(b) * g.alpha(b);
    dom = dom && g.chi1(b) >= a2 && g.chi2(b) >= a2;
  }
  r.pass = tr_ok && h0_ok && p_ok && ell_ok && cls && dom;
  r.detail = "T_r " + detail::fmt_g(tr) + ", h~_0 " + detail::fmt_g(h0) + ", p~ grid " + (p_ok ? "ok" : "FAIL") +
             ", ell(2) " + detail::fmt_g(e1) + " vs " + detail::fmt_g(e10) + ", classes " + (cls ? "ok" : "FAIL") +
             ", chi >= alpha^2 " + (dom ? "ok" : "FAIL");
  return r;
}

/// 9. ISS => iISS pipeline on {S1, S2}; a growing system stops at stage 1.
inline CriterionResult pipeline(std::uint64_t seed) {
  using CF = ComparisonFunction;
  CriterionResult r{9, "pipeline", false, "", 0.0};
  const auto gamma = detail::integer_impulses(9, 10.0);
  const Ensemble fam{{systems::s1(), gamma}, {systems::s2(), gamma}};
  const IssCertificateData cert{KLFunction::exponential(1.0, std::numbers::ln2), CF::linear(2.0)};
  const auto env = AssumptionEnvelopes::from(systems::s2().assumptions);
  ScenarioSpec ss;
  ss.count = 20;
  ss.seed = seed + 9;
  ss.point_times = gamma.times();
  const auto sc = make_scenarios(ss);
  const auto rep = pipeline_iss_to_iiss(fam, cert, env, sc);
  const Ensemble grow{{systems::unstable(), ImpulseSequence::empty(10.0)}};
  const auto bad = pipeline_iss_to_iiss(grow, cert, env, sc);
  const bool growth = bad.halted_at == 0u && bad.stages.front().report.witness &&
                      bad.stages.front().report.witness->lhs > bad.stages.front().report.witness->x0_norm;
  r.pass = rep.pass && rep.stages.size() == 4 && !bad.pass && growth;
  std::string margins;
  for (const auto& st : rep.stages) margins += (margins.empty() ? "" : ", ") + detail::fmt_g(st.report.worst_margin);
  r.detail = "stage margins [" + margins + "]; growing system halted at stage " +
             std::to_string(bad.halted_at.value_or(99) + 1);
  return r;
}

/// 10. Epsilon-delta probes and the iISS decomposition on an S1 family.
inline CriterionResult eps_delta(std::uint64_t seed) {
  using CF = ComparisonFunction;
  CriterionResult r{10, "probes", false, "", 0.0};
  const Ensemble fam{{systems::s1(), detail::integer_impulses(9, 10.0)},
                     {systems::s1(), gen_dwell(0.5, 10.0)},
                     {systems::s1(), gen_dwell(0.7, 10.0, seed)}};
  ProbeOptions po;
  po.seed = seed + 10;
  po.budget = 8;
  const auto pr = probe_eps_delta(fam, CF::identity(), CF::identity(), po);
  bool found = true;
  std::string deltas;
  for (const auto& d : pr.deltas) {
    found = found && d.status == ProbeStatus::Found && d.delta > 0.0;
    deltas += (deltas.empty() ? "" : ", ") + detail::fmt_g(d.delta);
  }
  ScenarioSpec ss;
  ss.count = 16;
  ss.seed = seed + 11;
  ss.point_times = impulse_times(fam);
  const auto sc = make_scenarios(ss);
  EstimateSpec iiss;
  iiss.kind = EstimateKind::iISS;
  iiss.alpha = CF::linear(0.5);
  iiss.beta = KLFunction::exponential(1.0, std::numbers::ln2);
  iiss.rho1 = CF::identity();
  iiss.rho2 = CF::identity();
  const auto meta = check_iiss_decomposition(fam, iiss, sc);
  r.pass = found && meta.iiss.pass && meta.holds;
  r.detail = "delta for eps {0.1, 0.5, 1}: {" + deltas + "}; iISS " + (meta.iiss.pass ? "pass" : "fail") +
             ", derived 0-GUAS " + (meta.guas.pass ? "pass" : "fail") + ", derived UBEBS " +
             (meta.ubebs.pass ? "pass" : "fail");
  return r;
}

/// 11. UIB families and weak/strong estimates.
inline CriterionResult uib_weak_strong(std::uint64_t seed) {
  CriterionResult r{11, "uib", false, "", 0.0};
  auto phi = [](double s) { return 2.0 * s + 1.0; };
  Ensemble fam;
  for (std::uint64_t k = 0; k < 3; ++k) {
    fam.push_back({systems::s1(), k == 0 ? gen_dwell(0.5, 10.0) : gen_dwell(0.5, 10.0, seed + k)});
  }
  std::vector<ImpulseSequence> dwell, packed;
  for (const auto& m : fam) dwell.push_back(m.gamma);
  for (int k = 1; k <= 50; ++k) {
    std::vector<double> ts;
    for (int i = 1; i <= k; ++i) ts.push_back(static_cast<double>(i) / k);
    packed.emplace_back(ts, 10.0);
  }
  const bool dwell_ok = check_uib(dwell, phi).pass;
  const bool packed_fails = !check_uib(packed, phi).pass;
  ScenarioSpec ss;
  ss.count = 16;
  ss.seed = seed + 12;
  const auto sc = make_scenarios(ss);
  EstimateSpec spec;
  spec.kind = EstimateKind::ZeroGUAS;
  spec.beta = KLFunction::exponential(1.0, std::numbers::ln2 / 2.0);
  const auto ws = check_weak_strong_equiv(fam, phi, spec, sc);
  r.pass = dwell_ok && packed_fails && ws.pass && ws.weak.pass;
  r.detail = std::string("dwell family ") + (dwell_ok ? "UIB" : "not UIB") + ", packed family " +
             (packed_fails ? "fails" : "passes") + "; " + std::to_string(ws.points) + " points, " +
             std::to_string(ws.implication_violations) + " strong-without-weak, surrogate margin " +
             detail::fmt_g(ws.surrogate.worst_margin);
  return r;
}

inline std::vector<Criterion> criteria() {
  return {
      {1, "closed-form", "S1 trajectory matches the closed form", closed_form},
      {2, "gronwall", "Gronwall bound dominates sub-solutions", gronwall_domination},
      {3, "semigroup", "semigroup inequality of h_k", semigroup},
      {4, "shift", "constant-rate bound is shift invariant", shift_invariance},
      {5, "guas", "strong 0-GUAS certificate for S1", guas_certificate},
      {6, "iss", "strong ISS certificate for S2", iss_certificate},
      {7, "norms", "norm identities", norm_identities},
      {8, "gains", "gain synthesis sanity", gain_synthesis},
      {9, "pipeline", "ISS to iISS pipeline", pipeline},
      {10, "probes", "epsilon-delta probes and iISS decomposition", eps_delta},
      {11, "uib", "UIB families and weak/strong estimates", uib_weak_strong},
  };
}

/// Runs the criteria whose tag or number is in `only` (all when empty).
/// Exceptions count as failures with the message as detail.
inline std::vector<CriterionResult> run(const std::vector<std::string>& only, std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (!only.empty() &&
        std::find_if(only.begin(), only.end(), [&](const std::string& s) {
          return s == c.name || s == std::to_string(c.id);
        }) == only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = c.run(seed);
    } catch (const std::exception& e) {
      res = {c.id, c.name, false, std::string("error: ") + e.what(), 0.0};
    }
    res.id = c.id;
    res.name = c.name;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(res);
  }
  return out;
}

/// One table row: status, number, tag, time, detail.
inline std::string format(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  [" << (r.id < 10 ? " " : "") << r.id << "] " << r.name;
  for (std::size_t i = r.name.size(); i < 12; ++i) os << ' ';
  os.setf(std::ios::fixed);
  os.precision(2);
  os << std::setw(7) << r.seconds << "s  " << r.detail;
  return os.str();
}

}  // namespace impulsive::acceptance
