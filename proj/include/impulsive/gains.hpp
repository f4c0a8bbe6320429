#pragma once

// Gain constructions: psi for iISS => UBEBS, the enlarged gains rho~, a
// sampled estimate of kappa(r*, eta), and the ISS => UBEBS synthesis
// (h_1^a, h_2^a, T_r, h~_j, p~, ell, kappa, alpha, chi_1, chi_2, Psi, alpha~).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/simulator.hpp"

namespace impulsive {

struct IssCertificateData {
  KLFunction beta;
  ComparisonFunction rho;
};

/// Two-point envelopes of f and g plus the local Lipschitz bound of eta_f.
struct AssumptionEnvelopes {
  struct Side {
    ComparisonFunction phitilde, eta, phi;  ///< class K-infinity
    ComparisonFunction N, O, P;             ///< nondecreasing, continuous
  };
  Side f, g;
  ComparisonFunction Lf;  ///< eta_f(s) <= Lf(M) s on [0, M]

  /// Pulls the envelopes out of a system's declared data.
  static AssumptionEnvelopes from(const AssumptionData& d) {
    auto req = [](const std::optional<ComparisonFunction>& f, const char* name) {
      if (!f) throw ConfigError(std::string("gain synthesis needs envelope ") + name);
      return *f;
    };
    AssumptionEnvelopes e;
    e.f = {req(d.phitilde_f, "phitilde_f"), req(d.eta_f, "eta_f"), req(d.phi_f, "phi_f"),
           req(d.N_f_B, "N_f (B1)"), req(d.O_f, "O_f"), req(d.P_f, "P_f")};
    e.g = {req(d.phitilde_g, "phitilde_g"), req(d.eta_g, "eta_g"), req(d.phi_g, "phi_g"),
           req(d.N_g_B, "N_g (B1)"), req(d.O_g, "O_g"), req(d.P_g, "P_g")};
    e.Lf = req(d.Lf, "Lf");
    return e;
  }
};

enum class Side { F, G };

/// (h_1^a, h_2^a)(r, b) = (N_a(beta(r,0) + rho(b)) + O_a(b), P_a(beta(r,0) + rho(b))).
inline std::pair<double, double> h12(Side side, double r, double b, const AssumptionEnvelopes& env,
                                     const IssCertificateData& cert) {
  if (r < 0.0 || b < 0.0) throw DomainError("h12: arguments must be nonnegative");
  const auto& e = side == Side::F ? env.f : env.g;
  const double q = cert.beta(r, 0.0) + cert.rho(b);
  return {e.N(q) + e.O(b), e.P(q)};
}

/// Smallest T > 1 (up to tol) with beta(r, T - 1) <= r/3.
inline double T_r(const IssCertificateData& cert, double r, double tol = 1e-12, double search_horizon = 1e7) {
  if (!(r > 0.0)) throw DomainError("T_r: r must be positive");
  const double target = r / 3.0;
  auto ok = [&](double t) { return cert.beta(r, t) <= target; };
  if (ok(0.0)) return 1.0 + tol;
  double lo = 0.0, hi = 1.0;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > search_horizon) throw HorizonError("T_r: beta(r, .) does not decay below r/3 within the search horizon");
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (ok(mid) ? hi : lo) = mid;
  }
  return std::max(1.0 + tol, 1.0 + hi);
}

/// Constants attached to a radius r: b_r = rho^{-1}(r/3), M_r = r/3,
/// L_r = Lf(M_r), h_2^f(r, b_r), h_2^g(r, b_r).
struct RadiusData {
  double r, b_r, M_r, L_r, h2f, h2g, T_r;
};

inline RadiusData radius_data(double r, const AssumptionEnvelopes& env, const IssCertificateData& cert) {
  RadiusData d;
  d.r = r;
  d.b_r = invert(cert.rho, r / 3.0, 1e-13 * std::max(1.0, r));
  d.M_r = r / 3.0;
  d.L_r = env.Lf(d.M_r);
  d.h2f = h12(Side::F, r, d.b_r, env, cert).second;
  d.h2g = h12(Side::G, r, d.b_r, env, cert).second;
  d.T_r = T_r(cert, r);
  return d;
}

/// h~_0 = p e^{[h_2^f T + s] L_r}, h~_j = h~_{j-1} + [h_2^g + s] e^{[h_2^f T + s] L_r} eta_g(h~_{j-1}).
inline double tilde_h(std::size_t j, double p, double T, double s, const RadiusData& d, const AssumptionEnvelopes& env) {
  if (p < 0.0 || T < 0.0 || s < 0.0) throw DomainError("tilde_h: arguments must be nonnegative");
  const double growth = std::exp((d.h2f * T + s) * d.L_r);
  double h = p * growth;
  for (std::size_t i = 1; i <= j; ++i) h += (d.h2g + s) * growth * env.g.eta(h);
  return h;
}

inline double tilde_h(std::size_t j, double p, double T, double r, double s, const AssumptionEnvelopes& env,
                      const IssCertificateData& cert) {
  return tilde_h(j, p, T, s, radius_data(r, env, cert), env);
}

struct TildePResult {
  double p;           ///< feasible: h~_j(p, T_r - j) <= M_r/2 at every corner
  double infeasible;  ///< p (1 + tol) or below; violates some corner
  std::size_t corners;
};

/// sup{p : h~_j(p, T, r, s) <= M_r/2 for all T >= 0, T + j <= T_r}. Since
/// h~_j is nondecreasing in T, only the corners T = T_r - j, j = 0..floor(T_r),
/// need checking. Log-space bisection until infeasible/feasible <= 1 + tol.
inline TildePResult tilde_p_certified(double r, double s, const AssumptionEnvelopes& env,
                                      const IssCertificateData& cert, double tol = 1e-9) {
  if (!(r > 0.0)) throw DomainError("tilde_p: r must be positive");
  const RadiusData d = radius_data(r, env, cert);
  const auto jmax = static_cast<std::size_t>(std::floor(d.T_r));
  auto feasible = [&](double p) {
    for (std::size_t j = 0; j <= jmax; ++j) {
      const double h = tilde_h(j, p, d.T_r - static_cast<double>(j), s, d, env);
      if (!(h <= d.M_r / 2.0)) return false;
    }
    return true;
  };
  double lo = d.M_r / 2.0, hi = lo;
  if (feasible(lo)) {
    do {
      hi *= 2.0;
      if (hi > 1e300) throw NumericalError("tilde_p: no infeasible p found");
    } while (feasible(hi));
    lo = hi / 2.0;
  } else {
    do {
      lo /= 2.0;
      if (lo < 1e-300) throw NumericalError("tilde_p: no feasible p found");
    } while (!feasible(lo));
    hi = lo * 2.0;
  }
  while (hi > lo * (1.0 + tol)) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    (feasible(mid) ? lo : hi) = mid;
  }
  return {lo, hi, jmax + 1};
}

inline double tilde_p(double r, double s, const AssumptionEnvelopes& env, const IssCertificateData& cert,
                      double tol = 1e-9) {
  return tilde_p_certified(r, s, env, cert, tol).p;
}

/// h_bar_1(r) (r - 1) / p~(r, r - 1)
inline double ell_ratio(double r, const AssumptionEnvelopes& env, const IssCertificateData& cert) {
  if (r <= 1.0) return 0.0;
  const RadiusData d = radius_data(r, env, cert);
  const double hbar = h12(Side::F, r, d.b_r, env, cert).first + h12(Side::G, r, d.b_r, env, cert).first;
  return hbar * (r - 1.0) / tilde_p(r, r - 1.0, env, cert);
}

/// sup over a log-spaced grid on [1, r_bar] of the ratio above.
inline double ell(double r_bar, const AssumptionEnvelopes& env, const IssCertificateData& cert, std::size_t grid = 64) {
  if (!(r_bar >= 1.0)) throw DomainError("ell: r_bar must be at least 1");
  if (r_bar == 1.0 || grid < 2) return 0.0;
  double best = 0.0;
  for (std::size_t i = 1; i < grid; ++i) {
    const double r = std::pow(r_bar, static_cast<double>(i) / static_cast<double>(grid - 1));
    best = std::max(best, ell_ratio(r, env, cert));
  }
  return best;
}

struct GainGridSpec {
  double r_max = 10.0;         ///< kappa is tabulated on [0, r_max]
  std::size_t knots = 64;      ///< log-spaced kappa knots on [1, r_max]
  std::size_t refine = 8;      ///< ell samples per knot cell
  double epsilon = 1e-6;       ///< linear term forcing strict growth
  double safety = 1.01;        ///< multiplicative margin on sampled ell
};

struct UbebsGainResult {
  ComparisonFunction kappa;
  ComparisonFunction alpha;  ///< alpha(b) = kappa(3 rho(b))
  ComparisonFunction chi1, chi2;
  ComparisonFunction psi_big;      ///< Psi(E)
  ComparisonFunction alpha_tilde;  ///< beta(r, 0) + 2r/3
  std::vector<std::pair<double, double>> ell_table;  ///< (r, ell(r)) running sup samples
  double r_max = 0.0;

  /// |x(t)| <= alpha~(|x0|) + alpha~(Psi(E)) with E the (chi1, chi2) energy of u.
  double state_bound(double x0_norm, double energy) const { return alpha_tilde(x0_norm) + alpha_tilde(psi_big(energy)); }
};

/// Builds kappa as a strictly increasing piecewise-linear majorant of the
/// sampled ell: on each knot cell it takes the running-sup value at the
/// right end of the cell (ell is nondecreasing), scaled by `safety`, plus
/// epsilon r. Past r_max kappa is undefined and evaluation throws.
inline UbebsGainResult synthesize_ubebs_gain(const AssumptionEnvelopes& env, const IssCertificateData& cert,
                                             const GainGridSpec& spec = {}) {
  using CF = ComparisonFunction;
  if (!(spec.r_max > 1.0)) throw DomainError("gain synthesis: r_max must exceed 1");
  if (spec.knots < 2) throw DomainError("gain synthesis: need at least 2 knots");
  UbebsGainResult out;
  out.r_max = spec.r_max;

  std::vector<double> knots;
  for (std::size_t i = 0; i < spec.knots; ++i) {
    knots.push_back(std::pow(spec.r_max, static_cast<double>(i) / static_cast<double>(spec.knots - 1)));
  }
  knots.back() = spec.r_max;
  // running sup of the ratio, sampled inside every cell
  std::vector<double> ell_at(knots.size(), 0.0);
  double run = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    for (std::size_t k = 1; k <= spec.refine; ++k) {
      const double r = knots[i - 1] * std::pow(knots[i] / knots[i - 1], static_cast<double>(k) / static_cast<double>(spec.refine));
      run = std::max(run, ell_ratio(r, env, cert));
      out.ell_table.emplace_back(r, run);
    }
    ell_at[i] = run;
  }
  std::vector<double> kr{0.0}, kv{0.0};
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double cell_top = ell_at[std::min(i + 1, knots.size() - 1)];
    kr.push_back(knots[i]);
    kv.push_back(spec.safety * cell_top + spec.epsilon * knots[i]);
  }
  for (std::size_t i = 1; i < kv.size(); ++i) {
    // epsilon r alone is lost to rounding once ell is large
    const double floor = kv[i - 1] * (1.0 + 1e-9) + spec.epsilon * (kr[i] - kr[i - 1]);
    if (kv[i] < floor) kv[i] = floor;
  }
  out.kappa = CF::tabulated(kr, kv, FunctionKind::KInf, false);

  const CF three_rho = compose(CF::linear(3.0), cert.rho);
  out.alpha = compose(out.kappa, three_rho);
  const CF alpha_sq = compose(CF::affine_power(1.0, 2.0), out.alpha);
  auto chi = [&](const AssumptionEnvelopes::Side& s) {
    return CF::max_of(CF::max_of(s.phi, compose(CF::affine_power(1.0, 2.0), s.phitilde)), alpha_sq);
  };
  out.chi1 = chi(env.f);
  out.chi2 = chi(env.g);

  const auto g = env.g;
  out.psi_big = CF::custom(
      [g](double E) {
        const double q = 1.0 + E;
        return q * (1.0 + g.N(q) + g.O(0.0)) + g.eta(q) * g.P(0.0);
      },
      FunctionKind::Nondecreasing, "Psi");
  out.alpha_tilde = CF::sum(cert.beta.at_zero(), CF::linear(2.0 / 3.0));
  return out;
}

/// psi(r) = min{beta_0^{-1}(r/2), r/2} with beta_0 = beta(., 0).
inline ComparisonFunction psi_from_iiss(const KLFunction& beta) {
  using CF = ComparisonFunction;
  const CF half = CF::linear(0.5);
  return CF::min_of(compose(inverse(beta.at_zero()), half), half);
}

/// (max{rho1, nu_f}, max{rho2, nu_g})
inline std::pair<ComparisonFunction, ComparisonFunction> rho_tilde(const ComparisonFunction& rho1,
                                                                   const ComparisonFunction& rho2,
                                                                   const ComparisonFunction& nu_f,
                                                                   const ComparisonFunction& nu_g) {
  return {ComparisonFunction::max_of(rho1, nu_f), ComparisonFunction::max_of(rho2, nu_g)};
}

struct KappaSampleSpec {
  std::size_t t_points = 64;
  std::size_t xi_points = 64;
  std::size_t mu_points = 64;
  double t_max = 10.0;
  double mu_max = 10.0;
  std::uint64_t seed = 1;
};

struct KappaEstimate {
  double kappa = 0.0;
  std::size_t samples = 0;
  /// The value is the largest ratio seen on the samples: a lower estimate of
  /// the true constant, never a proof.
  bool sampled_lower_estimate = true;
};

/// Smallest kappa with |F(t,xi,mu) - F(t,xi,0)| <= eta + kappa nu(|mu|) at
/// every sample, for F = f with nu_f and F = g with nu_g.
inline KappaEstimate estimate_kappa(const SystemModel& sys, double r_star, double eta,
                                    const KappaSampleSpec& spec = {}) {
  const auto& A = sys.assumptions;
  if (!A.nu_f || !A.nu_g) throw ConfigError("estimate_kappa needs nu_f and nu_g");
  if (!(r_star > 0.0) || !(eta > 0.0)) throw DomainError("estimate_kappa: r* and eta must be positive");
  std::mt19937_64 rng(spec.seed);
  KappaEstimate est;
  std::vector<Vector> xis;
  for (std::size_t i = 0; i < spec.xi_points; ++i) {
    Vector x = detail::sample_ball(rng, sys.n, r_star);
    if (i % 8 == 0 && norm(x) > 0.0) x = (r_star / norm(x)) * x;  // boundary points
    xis.push_back(std::move(x));
  }
  std::vector<Vector> mus;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < spec.mu_points; ++i) {
    const double mag = spec.mu_max * std::pow(1e-6, 1.0 - static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, spec.mu_points - 1)));
    Vector dir(sys.m);
    for (double& v : dir) v = gauss(rng);
    const double nd = norm(dir);
    mus.push_back(nd > 0.0 ? (mag / nd) * dir : Vector(sys.m, mag / std::sqrt(static_cast<double>(sys.m))));
  }
  const Vector zu(sys.m, 0.0);
  for (std::size_t it = 0; it < spec.t_points; ++it) {
    const double t = spec.t_max * static_cast<double>(it) / static_cast<double>(std::max<std::size_t>(1, spec.t_points - 1));
    for (const auto& xi : xis) {
      const Vector f0 = sys.flow(t, xi, zu), g0 = sys.jump(t, xi, zu);
      for (const auto& mu : mus) {
        const double nm = norm(mu);
        const double df = distance(sys.flow(t, xi, mu), f0);
        const double dg = distance(sys.jump(t, xi, mu), g0);
        est.samples += 2;
        for (auto [d, nu] : {std::pair{df, (*A.nu_f)(nm)}, std::pair{dg, (*A.nu_g)(nm)}}) {
          if (d <= eta) continue;
          if (!(nu > 0.0)) throw ValidationError("estimate_kappa: envelope inconsistent at mu -> 0");
          est.kappa = std::max(est.kappa, (d - eta) / nu);
        }
      }
    }
  }
  return est;
}

}  // namespace impulsive
