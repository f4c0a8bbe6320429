#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "impulsive/errors.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/systems.hpp"

using namespace impulsive;
using CF = ComparisonFunction;

namespace {
AssumptionEnvelopes constant_env(double N, double O, double P) {
  AssumptionEnvelopes e;
  AssumptionEnvelopes::Side s{CF::identity(), CF::identity(), CF::identity(), CF::constant(N), CF::constant(O),
                              CF::constant(P)};
  e.f = s;
  e.g = s;
  e.Lf = CF::constant(1.0);
  return e;
}

IssCertificateData exp_cert() { return {KLFunction::exponential(1.0, 1.0), CF::identity()}; }
}  // namespace

TEST(Gains, H12Examples) {
  const auto e = constant_env(1.0, 1.0, 1.0);
  const auto [h1, h2] = h12(Side::F, 3.0, 2.0, e, exp_cert());
  EXPECT_DOUBLE_EQ(h1, 2.0);
  EXPECT_DOUBLE_EQ(h2, 1.0);

  auto lin = constant_env(0.0, 0.0, 0.0);
  lin.f.N = CF::identity();
  EXPECT_DOUBLE_EQ(h12(Side::F, 1.0, 2.0, lin, exp_cert()).first, 3.0);

  auto all = constant_env(0.0, 0.0, 0.0);
  all.g.N = all.g.O = all.g.P = CF::identity();
  const auto z = h12(Side::G, 0.0, 0.0, all, exp_cert());
  EXPECT_EQ(z.first, 0.0);
  EXPECT_EQ(z.second, 0.0);
}

TEST(Gains, TrExamples) {
  EXPECT_NEAR(T_r(exp_cert(), 3.0), 1.0 + std::log(3.0), 1e-10);
  for (double r : {0.01, 1.0, 250.0}) EXPECT_NEAR(T_r(exp_cert(), r), 1.0 + std::log(3.0), 1e-9);
  const IssCertificateData rat{KLFunction(CF::identity(), CF::rational_decay(1.0, 1.0)), CF::identity()};
  EXPECT_NEAR(T_r(rat, 1.0), 3.0, 1e-9);
  EXPECT_GT(T_r(exp_cert(), 1.0), 1.0);
}

TEST(Gains, TrHorizonError) {
  const IssCertificateData slow{KLFunction(CF::identity(), CF::rational_decay(1.0, 1e-3)), CF::identity()};
  EXPECT_THROW(T_r(slow, 1.0, 1e-12, 1e3), HorizonError);
}

TEST(Gains, TildeHExamples) {
  auto e = constant_env(1.0, 0.0, 1.0);
  const auto cert = exp_cert();
  // radius with M_r = 1
  RadiusData d = radius_data(3.0, e, cert);
  EXPECT_DOUBLE_EQ(d.M_r, 1.0);
  EXPECT_EQ(tilde_h(3, 0.0, 1.0, 0.0, d, e), 0.0);
  EXPECT_NEAR(tilde_h(0, 1.0, 1.0, 0.0, d, e), std::exp(1.0), 1e-12);
  EXPECT_NEAR(tilde_h(1, 1.0, 1.0, 0.0, d, e), std::exp(1.0) + std::exp(2.0), 1e-12);
}

TEST(Gains, TildeHMonotone) {
  const auto e = constant_env(1.0, 0.5, 1.0);
  const auto cert = exp_cert();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const std::size_t j = i % 4;
    const double p = U(rng), T = 2 * U(rng), r = 0.5 + 5 * U(rng), s = U(rng);
    const double base = tilde_h(j, p, T, r, s, e, cert);
    EXPECT_LE(base, tilde_h(j + 1, p, T, r, s, e, cert));
    EXPECT_LE(base, tilde_h(j, p * 1.1, T, r, s, e, cert));
    EXPECT_LE(base, tilde_h(j, p, T + 0.1, r, s, e, cert));
    EXPECT_LE(base, tilde_h(j, p, T, r, s + 0.1, e, cert));
    // r enters through L^f(r/3) and P(beta(r, 0) + rho(b_r)); constants here, so equality is fine
    EXPECT_LE(base, tilde_h(j, p, T, r * 1.2, s, e, cert) * (1 + 1e-12));
  }
}

TEST(Gains, TildePCertified) {
  const auto e = constant_env(1.0, 0.0, 1.0);
  const auto cert = exp_cert();
  const double tol = 1e-9;
  const auto res = tilde_p_certified(3.0, 0.0, e, cert, tol);
  EXPECT_GT(res.p, 0.0);
  const auto d = radius_data(3.0, e, cert);
  const auto jmax = static_cast<std::size_t>(std::floor(d.T_r));
  bool infeasible = false;
  for (std::size_t j = 0; j <= jmax; ++j) {
    EXPECT_LE(tilde_h(j, res.p, d.T_r - j, 0.0, d, e), 0.5);
    infeasible = infeasible || tilde_h(j, res.infeasible, d.T_r - j, 0.0, d, e) > 0.5;
  }
  EXPECT_TRUE(infeasible);
  EXPECT_LE(res.infeasible, res.p * (1 + tol) * (1 + 1e-15));

  // loose tolerance still brackets
  const auto loose = tilde_p_certified(3.0, 0.0, e, cert, 2e-9);
  EXPECT_LE(loose.p, res.infeasible);
  EXPECT_GE(loose.infeasible, res.p);

  double prev = tilde_p(3.0, 0.0, e, cert);
  for (double s : {0.5, 1.0, 2.0}) {
    const double p = tilde_p(3.0, s, e, cert);
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(Gains, EllExamples) {
  const auto e = constant_env(1.0, 1.0, 1.0);
  const auto cert = exp_cert();
  EXPECT_EQ(ell(1.0, e, cert), 0.0);
  double prev = 0.0;
  for (double rb : {1.5, 2.0, 3.0, 5.0}) {
    const double v = ell(rb, e, cert);
    EXPECT_GE(v, prev);
    prev = v;
  }
  const double coarse = ell(2.0, e, cert, 64), fine = ell(2.0, e, cert, 640);
  EXPECT_TRUE(std::isfinite(coarse));
  EXPECT_NEAR(coarse, fine, 0.02 * fine);
}

TEST(Gains, SynthesisS2) {
  const auto env = AssumptionEnvelopes::from(systems::s2().assumptions);
  const IssCertificateData cert{KLFunction::exponential(1.0, std::numbers::ln2), CF::linear(2.0)};
  GainGridSpec spec;
  spec.r_max = 12.0;
  spec.knots = 24;
  const auto res = synthesize_ubebs_gain(env, cert, spec);
  EXPECT_EQ(res.alpha(0.0), 0.0);
  for (const auto& [r, l] : res.ell_table) EXPECT_LE(l, res.kappa(r));
  for (int i = 0; i <= 50; ++i) {
    const double b = 1.9 * i / 50.0;  // 3 rho(b) <= r_max
    const double a = res.alpha(b);
    EXPECT_GE(res.chi1(b), a * a - 1e-12);
    EXPECT_GE(res.chi2(b), a * a - 1e-12);
    EXPECT_GE(res.chi1(b), env.f.phi(b));
    EXPECT_GE(res.chi2(b), env.g.phi(b));
  }
  for (const auto* f : {&res.kappa, &res.chi1, &res.chi2, &res.alpha_tilde}) {
    EXPECT_TRUE(validate(f->with_domain_hint(std::min(f->domain_hint(), 1.9)), 256).ok());
  }
  double prev = res.psi_big(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double v = res.psi_big(0.2 * i);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Gains, PsiBigAtZero) {
  auto e = constant_env(1.0, 0.0, 1.0);
  e.g.phitilde = CF::identity();
  e.g.eta = CF::identity();
  GainGridSpec spec;
  spec.r_max = 4.0;
  spec.knots = 8;
  const auto res = synthesize_ubebs_gain(e, exp_cert(), spec);
  EXPECT_NEAR(res.psi_big(0.0), 3.0, 1e-12);
}

TEST(Gains, PsiFromIiss) {
  const auto p1 = psi_from_iiss(KLFunction::exponential(1.0, 1.0));
  const auto p2 = psi_from_iiss(KLFunction::exponential(2.0, 1.0));
  EXPECT_EQ(p1(0.0), 0.0);
  for (double r : {0.5, 1.0, 7.0}) {
    EXPECT_NEAR(p1(r), r / 2, 1e-9);
    EXPECT_NEAR(p2(r), r / 4, 1e-9);
  }
  // psi(2 beta_0(a)) + psi(2 b) <= a + b
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double a = U(rng), b = U(rng);
    EXPECT_LE(p2(2 * 2 * a) + p2(2 * b), a + b + 1e-8);
  }
}

TEST(Gains, RhoTilde) {
  const auto [r1, r2] = rho_tilde(CF::identity(), CF::identity(), CF::linear(0.5), CF::linear(0.5));
  for (double r : {0.0, 0.3, 4.0}) {
    EXPECT_DOUBLE_EQ(r1(r), r);
    EXPECT_DOUBLE_EQ(r2(r), r);
  }
  const auto [q1, q2] = rho_tilde(CF::affine_power(1.0, 2.0), CF::linear(3.0), CF::identity(), CF::identity());
  EXPECT_DOUBLE_EQ(q1(0.5), 0.5);
  EXPECT_DOUBLE_EQ(q1(2.0), 4.0);
  EXPECT_DOUBLE_EQ(q2(2.0), 6.0);
}

TEST(Gains, EstimateKappa) {
  const auto k = estimate_kappa(systems::s2(), 2.0, 0.1);
  EXPECT_LE(k.kappa, 1.0 + 1e-12);
  EXPECT_TRUE(k.sampled_lower_estimate);
  EXPECT_GT(k.samples, 0u);
  EXPECT_EQ(estimate_kappa(systems::s1(), 2.0, 0.1).kappa, 0.0);

  SystemModel cube = systems::s1();
  cube.flow = [](double, const Vector& x, const Vector& u) { return Vector{-x[0] + u[0] * u[0] * u[0]}; };
  cube.assumptions.nu_f = CF::affine_power(1.0, 3.0);
  EXPECT_LE(estimate_kappa(cube, 2.0, 0.1).kappa, 1.0 + 1e-9);

  SystemModel none = systems::s1();
  none.assumptions.nu_f.reset();
  EXPECT_THROW(estimate_kappa(none, 1.0, 0.1), ConfigError);
}
