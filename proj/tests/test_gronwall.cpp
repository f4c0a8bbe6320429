#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "impulsive/errors.hpp"
#include "impulsive/gronwall.hpp"

using namespace impulsive;
using CF = ComparisonFunction;

namespace {
GronwallProblem one_jump(double p, double a, double s1, double T) {
  GronwallProblem g;
  g.p = p;
  g.a = RateFunction::constant(a);
  g.c_seq = {1.0};
  g.sigma = ImpulseSequence({s1}, T);
  g.t0 = 0.0;
  g.T = T;
  return g;
}

GronwallProblem random_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GronwallProblem g;
  g.t0 = 3.0 * U(rng);
  g.T = g.t0 + 1.0 + 3.0 * U(rng);
  g.p = 2.0 * U(rng);
  std::vector<double> br{g.t0 + (g.T - g.t0) * 0.5};
  g.a = RateFunction::piecewise_constant(br, {2.0 * U(rng), 2.0 * U(rng)});
  std::vector<double> s;
  double t = g.t0;
  while (s.size() < 4) {
    t += 0.1 + U(rng);
    if (t > g.T) break;
    s.push_back(t);
  }
  for (std::size_t i = 0; i < s.size(); ++i) g.c_seq.push_back(U(rng));
  g.sigma = ImpulseSequence(s, g.T);
  g.omega = U(rng) < 0.5 ? CF::affine_power(1.0, 0.5) : CF::linear(1.5);
  return g;
}
}  // namespace

TEST(Gronwall, HBoundExamples) {
  auto z = one_jump(0.0, 1.0, 0.5, 1.0);
  EXPECT_EQ(h_bound(z, 1.0), 0.0);
  EXPECT_NEAR(h_bound(one_jump(2.0, 0.0, 0.5, 1.0), 0.8), 4.0, 1e-12);
  EXPECT_NEAR(h_bound(one_jump(1.0, 1.0, 0.5, 1.0), 1.0), 2.0 * std::exp(1.0), 1e-8);
  EXPECT_NEAR(h_bound(one_jump(1.0, 1.0, 0.5, 1.0), 0.4), std::exp(0.4), 1e-12);
}

TEST(Gronwall, HBoundConstExamples) {
  EXPECT_NEAR(h_bound_const(1.0, 0.0, {1.0}, CF::identity(), 1, 3.0), 2.0, 1e-12);
  EXPECT_NEAR(h_bound_const(3.0, 1.0, {}, CF::identity(), 0, std::log(2.0)), 6.0, 1e-12);
  EXPECT_EQ(h_bound_const(0.0, 1.0, {1.0, 1.0}, CF::identity(), 2, 1.0), 0.0);
}

TEST(Gronwall, Errors) {
  auto g = one_jump(1.0, 1.0, 0.5, 1.0);
  g.omega = CF::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0});
  EXPECT_THROW(h_bound(g, 1.0), ValidationError);
  auto short_c = one_jump(1.0, 1.0, 0.5, 1.0);
  short_c.c_seq.clear();
  EXPECT_THROW(h_bound(short_c, 1.0), DomainError);
  EXPECT_THROW(h_bound(one_jump(1.0, 1.0, 0.5, 1.0), 1.5), DomainError);
}

TEST(Gronwall, OracleExamples) {
  const auto rep = domination_oracle(one_jump(1.0, 1.0, 0.5, 1.0), 256, 20, 1);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.worst_excess, 0.0);

  GronwallProblem flat;
  flat.p = 2.0;
  flat.a = RateFunction::constant(0.0);
  flat.T = 1.0;
  EXPECT_TRUE(domination_oracle(flat, 64, 10, 2).pass);

  const auto a = domination_oracle(one_jump(1.0, 1.0, 0.5, 1.0), 128, 200, 9);
  const auto b = domination_oracle(one_jump(1.0, 1.0, 0.5, 1.0), 128, 200, 9);
  EXPECT_EQ(a.worst_excess, b.worst_excess);
  EXPECT_EQ(a.worst_trial, b.worst_trial);
  EXPECT_EQ(a.trials, 200u);
  EXPECT_THROW(domination_oracle(flat, 8, 1, 1), ConfigError);
}

TEST(Gronwall, OracleRandomInstances) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_problem(rng);
    const auto rep = domination_oracle(g, 400, 20, 100 + i);
    EXPECT_TRUE(rep.pass) << "instance " << i << " excess " << rep.worst_excess;
  }
}

TEST(Gronwall, MonotoneInJumpIndexPAndT) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 10; ++i) {
    auto g = random_problem(rng);
    g.c_seq.resize(8, 0.5);
    const GronwallBound h(g, 5);
    for (int k = 0; k <= 20; ++k) {
      const double t = g.t0 + (g.T - g.t0) * k / 20.0;
      for (std::size_t j = 0; j < 5; ++j) EXPECT_LE(h.h(j, t), h.h(j + 1, t) * (1 + 1e-12));
      if (k > 0) {
        const double tp = g.t0 + (g.T - g.t0) * (k - 1) / 20.0;
        EXPECT_LE(h.h(2, tp), h.h(2, t) * (1 + 1e-12));
      }
    }
    auto g2 = g;
    g2.p *= 1.5;
    const GronwallBound h2(g2, 5);
    EXPECT_LE(h.h(3, g.T), h2.h(3, g.T) * (1 + 1e-12));
  }
}

TEST(Gronwall, SemigroupInequality) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const auto g = random_problem(rng);
    const GronwallBound h(g);
    for (int k = 0; k < 10; ++k) {
      double r = g.t0 + (g.T - g.t0) * U(rng), t = g.t0 + (g.T - g.t0) * U(rng);
      if (r > t) std::swap(r, t);
      const std::size_t n = count_impulses(g.sigma, g.t0, r);
      const double lhs = h.h(n, r) * std::exp(g.a.integral(r, t));
      EXPECT_LE(lhs, h.h(n, t) * (1 + 1e-9));
    }
  }
}

TEST(Gronwall, ShiftInvariance) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double L = 2.0 * U(rng), t0 = 5.0 * U(rng), dt = 0.5 + 2.0 * U(rng);
    const double s1 = t0 + dt * (0.1 + 0.3 * U(rng)), s2 = t0 + dt * (0.5 + 0.4 * U(rng));
    GronwallProblem g;
    g.p = 1.0 + U(rng);
    g.a = RateFunction::constant(L);
    g.c_seq = {0.7, 1.3};
    g.omega = CF::affine_power(1.0, 0.5);
    g.sigma = ImpulseSequence({s1, s2}, t0 + dt);
    g.t0 = t0;
    g.T = t0 + dt;
    const double a = h_bound(g, t0 + dt);
    const double b = h_bound_const(g.p, L, g.c_seq, g.omega, 2, dt);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, b));
  }
}

TEST(Gronwall, DecayEnvelope) {
  const auto beta = KLFunction::exponential(1.0, 0.693);
  const auto id = CF::identity();
  const ImpulseSequence g({1.0}, 2.0);
  // no input and no offset: just beta
  EXPECT_DOUBLE_EQ(decay_envelope(beta, 1.0, 1.0, 0.0, id, id, id, g, 0.0, 2.0, 1.0, InputSignal::zero(2.0, 1)),
                   beta(1.0, 3.0));
  const double v = decay_envelope(beta, 1.0, 1.0, 0.1, id, id, id, g, 0.0, 2.0, 1.0, InputSignal::zero(2.0, 1));
  // p = 0.3, a = 1, one jump at 1 with omega = id: h_1 = 0.3 e^2 + 0.3 e^2 (sup at s = 1 of e^{s}e^{-s})
  EXPECT_NEAR(v, std::exp(-0.693 * 3.0) + 0.3 * std::exp(2.0) * 2.0, 1e-8);
  // no impulses: nonimpulsive form beta(r, t) + p e^{Lt}
  const double w = decay_envelope(beta, 1.0, 1.0, 0.1, id, id, id, ImpulseSequence::empty(2.0), 0.0, 2.0, 1.0,
                                  InputSignal::zero(2.0, 1));
  EXPECT_NEAR(w, beta(1.0, 2.0) + 0.2 * std::exp(2.0), 1e-10);
}
