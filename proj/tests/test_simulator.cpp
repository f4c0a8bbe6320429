#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "impulsive/errors.hpp"
#include "impulsive/simulator.hpp"
#include "impulsive/systems.hpp"

using namespace impulsive;

namespace {
const ImpulseSequence kG123({1.0, 2.0, 3.0}, 10.0);
}

TEST(Simulator, S1ClosedForm) {
  const auto tr = simulate(systems::s1(), kG123, 0.0, {1.0}, InputSignal::zero(10.0, 1), 10.0);
  EXPECT_NEAR(tr.eval(2.5)[0], std::exp(-2.5) / 4.0, 1e-9);
  EXPECT_NEAR(tr.eval(2.5)[0], 0.020521, 1e-6);
  for (double t : {0.0, 0.5, 1.0, 1.7, 3.0, 6.0, 10.0}) {
    const double n = static_cast<double>(count_impulses(kG123, 0.0, t));
    EXPECT_NEAR(tr.eval(t)[0], std::exp(-t) * std::pow(0.5, n), 1e-9) << t;
  }
}

TEST(Simulator, ZeroEquilibrium) {
  const auto tr = simulate(systems::s2(), kG123, 0.0, {0.0}, InputSignal::zero(10.0, 1), 10.0);
  for (double t : {0.0, 1.0, 2.5, 9.9}) EXPECT_EQ(tr.eval(t)[0], 0.0);
  EXPECT_EQ(residual(tr, systems::s2(), kG123, InputSignal::zero(10.0, 1)), 0.0);
}

TEST(Simulator, LinearForcedResponse) {
  const auto tr = simulate(systems::s2(), ImpulseSequence::empty(1.0), 0.0, {0.0}, InputSignal::constant(1.0, {1.0}), 1.0);
  EXPECT_NEAR(tr.eval(1.0)[0], 1.0 - std::exp(-1.0), 1e-9);
}

TEST(Simulator, RightContinuityAndLeftLimits) {
  const auto tr = simulate(systems::s1(), kG123, 0.0, {1.0}, InputSignal::zero(10.0, 1), 10.0);
  EXPECT_NEAR(tr.eval_left(1.0)[0], std::exp(-1.0), 1e-9);
  EXPECT_NEAR(tr.eval(1.0)[0], std::exp(-1.0) / 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(tr.eval(1.5)[0], tr.eval_left(1.5)[0]);
  EXPECT_EQ(tr.eval(0.0)[0], 1.0);
  ASSERT_EQ(tr.jumps.size(), 3u);
  for (const auto& j : tr.jumps) {
    EXPECT_EQ(tr.eval(j.tau), j.post);
    EXPECT_NEAR(tr.eval_left(j.tau)[0], j.left[0], 1e-15);
    EXPECT_NEAR(j.post[0], j.left[0] / 2.0, 1e-15);
  }
  EXPECT_THROW(tr.eval(10.5), DomainError);
  EXPECT_THROW(tr.eval_left(0.0), DomainError);
}

TEST(Simulator, NoJumpAtInitialTime) {
  const auto tr = simulate(systems::s1(), kG123, 1.0, {1.0}, InputSignal::zero(10.0, 1), 10.0);
  EXPECT_EQ(tr.eval(1.0)[0], 1.0);
  EXPECT_EQ(tr.jumps.size(), 2u);
  EXPECT_NEAR(tr.eval(3.0)[0], std::exp(-2.0) / 4.0, 1e-9);
}

TEST(Simulator, Residual) {
  const SystemModel s1 = systems::s1();
  const auto u = InputSignal::zero(10.0, 1);
  IntegratorOptions opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-10;
  auto tr = simulate(s1, kG123, 0.0, {1.0}, u, 10.0, opt);
  EXPECT_LE(residual(tr, s1, kG123, u), 1e-6);

  // forget the jump at 1: residual is about |g| there
  const ImpulseSequence skipped({2.0, 3.0}, 10.0);
  const auto wrong = simulate(s1, skipped, 0.0, {1.0}, u, 10.0, opt);
  const double r = residual(wrong, s1, kG123, u);
  EXPECT_GT(r, 0.1);
  EXPECT_NEAR(r, std::exp(-1.0) / 2.0, 0.01);
}

TEST(Simulator, ResidualWithInput) {
  const SystemModel s2 = systems::s2();
  const auto u = InputSignal::from_function(10.0, 1, [](double t) { return Vector{std::sin(3.0 * t)}; })
                     .with_point_value(2.0, {4.0});
  const auto tr = simulate(s2, kG123, 0.3, {2.0}, u, 10.0);
  EXPECT_LE(residual(tr, s2, kG123, u), 100 * 1e-9 * 10);
}

TEST(Simulator, SemigroupProperty) {
  const SystemModel s2 = systems::s2();
  const auto u = InputSignal::from_function(10.0, 1, [](double t) { return Vector{std::cos(t)}; });
  const auto whole = simulate(s2, kG123, 0.0, {1.5}, u, 10.0);
  const auto first = simulate(s2, kG123, 0.0, {1.5}, u, 2.5);
  const auto second = simulate(s2, kG123, 2.5, first.eval(2.5), u, 10.0);
  for (double t : {3.0, 5.0, 10.0}) EXPECT_NEAR(second.eval(t)[0], whole.eval(t)[0], 1e-8);
  // restart exactly at an impulse time: the jump already happened
  const auto a = simulate(s2, kG123, 0.0, {1.5}, u, 2.0);
  const auto b = simulate(s2, kG123, 2.0, a.eval(2.0), u, 10.0);
  EXPECT_NEAR(b.eval(7.0)[0], whole.eval(7.0)[0], 1e-8);
}

TEST(Simulator, JumpCountMatchesSequence) {
  const auto g = gen_dwell(0.37, 10.0, 5);
  const auto tr = simulate(systems::s1(), g, 0.2, {1.0}, InputSignal::zero(10.0, 1), 10.0);
  EXPECT_EQ(tr.jumps.size(), count_impulses(g, 0.2, 10.0));
}

TEST(Simulator, GuasWitnessS1) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  for (int k = 0; k < 10; ++k) {
    const double t0 = U(rng), x0 = 2.0 * U(rng) - 5.0;
    const auto tr = simulate(systems::s1(), kG123, t0, {x0}, InputSignal::zero(10.0, 1), 10.0);
    for (int i = 0; i <= 100; ++i) {
      const double t = t0 + (10.0 - t0) * i / 100.0;
      if (t > 10.0) continue;
      const double bound = std::abs(x0) * std::exp(-std::log(2.0) * hybrid_elapsed(kG123, t0, t));
      EXPECT_LE(std::abs(tr.eval(t)[0]), bound + 1e-9);
    }
  }
}

TEST(Simulator, FiniteEscape) {
  // x' = x^2 from x0 = 1 escapes at t = 1
  const auto sys = systems::scalar_polynomial(0.0, 0.0, 0.0, 0.0, 0.0);
  SystemModel quad = sys;
  quad.flow = [](double, const Vector& x, const Vector&) { return Vector{x[0] * x[0]}; };
  const auto tr = simulate(quad, ImpulseSequence::empty(5.0), 0.0, {1.0}, InputSignal::zero(5.0, 1), 5.0);
  ASSERT_TRUE(tr.escaped);
  ASSERT_TRUE(tr.escape_time.has_value());
  EXPECT_NEAR(*tr.escape_time, 1.0, 1e-5);
}

TEST(Simulator, FixedStepRK4) {
  IntegratorOptions opt;
  opt.method = IntegratorOptions::Method::RK4;
  opt.fixed_step = 1e-3;
  const auto tr = simulate(systems::s1(), kG123, 0.0, {1.0}, InputSignal::zero(10.0, 1), 10.0, opt);
  EXPECT_NEAR(tr.eval(2.5)[0], std::exp(-2.5) / 4.0, 1e-10);
}

TEST(Simulator, InputErrors) {
  EXPECT_THROW(simulate(systems::s1(), kG123, -1.0, {1.0}, InputSignal::zero(10.0, 1), 10.0), DomainError);
  EXPECT_THROW(simulate(systems::s1(), kG123, 0.0, {1.0, 2.0}, InputSignal::zero(10.0, 1), 10.0), DomainError);
  EXPECT_THROW(simulate(systems::s1(), kG123, 0.0, {1.0}, InputSignal::zero(5.0, 1), 10.0), DomainError);
}

TEST(Simulator, AssumptionsS1Pass) {
  const auto rep = validate_assumptions(systems::s1());
  EXPECT_TRUE(rep.pass());
  EXPECT_NE(rep.find(AssumptionCheck::FlowLipschitz), nullptr);
  EXPECT_NE(rep.find(AssumptionCheck::JumpContinuity), nullptr);
}

TEST(Simulator, AssumptionsZeroSystemPass) {
  auto z = systems::scalar_linear(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  EXPECT_TRUE(validate_assumptions(z).pass());
}

TEST(Simulator, AssumptionsCubicLipschitzFails) {
  SystemModel cubic = systems::s1();
  cubic.flow = [](double, const Vector& x, const Vector&) { return Vector{-x[0] * x[0] * x[0]}; };
  cubic.assumptions = {};
  cubic.assumptions.L_R = ComparisonFunction::constant(1.0);
  SampleSpec spec;
  spec.state_radius = 2.0;
  spec.checks = {AssumptionCheck::FlowLipschitz};
  const auto rep = validate_assumptions(cubic, spec);
  EXPECT_FALSE(rep.pass());
  const auto* c = rep.find(AssumptionCheck::FlowLipschitz);
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->witness.empty());
}

TEST(Simulator, AssumptionsMissingEnvelope) {
  SystemModel s = systems::s1();
  s.assumptions = {};
  SampleSpec spec;
  spec.checks = {AssumptionCheck::FlowGrowth};
  EXPECT_THROW(validate_assumptions(s, spec), ConfigError);
}
