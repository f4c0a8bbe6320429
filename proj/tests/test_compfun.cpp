#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"

using namespace impulsive;
using CF = ComparisonFunction;

TEST(CompFun, EvalExamples) {
  EXPECT_EQ(CF::identity()(0.0), 0.0);
  EXPECT_DOUBLE_EQ(CF::affine_power(1.0, 2.0)(3.0), 9.0);
  const auto f = CF::min_of(CF::affine_power(1.0, 0.5), CF::linear(0.5));
  EXPECT_DOUBLE_EQ(f(4.0), 2.0);
  EXPECT_THROW(CF::identity()(-1.0), DomainError);
}

TEST(CompFun, InvertExamples) {
  const auto sq = CF::affine_power(1.0, 2.0);
  EXPECT_NEAR(invert(sq, 9.0, 1e-10), 3.0, 1e-9);
  EXPECT_EQ(invert(sq, 0.0, 1e-10), 0.0);

  // r + ln(1 + r) at r = 2; oracle is the forward map
  const auto g = CF::sum(CF::identity(), CF::log1p(1.0));
  const double y = 2.0 + std::log(3.0);
  const double r = invert(g, y, 1e-12);
  EXPECT_NEAR(g(r), y, 1e-10);
  EXPECT_NEAR(r, 2.0, 1e-9);
}

TEST(CompFun, InvertErrors) {
  const auto bounded = CF::tabulated({0.0, 1.0}, {0.0, 1.0}, FunctionKind::K, false);
  EXPECT_THROW(invert(bounded, 5.0, 1e-10), RangeError);
  EXPECT_THROW(invert(CF::identity(), -1.0, 1e-10), DomainError);
}

TEST(CompFun, InvertNonMonotone) {
  // f(1) > y but the midpoint overshoots f(1)
  const auto s = CF::custom([](double r) { return std::sin(2.5 * r); }, FunctionKind::K, "sin", 1.0);
  EXPECT_THROW(invert(s, 0.55, 1e-10), ValidationError);
}

TEST(CompFun, ComposeExamples) {
  const auto g = CF::affine_power(3.0, 1.5);
  const auto idg = compose(CF::identity(), g);
  for (double r : {0.0, 0.3, 2.0, 17.0}) EXPECT_DOUBLE_EQ(idg(r), g(r));
  EXPECT_DOUBLE_EQ(compose(CF::linear(2.0), CF::affine_power(1.0, 2.0))(2.0), 8.0);
  EXPECT_NEAR(compose(CF::affine_power(1.0, 0.5), CF::affine_power(1.0, 4.0))(3.0), 9.0, 1e-12);
  EXPECT_EQ(compose(CF::identity(), CF::linear(2.0)).kind(), FunctionKind::KInf);
}

TEST(CompFun, ComposeDomainMismatch) {
  const auto small = CF::tabulated({0.0, 1.0}, {0.0, 1.0}, FunctionKind::KInf, false);
  // inner leaves the outer domain at 0.2, so the composite domain shrinks
  const auto c = compose(small, CF::linear(5.0).with_domain_hint(10.0));
  EXPECT_NEAR(c.domain_hint(), 0.2, 1e-9);
  EXPECT_NEAR(c(0.1), 0.5, 1e-12);
  // nothing usable left
  EXPECT_THROW(compose(small, CF::linear(1e15).with_domain_hint(1e6)), DomainError);
}

TEST(CompFun, KLExamples) {
  const auto b = KLFunction::exponential(1.0, 1.0);
  EXPECT_DOUBLE_EQ(b(1.0, 0.0), 1.0);
  EXPECT_NEAR(b(2.0, std::log(2.0)), 1.0, 1e-15);
  const auto b2 = KLFunction::exponential(1.0, 0.693);
  EXPECT_NEAR(b2(1.0, 1.0), std::exp(-0.693), 1e-15);
  EXPECT_NEAR(b2(1.0, 1.0), 0.5, 1e-4);
  EXPECT_EQ(b(0.0, 3.0), 0.0);
  EXPECT_THROW(b(-1.0, 0.0), DomainError);
  EXPECT_THROW(b(1.0, -1.0), DomainError);
}

TEST(CompFun, ValidateExamples) {
  EXPECT_TRUE(validate(CF::identity().with_domain_hint(10.0)).ok());
  // below pi sin stays nonnegative, so only the turn at the peak shows up
  const auto s = CF::custom([](double r) { return std::sin(r); }, FunctionKind::K, "sin", 3.0);
  const auto rep = validate(s);
  ASSERT_FALSE(rep.ok());
  bool near_peak = false;
  for (const auto& v : rep.violations) {
    if (v.type == Violation::Type::Monotonicity && std::abs(v.r - std::numbers::pi / 2) < 0.05) near_peak = true;
  }
  EXPECT_TRUE(near_peak);
  EXPECT_TRUE(validate(KLFunction::exponential(1.0, 1.0)).ok());
}

TEST(CompFun, ValidateZeroAtZero) {
  const auto shifted = CF::affine_power(1.0, 1.0, 0.5).with_kind(FunctionKind::K);
  const auto rep = validate(shifted);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations.front().type, Violation::Type::ZeroAtZero);
}

TEST(CompFun, ValidateKLDecay) {
  // amplitude r, decay constant: never decays
  const KLFunction flat(CF::identity(), CF::constant(1.0));
  EXPECT_FALSE(validate(flat).ok());
}

TEST(CompFun, InverseRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  const std::vector<CF> fs{CF::affine_power(2.0, 3.0), CF::log1p(0.5), CF::sum(CF::identity(), CF::log1p(1.0)),
                           CF::max_of(CF::affine_power(1.0, 0.5), CF::linear(0.1))};
  const double tol = 1e-10;
  for (const auto& f : fs) {
    for (int i = 0; i < 50; ++i) {
      const double r = U(rng);
      EXPECT_NEAR(invert(f, f(r), tol), r, std::max(2 * tol, 1e-9 * r)) << to_string(f.form());
    }
  }
}

TEST(CompFun, StrictIncreaseOnGrid) {
  const auto f = CF::min_of(CF::affine_power(1.0, 0.5), CF::linear(0.5));
  double prev = -1.0;
  for (int i = 0; i <= 2048; ++i) {
    const double v = f(1000.0 * i / 2048.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(CompFun, WeakSubadditivity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 100.0);
  const std::vector<CF> fs{CF::affine_power(1.0, 2.0), CF::affine_power(1.0, 0.3), CF::log1p(2.0),
                           CF::min_of(CF::affine_power(1.0, 0.5), CF::linear(0.5))};
  for (const auto& f : fs) {
    for (int i = 0; i < 500; ++i) {
      const double a = U(rng), b = U(rng);
      EXPECT_LE(f(a + b), f(2 * a) + f(2 * b) + 1e-12 * f(a + b));
    }
  }
}

TEST(CompFun, InverseFunctionObject) {
  const auto f = CF::affine_power(1.0, 2.0);
  const auto fi = inverse(f);
  EXPECT_NEAR(fi(16.0), 4.0, 1e-9);
  EXPECT_NEAR(compose(f, fi)(7.0), 7.0, 1e-8);
}

TEST(CompFun, TabulatedExtrapolation) {
  const auto t = CF::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 3.0});
  EXPECT_DOUBLE_EQ(t(1.5), 2.0);
  EXPECT_DOUBLE_EQ(t(3.0), 5.0);
  const auto closed = CF::tabulated({0.0, 1.0}, {0.0, 1.0}, FunctionKind::KInf, false);
  EXPECT_THROW(closed(2.0), DomainError);
}

TEST(CompFun, ConstructorsRejectBadParameters) {
  EXPECT_THROW(CF::exp_decay(-1.0, 1.0), DomainError);
  EXPECT_THROW(CF::log1p(0.0), DomainError);
  EXPECT_THROW(CF::tabulated({0.5, 1.0}, {0.0, 1.0}), DomainError);
  EXPECT_THROW(CF::tabulated({0.0, 0.0}, {0.0, 1.0}), DomainError);
}
