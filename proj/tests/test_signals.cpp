#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "impulsive/errors.hpp"
#include "impulsive/signals.hpp"

using namespace impulsive;
using CF = ComparisonFunction;

namespace {
InputSignal ramp(double horizon) {
  return InputSignal(1, {{0.0, horizon, SegmentShape::polynomial({{0.0, 1.0}})}});
}

InputSignal random_signal(std::mt19937_64& rng, const ImpulseSequence& gamma) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<SignalSegment> segs{
      {0.0, 3.0, SegmentShape::constant({U(rng)})},
      {3.0, 6.5, SegmentShape::sinusoid({U(rng)}, {1.0 + std::abs(U(rng))}, {U(rng)}, {U(rng)})},
      {6.5, 10.0, SegmentShape::polynomial({{U(rng), U(rng) / 4, U(rng) / 20}})}};
  std::map<double, Vector> pts;
  for (double t : gamma.times()) {
    if (U(rng) > 0.0) pts[t] = {2.0 * U(rng)};
  }
  return InputSignal(1, segs, pts);
}
}  // namespace

TEST(Signals, SupNormExamples) {
  const ImpulseSequence g({1.0}, 2.0);
  EXPECT_DOUBLE_EQ(sup_norm(InputSignal::constant(2.0, {3.0}), 0.0, 2.0, g), 3.0);
  EXPECT_DOUBLE_EQ(sup_norm(ramp(2.0).with_point_value(1.0, {5.0}), 0.0, 2.0, g), 5.0);
  EXPECT_NEAR(sup_norm(ramp(2.0), 0.0, 2.0, g), 2.0, 1e-12);
  EXPECT_EQ(sup_norm(InputSignal::zero(2.0, 1), 0.0, 2.0, g), 0.0);
  EXPECT_EQ(sup_norm(ramp(2.0), 1.0, 1.0, g), 0.0);
}

TEST(Signals, PointValueOutsideWindowIgnored) {
  // the impulse at 1 is outside (1, 2]
  const ImpulseSequence g({1.0}, 2.0);
  const auto u = InputSignal::constant(2.0, {1.0}).with_point_value(1.0, {7.0});
  EXPECT_DOUBLE_EQ(sup_norm(u, 1.0, 2.0, g), 1.0);
  EXPECT_DOUBLE_EQ(sup_norm(u, 0.5, 2.0, g), 7.0);
}

TEST(Signals, EnergyNormExamples) {
  const ImpulseSequence g({1.0}, 2.0);
  const auto id = CF::identity();
  EXPECT_DOUBLE_EQ(energy_norm(InputSignal::constant(2.0, {3.0}), 0.0, 2.0, g, id, id), 9.0);
  EXPECT_EQ(energy_norm(InputSignal::zero(2.0, 1), 0.0, 2.0, g, id, id), 0.0);
  EXPECT_NEAR(energy_norm(ramp(1.0), 0.0, 1.0, ImpulseSequence::empty(1.0), CF::affine_power(1.0, 2.0), id), 1.0 / 3.0,
              1e-10);
}

TEST(Signals, EnergyNormRejectsInvalidGain) {
  const auto bad = CF::custom([](double r) { return std::sin(r); }, FunctionKind::KInf, "sin", 10.0);
  EXPECT_THROW(energy_norm(ramp(1.0), 0.0, 1.0, ImpulseSequence::empty(1.0), bad, CF::identity()), ValidationError);
}

TEST(Signals, TruncateExamples) {
  const ImpulseSequence g({1.0}, 2.0);
  const auto u1 = truncate(InputSignal::constant(2.0, {3.0}), 1.0);
  EXPECT_DOUBLE_EQ(u1.value_at(0.7)[0], 1.0);
  const auto u2 = truncate(ramp(2.0), 1.0);
  for (double t : {0.0, 0.4, 1.0, 1.6, 2.0}) EXPECT_DOUBLE_EQ(u2.value_at(t)[0], std::min(t, 1.0));
  const auto u3 = truncate(ramp(2.0), 0.0);
  EXPECT_EQ(sup_norm(u3, 0.0, 2.0, g), 0.0);
  EXPECT_THROW(truncate(ramp(2.0), -1.0), DomainError);
}

TEST(Signals, TruncatePreservesDirection) {
  const auto u = InputSignal::constant(1.0, {3.0, -4.0});
  const auto v = truncate(u, 1.0).value_at(0.5);
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], -0.8, 1e-15);
}

TEST(Signals, ExceedanceExamples) {
  const auto e1 = exceedance(ramp(2.0), 1.0, ImpulseSequence::empty(2.0));
  EXPECT_NEAR(e1.measure, 1.0, 1e-9);
  const auto e2 = exceedance(InputSignal::zero(2.0, 1), 0.0, ImpulseSequence::empty(2.0));
  EXPECT_EQ(e2.measure, 0.0);
  EXPECT_EQ(e2.impulse_count, 0u);
  const auto e3 = exceedance(InputSignal::constant(2.0, {3.0}), 1.0, ImpulseSequence({1.0, 2.0}, 2.0));
  EXPECT_NEAR(e3.measure, 2.0, 1e-12);
  EXPECT_EQ(e3.impulse_count, 2u);
}

TEST(Signals, EnergyAdditivity) {
  std::mt19937_64 rng(17);
  const ImpulseSequence g({0.7, 2.0, 3.0, 5.5, 8.25}, 10.0);
  const auto chi1 = CF::affine_power(1.0, 2.0), chi2 = CF::identity();
  std::uniform_real_distribution<double> U(0.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    const auto u = random_signal(rng, g);
    double a = U(rng), b = U(rng), c = U(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const double sum = energy_norm(u, a, b, g, chi1, chi2) + energy_norm(u, b, c, g, chi1, chi2);
    EXPECT_NEAR(sum, energy_norm(u, a, c, g, chi1, chi2), 1e-9);
    // split exactly at an impulse time too
    const double s2 = energy_norm(u, 0.0, 3.0, g, chi1, chi2) + energy_norm(u, 3.0, 10.0, g, chi1, chi2);
    EXPECT_NEAR(s2, energy_norm(u, 0.0, 10.0, g, chi1, chi2), 1e-9);
  }
}

TEST(Signals, WindowMonotonicity) {
  std::mt19937_64 rng(19);
  const ImpulseSequence g({1.0, 4.0, 6.5, 9.0}, 10.0);
  const auto id = CF::identity();
  for (int i = 0; i < 10; ++i) {
    const auto u = random_signal(rng, g);
    EXPECT_LE(sup_norm(u, 2.0, 5.0, g), sup_norm(u, 1.0, 7.0, g));
    EXPECT_LE(energy_norm(u, 2.0, 5.0, g, id, id), energy_norm(u, 1.0, 7.0, g, id, id));
  }
}

TEST(Signals, TruncationBoundAndChebyshev) {
  std::mt19937_64 rng(23);
  const ImpulseSequence g({1.0, 2.5, 4.0, 7.0}, 10.0);
  const auto chi1 = CF::affine_power(1.0, 2.0), chi2 = CF::identity();
  for (int i = 0; i < 10; ++i) {
    const auto u = random_signal(rng, g);
    for (double b : {0.1, 0.5, 1.0, 1.5}) {
      EXPECT_LE(sup_norm(truncate(u, b), 0.0, 10.0, g), b + 1e-12);
      const auto ex = exceedance(u, b, g);
      const double E = energy_norm(u, 0.0, 10.0, g, chi1, chi2);
      EXPECT_LE(ex.measure * chi1(b), E + 1e-9);
      EXPECT_LE(static_cast<double>(ex.impulse_count) * chi2(b), E + 1e-9);
    }
  }
}

TEST(Signals, SignalInvariants) {
  EXPECT_THROW(InputSignal(1, {{0.5, 1.0, SegmentShape::constant({1.0})}}), DomainError);
  EXPECT_THROW(InputSignal(1, {{0.0, 1.0, SegmentShape::constant({1.0})}, {1.5, 2.0, SegmentShape::constant({1.0})}}),
               DomainError);
  EXPECT_THROW(InputSignal(2, {{0.0, 1.0, SegmentShape::constant({1.0})}}), DomainError);
  // point values default to the segment value
  const auto u = InputSignal::constant(2.0, {4.0});
  EXPECT_DOUBLE_EQ(u.value_at(1.0)[0], 4.0);
}
