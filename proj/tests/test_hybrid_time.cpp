#include <cmath>

#include <gtest/gtest.h>

#include "impulsive/errors.hpp"
#include "impulsive/hybrid_time.hpp"

using namespace impulsive;

namespace {
ImpulseSequence dwell_half() {
  std::vector<double> ts;
  for (int k = 1; k <= 19; ++k) ts.push_back(0.5 * k);
  return ImpulseSequence(ts, 10.0);
}
}  // namespace

TEST(HybridTime, CountImpulses) {
  const ImpulseSequence g({1.0, 2.0, 3.0}, 5.0);
  EXPECT_EQ(count_impulses(g, 0.5, 2.5), 2u);
  EXPECT_EQ(count_impulses(g, 1.0, 1.0), 0u);
  EXPECT_EQ(count_impulses(dwell_half(), 0.0, 9.9), 19u);
  // half-open: left end excluded, right end included
  EXPECT_EQ(count_impulses(g, 1.0, 2.0), 1u);
  EXPECT_EQ(count_impulses(g, 0.0, 1.0), 1u);
  EXPECT_THROW(count_impulses(g, 0.0, 6.0), DomainError);
}

TEST(HybridTime, HybridElapsed) {
  const ImpulseSequence g({1.0, 2.0, 3.0}, 5.0);
  EXPECT_DOUBLE_EQ(hybrid_elapsed(g, 0.0, 2.5), 4.5);
  EXPECT_DOUBLE_EQ(hybrid_elapsed(ImpulseSequence::empty(5.0), 1.0, 4.0), 3.0);
  EXPECT_DOUBLE_EQ(hybrid_elapsed(ImpulseSequence({0.1, 0.2, 0.3}, 1.0), 0.0, 0.25), 2.25);
  EXPECT_THROW(hybrid_elapsed(g, 2.0, 1.0), DomainError);
}

TEST(HybridTime, ClockMatchesCount) {
  const ImpulseSequence g({1.0, 2.0, 3.0}, 5.0);
  const auto c = HybridClock::at(g, 0.5, 3.0);
  EXPECT_EQ(c.jumps, 3u);
  EXPECT_DOUBLE_EQ(c.elapsed(), 5.5);
}

TEST(HybridTime, SequenceInvariants) {
  EXPECT_THROW(ImpulseSequence({0.0, 1.0}, 2.0), DomainError);
  EXPECT_THROW(ImpulseSequence({1.0, 1.0}, 2.0), DomainError);
  EXPECT_THROW(ImpulseSequence({1.0, 3.0}, 2.0), DomainError);
  EXPECT_THROW(ImpulseSequence({}, 0.0), DomainError);
  const ImpulseSequence g({1.0, 2.0}, 2.0);
  EXPECT_TRUE(g.contains(2.0));
  EXPECT_EQ(g.in_interval(1.0, 2.0), std::vector<double>{2.0});
}

TEST(HybridTime, UibDwellFamilyPasses) {
  // gaps >= 0.5 give at most 2 s + 1 impulses on any window of length s
  const auto phi = [](double s) { return 2.0 * s + 1.0; };
  std::vector<ImpulseSequence> fam{gen_dwell(0.5, 10.0), gen_dwell(0.5, 10.0, 1), gen_dwell(0.5, 10.0, 2)};
  const auto rep = check_uib(fam, phi);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.pairs_checked, 0u);
  EXPECT_FALSE(rep.limitation.empty());
}

TEST(HybridTime, UibPackedFamilyFails) {
  const auto phi = [](double s) { return 2.0 * s + 1.0; };
  std::vector<ImpulseSequence> fam;
  for (int k = 1; k <= 10; ++k) {
    std::vector<double> ts;
    for (int i = 1; i <= k; ++i) ts.push_back(static_cast<double>(i) / k);
    fam.emplace_back(ts, 10.0);
  }
  const auto rep = check_uib(fam, phi);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.first_failing.has_value());
  // [1/k, 1] holds k jumps against 2(1 - 1/k) + 1; k = 2 sits exactly on the bound
  EXPECT_EQ(*rep.first_failing, 2u);
  ASSERT_TRUE(rep.worst.has_value());
  EXPECT_GT(static_cast<double>(rep.worst->count), rep.worst->bound);

  // with s + 1 the k = 2 member already fails: 2 jumps in [1/2, 1] against 1.5
  const auto rep1 = check_uib(fam, [](double s) { return s + 1.0; });
  ASSERT_TRUE(rep1.first_failing.has_value());
  EXPECT_EQ(*rep1.first_failing, 1u);
}

TEST(HybridTime, GenDwellGaps) {
  const auto g = gen_dwell(0.5, 10.0);
  EXPECT_EQ(g.size(), 20u);
  const auto j = gen_dwell(0.3, 10.0, 42, 0.5);
  double prev = 0.0;
  for (double t : j.times()) {
    EXPECT_GE(t - prev, 0.3 - 1e-12);
    EXPECT_LT(t - prev, 0.45 + 1e-12);
    prev = t;
  }
  EXPECT_EQ(gen_dwell(0.3, 10.0, 42, 0.5).times(), j.times());
  EXPECT_THROW(gen_dwell(0.0, 1.0), DomainError);
}

TEST(HybridTime, PartitionHybrid) {
  const ImpulseSequence g({1.0, 2.0, 3.0}, 10.0);
  const auto s = partition_hybrid(g, 0.0, 2.0, 10.0);
  ASSERT_GE(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  // hybrid clock from 0 reaches 2 at the jump t = 1
  EXPECT_DOUBLE_EQ(s[1], 1.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GE(hybrid_elapsed(g, s[i - 1], s[i]), 2.0 - 1e-12);
  }
  // with no impulses the cells are exactly T~ long
  const auto e = partition_hybrid(ImpulseSequence::empty(10.0), 1.0, 3.0, 10.0);
  EXPECT_EQ(e, (std::vector<double>{1.0, 4.0, 7.0, 10.0}));
}
