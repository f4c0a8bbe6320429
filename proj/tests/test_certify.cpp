#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "impulsive/certify.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/systems.hpp"

using namespace impulsive;
using CF = ComparisonFunction;

namespace {
const ImpulseSequence kInts({1, 2, 3, 4, 5, 6, 7, 8, 9}, 10.0);

std::vector<Scenario> scenarios(std::size_t n, std::uint64_t seed, const std::vector<double>& pts = kInts.times()) {
  ScenarioSpec s;
  s.count = n;
  s.seed = seed;
  s.point_times = pts;
  return make_scenarios(s);
}

EstimateSpec guas(double rate) {
  EstimateSpec e;
  e.kind = EstimateKind::ZeroGUAS;
  e.beta = KLFunction::exponential(1.0, rate);
  return e;
}

CheckOptions fast() {
  CheckOptions o;
  o.grid_points = 60;
  return o;
}
}  // namespace

TEST(Certify, GuasS1Passes) {
  const Ensemble fam{{systems::s1(), kInts}};
  const auto rep = check_estimate(fam, guas(std::numbers::ln2), scenarios(50, 1), fast());
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.worst_margin, -1e-7);
  EXPECT_EQ(rep.trajectories, 50u);
  EXPECT_GT(rep.checks, 50u * 60u);
  EXPECT_FALSE(rep.note.empty());
}

TEST(Certify, TooFastBetaFailsBetweenJumps) {
  const Ensemble fam{{systems::s1(), kInts}};
  const auto rep = check_estimate(fam, guas(2.0), scenarios(10, 2), fast());
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.witness);
  EXPECT_GT(rep.witness->lhs, rep.witness->bound);
  ASSERT_TRUE(rep.flow_witness);
  EXPECT_LT(rep.worst_flow_margin, 0.0);
  EXPECT_FALSE(kInts.contains(rep.flow_witness->t));
}

TEST(Certify, ZeroTrajectoryMarginIsBound) {
  const Ensemble fam{{systems::s2(), kInts}};
  std::vector<Scenario> sc{{0.5, {0.0}, InputSignal::zero(10.0, 1), "zero"}};
  EstimateSpec iss;
  iss.kind = EstimateKind::ISS;
  iss.beta = KLFunction::exponential(1.0, 1.0);
  iss.rho = CF::identity();
  const auto rep = check_estimate(fam, iss, sc, fast());
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.worst_margin, 0.0);
}

TEST(Certify, WeakModeUsesWallClock) {
  // weak beta(r, t - t0) = r e^{-(t - t0)} holds for S1 since jumps only shrink
  const Ensemble fam{{systems::s1(), kInts}};
  auto spec = guas(1.0);
  spec.mode = EstimateMode::Weak;
  EXPECT_TRUE(check_estimate(fam, spec, scenarios(10, 3), fast()).pass);
  // strong with rate 1 would need e^{-(dt + n)}, which S1 does not reach
  spec.mode = EstimateMode::Strong;
  EXPECT_FALSE(check_estimate(fam, spec, scenarios(10, 3), fast()).pass);
}

TEST(Certify, IssAndIissOnS2) {
  const Ensemble fam{{systems::s2(), kInts}};
  const auto sc = scenarios(20, 4);
  EstimateSpec iss;
  iss.kind = EstimateKind::ISS;
  iss.beta = KLFunction::exponential(1.0, std::numbers::ln2);
  iss.rho = CF::linear(2.0);
  EXPECT_TRUE(check_estimate(fam, iss, sc, fast()).pass);
  iss.rho = CF::linear(0.2);
  EXPECT_FALSE(check_estimate(fam, iss, sc, fast()).pass);

  // |x(t)| <= |x0| e^{-(dt)} + int |u| for x' = -x + u, jumps only shrink
  EstimateSpec iiss;
  iiss.kind = EstimateKind::iISS;
  iiss.mode = EstimateMode::Weak;
  iiss.alpha = CF::identity();
  iiss.beta = KLFunction::exponential(1.0, 1.0);
  iiss.rho1 = CF::identity();
  iiss.rho2 = CF::identity();
  EXPECT_TRUE(check_estimate(fam, iiss, sc, fast()).pass);
}

TEST(Certify, UbebsWithOffset) {
  const Ensemble fam{{systems::s2(), kInts}};
  EstimateSpec u;
  u.kind = EstimateKind::UBEBS;
  u.alpha = CF::identity();
  u.rho1 = CF::identity();
  u.rho2 = CF::identity();
  EXPECT_TRUE(check_estimate(fam, u, scenarios(12, 5), fast()).pass);
  u.c = -1.0;
  EXPECT_THROW(u.validate(), ConfigError);
}

TEST(Certify, SpecValidation) {
  EstimateSpec e;
  e.kind = EstimateKind::ISS;
  e.beta = KLFunction::exponential(1.0, 1.0);
  EXPECT_THROW(e.validate(), ConfigError);  // no rho
  EstimateSpec g = guas(1.0);
  g.c = 1.0;
  EXPECT_THROW(g.validate(), ConfigError);
  EstimateSpec flat;
  flat.beta = KLFunction(CF::identity(), CF::constant(1.0));
  EXPECT_THROW(flat.validate(), ValidationError);
}

TEST(Certify, EscapeIsReportedNotFailed) {
  SystemModel quad = systems::s1();
  quad.flow = [](double, const Vector& x, const Vector&) { return Vector{x[0] * x[0]}; };
  const Ensemble fam{{quad, ImpulseSequence::empty(10.0)}};
  std::vector<Scenario> sc{{0.0, {1.0}, InputSignal::zero(10.0, 1), "blowup"}};
  EstimateSpec loose = guas(1e-3);
  loose.beta = KLFunction(CF::linear(1e15), CF::exp_decay(1.0, 1e-3));
  const auto rep = check_estimate(fam, loose, sc, fast());
  ASSERT_EQ(rep.escapes.size(), 1u);
  EXPECT_NEAR(rep.escapes.front().escape_time, 1.0, 1e-4);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.inconsistent);
}

TEST(Certify, Deterministic) {
  const Ensemble fam{{systems::s2(), kInts}, {systems::s2(), gen_dwell(0.6, 10.0, 4)}};
  EstimateSpec iss;
  iss.kind = EstimateKind::ISS;
  iss.beta = KLFunction::exponential(1.0, 0.5);
  iss.rho = CF::linear(1.0);
  auto o1 = fast();
  o1.threads = 1;
  auto o4 = fast();
  o4.threads = 4;
  const auto a = check_estimate(fam, iss, scenarios(16, 6), o1);
  const auto b = check_estimate(fam, iss, scenarios(16, 6), o4);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.checks, b.checks);
  ASSERT_EQ(a.witness.has_value(), b.witness.has_value());
  if (a.witness) {
    EXPECT_EQ(a.witness->member, b.witness->member);
    EXPECT_EQ(a.witness->scenario, b.witness->scenario);
    EXPECT_EQ(a.witness->t, b.witness->t);
  }
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].min_margin, b.runs[i].min_margin);
}

TEST(Certify, ScenarioGenerationDeterministic) {
  const auto a = scenarios(12, 9), b = scenarios(12, 9);
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].x0, b[i].x0);
    EXPECT_EQ(a[i].t0, b[i].t0);
  }
}

TEST(Certify, ProbesOnS1) {
  const Ensemble fam{{systems::s1(), kInts}, {systems::s1(), gen_dwell(0.5, 10.0)}};
  ProbeOptions po;
  po.budget = 6;
  po.eps_grid = {0.1, 1.0};
  po.r_grid = {1.0};
  po.s_grid = {1.0};
  po.T_cells = {2.0};
  po.check.grid_points = 60;
  const auto rep = probe_eps_delta(fam, CF::identity(), CF::identity(), po);
  ASSERT_EQ(rep.deltas.size(), 2u);
  for (const auto& d : rep.deltas) {
    EXPECT_EQ(d.status, ProbeStatus::Found);
    EXPECT_GT(d.delta, 0.0);
    EXPECT_LE(d.delta, d.eps);
    EXPECT_FALSE(d.trace.empty());
  }
  for (const auto& s : rep.settles) EXPECT_EQ(s.status, ProbeStatus::Found);
  ASSERT_FALSE(rep.bounds.empty());
  EXPECT_TRUE(std::isfinite(rep.bounds.front().C));
}

TEST(Certify, ProbesUnstableInconclusive) {
  const Ensemble fam{{systems::unstable(), ImpulseSequence::empty(10.0)}};
  ProbeOptions po;
  po.budget = 4;
  po.eps_grid = {0.5};
  po.r_grid = {1.0};
  po.s_grid = {0.5};
  po.T_cells = {2.0};
  po.check.grid_points = 40;
  const auto rep = probe_eps_delta(fam, CF::identity(), CF::identity(), po);
  ASSERT_FALSE(rep.settles.empty());
  for (const auto& s : rep.settles) {
    EXPECT_EQ(s.status, ProbeStatus::Inconclusive);
    EXPECT_EQ(s.trace.size(), po.T_search.size());
  }
}

TEST(Certify, ProbeBudgetErrors) {
  const Ensemble fam{{systems::s1(), kInts}};
  ProbeOptions po;
  po.budget = 0;
  EXPECT_THROW(probe_eps_delta(fam, CF::identity(), CF::identity(), po), ConfigError);
  EXPECT_THROW(probe_eps_delta({}, CF::identity(), CF::identity(), {}), ConfigError);
}

TEST(Certify, IissDecompositionMeta) {
  const Ensemble fam{{systems::s1(), kInts}, {systems::s1(), gen_dwell(0.5, 10.0)}};
  EstimateSpec iiss;
  iiss.kind = EstimateKind::iISS;
  iiss.alpha = CF::linear(0.5);
  iiss.beta = KLFunction::exponential(1.0, std::numbers::ln2);
  iiss.rho1 = CF::identity();
  iiss.rho2 = CF::identity();
  const auto sc = scenarios(8, 10, impulse_times(fam));
  const auto rep = check_iiss_decomposition(fam, iiss, sc, fast());
  EXPECT_TRUE(rep.iiss.pass);
  EXPECT_TRUE(rep.guas.pass);
  EXPECT_TRUE(rep.ubebs.pass);
  EXPECT_TRUE(rep.holds);
  EXPECT_THROW(check_iiss_decomposition(fam, guas(1.0), sc, fast()), ConfigError);
}

TEST(Certify, WeakStrongDwellFamily) {
  auto phi = [](double s) { return 2.0 * s + 1.0; };
  const Ensemble fam{{systems::s1(), gen_dwell(0.5, 10.0)}, {systems::s1(), gen_dwell(0.5, 10.0, 3)}};
  const auto rep = check_weak_strong_equiv(fam, phi, guas(std::numbers::ln2 / 2), scenarios(8, 11), fast());
  EXPECT_TRUE(rep.uib.pass);
  EXPECT_TRUE(rep.strong.pass);
  EXPECT_TRUE(rep.weak.pass);
  EXPECT_TRUE(rep.surrogate.pass);
  EXPECT_EQ(rep.implication_violations, 0u);
  EXPECT_TRUE(rep.pass);
}

TEST(Certify, WeakStrongPackedFamilyPrecondition) {
  auto phi = [](double s) { return 2.0 * s + 1.0; };
  std::vector<double> ts;
  for (int i = 1; i <= 10; ++i) ts.push_back(i / 10.0);
  const Ensemble fam{{systems::s1(), ImpulseSequence(ts, 10.0)}};
  EXPECT_THROW(check_weak_strong_equiv(fam, phi, guas(0.3), scenarios(4, 12), fast()), PreconditionError);
}

TEST(Certify, PipelineS1S2) {
  const Ensemble fam{{systems::s1(), kInts}, {systems::s2(), kInts}};
  const IssCertificateData cert{KLFunction::exponential(1.0, std::numbers::ln2), CF::linear(2.0)};
  const auto env = AssumptionEnvelopes::from(systems::s2().assumptions);
  PipelineOptions po;
  po.check = fast();
  const auto rep = pipeline_iss_to_iiss(fam, cert, env, scenarios(12, 13), po);
  ASSERT_EQ(rep.stages.size(), 4u);
  for (const auto& st : rep.stages) EXPECT_TRUE(st.pass) << st.name << ": " << st.detail;
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.halted_at.has_value());
  EXPECT_TRUE(rep.gains.has_value());
  EXPECT_TRUE(rep.iiss.has_value());
}

TEST(Certify, PipelineHaltsOnGrowth) {
  const Ensemble fam{{systems::unstable(), ImpulseSequence::empty(10.0)}};
  const IssCertificateData cert{KLFunction::exponential(1.0, std::numbers::ln2), CF::linear(2.0)};
  const auto env = AssumptionEnvelopes::from(systems::s2().assumptions);
  PipelineOptions po;
  po.check = fast();
  const auto rep = pipeline_iss_to_iiss(fam, cert, env, scenarios(6, 14), po);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.halted_at.has_value());
  EXPECT_EQ(*rep.halted_at, 0u);
  EXPECT_EQ(rep.stages.size(), 1u);
  ASSERT_TRUE(rep.stages[0].report.witness);
  EXPECT_GT(rep.stages[0].report.witness->lhs, rep.stages[0].report.witness->x0_norm);
}

TEST(Certify, PipelineEmptyBudget) {
  const Ensemble fam{{systems::s1(), kInts}};
  const IssCertificateData cert{KLFunction::exponential(1.0, std::numbers::ln2), CF::linear(2.0)};
  const auto env = AssumptionEnvelopes::from(systems::s2().assumptions);
  EXPECT_THROW(pipeline_iss_to_iiss(fam, cert, env, {}), ConfigError);
}
