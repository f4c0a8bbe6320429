#pragma once

// Sampled checks of the stability estimates on trajectory ensembles, the
// epsilon-delta probes and the ISS => iISS pipeline.
//
// Every universal quantifier (member, t0, x0, u, t) is sampled. A pass means
// "no counterexample found among the samples", never a proof.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/simulator.hpp"
#include "impulsive/vector.hpp"

namespace impulsive {

/// A required condition of an operation does not hold (distinct from a bad config).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Member {
  SystemModel sys;
  ImpulseSequence gamma;
};
using Ensemble = std::vector<Member>;

struct Scenario {
  double t0 = 0.0;
  Vector x0;
  InputSignal u;
  std::string id;
};

enum class EstimateKind { ZeroGUAS, ISS, iISS, UBEBS };
enum class EstimateMode { Strong, Weak };

inline const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::ZeroGUAS: return "0-GUAS";
    case EstimateKind::ISS: return "ISS";
    case EstimateKind::iISS: return "iISS";
    case EstimateKind::UBEBS: return "UBEBS";
  }
  return "?";
}

/// The estimate to check.
///
///   0-GUAS  |x| <= beta(|x0|, s)
///   ISS     |x| <= beta(|x0|, s) + rho(||u||_inf)
///   iISS    alpha(|x|) <= beta(|x0|, s) + E
///   UBEBS   alpha(|x|) <= sigma0(|x0|) + sigma1(E) + c
///
/// with s the hybrid elapsed time (strong) or t - t0 (weak) and E the
/// (rho1, rho2) energy of u over (t0, t]. sigma0 and sigma1 default to the
/// identity, which is the plain UBEBS form.
struct EstimateSpec {
  EstimateKind kind = EstimateKind::ZeroGUAS;
  EstimateMode mode = EstimateMode::Strong;
  std::optional<KLFunction> beta;
  /// Replaces `beta` when set (surrogate bounds that are not in product form).
  std::function<double(double, double)> beta_fn;
  std::optional<ComparisonFunction> alpha, rho, rho1, rho2;
  std::optional<ComparisonFunction> sigma0, sigma1;
  double c = 0.0;

  bool has_beta() const { return beta.has_value() || static_cast<bool>(beta_fn); }

  double beta_value(double r, double s) const { return beta_fn ? beta_fn(r, s) : (*beta)(r, s); }

  bool uses_energy() const { return kind == EstimateKind::iISS || kind == EstimateKind::UBEBS; }

  /// Presence and class checks for the functions the kind needs.
  void validate() const {
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string(to_string(kind)) + " estimate needs " + what);
    };
    if (c < 0.0 || !std::isfinite(c)) throw ConfigError("estimate offset c must be finite and nonnegative");
    if (c != 0.0 && kind != EstimateKind::UBEBS) throw ConfigError("offset c is only allowed for UBEBS");
    if (kind != EstimateKind::UBEBS) {
      need(has_beta(), "beta");
      if (beta && !beta_fn) {
        const auto rep = impulsive::validate(*beta);
        if (!rep.ok()) throw ValidationError("beta failed KL validation: " + rep.violations.front().message);
      }
    }
    if (kind == EstimateKind::ISS) {
      need(rho.has_value(), "rho");
      require_valid(*rho, "rho");
    }
    if (uses_energy()) {
      need(alpha.has_value(), "alpha");
      need(rho1.has_value() && rho2.has_value(), "rho1 and rho2");
      require_valid(*alpha, "alpha");
      require_valid(*rho1, "rho1");
      require_valid(*rho2, "rho2");
    }
    if (sigma0) require_valid(*sigma0, "sigma0");
    if (sigma1) require_valid(*sigma1, "sigma1");
  }
};

struct CheckOptions {
  double horizon = 10.0;
  std::size_t grid_points = 200;  ///< uniform points per trajectory, impulse times added on top
  IntegratorOptions integrator{};
  double slack = 1e-7;
  std::size_t threads = 0;  ///< 0: IMPULSIVE_THREADS, else hardware concurrency
  std::size_t norm_refine = 32;
  /// Use the input norm over the whole simulated window instead of (t0, t].
  bool full_input_norm = false;
};

struct Witness {
  std::size_t member = 0;
  std::size_t scenario = 0;
  std::string input_id;
  double t0 = 0.0;
  double x0_norm = 0.0;
  double t = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
};

struct RunSummary {
  std::size_t member = 0;
  std::size_t scenario = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  std::size_t points = 0;
  bool escaped = false;
  double escape_time = 0.0;
};

struct EscapeRecord {
  std::size_t member = 0;
  std::size_t scenario = 0;
  double escape_time = 0.0;
};

struct CertificateReport {
  bool pass = false;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  /// Worst point away from the impulse times and their left limits.
  std::optional<Witness> flow_witness;
  double worst_flow_margin = std::numeric_limits<double>::infinity();
  std::size_t checks = 0;
  std::size_t trajectories = 0;
  std::vector<RunSummary> runs;
  std::vector<EscapeRecord> escapes;
  /// A finite escape under a passing estimate contradicts global existence.
  bool inconsistent = false;
  std::string note;
};

namespace detail {

inline std::size_t thread_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IMPULSIVE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("IMPULSIVE_THREADS is not a positive integer: ") + env);
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs job(i) for i in [0, n) on a small pool; the first exception by index is rethrown.
template <class Job>
void parallel_for(std::size_t n, std::size_t threads, const Job& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::min(threads, n);
  if (k <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct PointSample {
  double t = 0.0;
  double x_norm = 0.0;
  double dt = 0.0;   ///< t - t0
  double hyb = 0.0;  ///< t - t0 + jumps in (t0, t]
  double sup = 0.0;
  double energy = 0.0;
};

struct RunSamples {
  std::size_t member = 0;
  std::size_t scenario = 0;
  double t0 = 0.0;
  double x0_norm = 0.0;
  bool escaped = false;
  double escape_time = 0.0;
  const ImpulseSequence* gamma = nullptr;
  std::vector<PointSample> points;
};

/// Uniform grid on [t0, end] plus every impulse time in (t0, end] and its
/// left neighbour nextafter(tau, -inf).
inline std::vector<double> check_times(const ImpulseSequence& gamma, double t0, double end, std::size_t n) {
  std::vector<double> ts;
  ts.reserve(n + 1 + 2 * gamma.size());
  for (std::size_t i = 0; i <= n; ++i) ts.push_back(t0 + (end - t0) * static_cast<double>(i) / static_cast<double>(n));
  ts.back() = end;
  for (double tau : gamma.in_interval(t0, end)) {
    ts.push_back(tau);
    const double left = std::nextafter(tau, -std::numeric_limits<double>::infinity());
    if (left > t0) ts.push_back(left);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

struct SampleRequest {
  bool zero_input = false;
  std::optional<ComparisonFunction> rho1, rho2;  ///< energy is computed when both are set
};

inline RunSamples sample_run(const Member& mem, const Scenario& sc, const SampleRequest& req, const CheckOptions& opt) {
  RunSamples out;
  out.t0 = sc.t0;
  out.x0_norm = norm(sc.x0);
  const InputSignal u = req.zero_input ? InputSignal::zero(opt.horizon, mem.sys.m) : sc.u;
  const Trajectory traj = simulate(mem.sys, mem.gamma, sc.t0, sc.x0, u, opt.horizon, opt.integrator);
  out.escaped = traj.escaped;
  out.escape_time = traj.escape_time.value_or(0.0);
  const double end = traj.end;
  if (!(end > sc.t0)) return out;

  NormOptions nopt;
  nopt.refine_points = opt.norm_refine;
  const bool energy = req.rho1 && req.rho2;
  double sup_acc = 0.0, e_acc = 0.0, prev = sc.t0;
  if (opt.full_input_norm) {
    sup_acc = sup_norm(u, sc.t0, end, mem.gamma, nopt);
    if (energy) e_acc = energy_norm(u, sc.t0, end, mem.gamma, *req.rho1, *req.rho2, nopt);
  }
  for (double t : check_times(mem.gamma, sc.t0, end, opt.grid_points)) {
    if (!opt.full_input_norm && t > prev) {
      sup_acc = std::max(sup_acc, sup_norm(u, prev, t, mem.gamma, nopt));
      if (energy) e_acc += energy_norm(u, prev, t, mem.gamma, *req.rho1, *req.rho2, nopt);
      prev = t;
    }
    PointSample p;
    p.t = t;
    p.x_norm = norm(traj.eval(t));
    p.dt = t - sc.t0;
    p.hyb = hybrid_elapsed(mem.gamma, sc.t0, t);
    p.sup = sup_acc;
    p.energy = e_acc;
    out.points.push_back(p);
  }
  return out;
}

/// All (member, scenario) runs, member-major, evaluated concurrently.
inline std::vector<RunSamples> sample_runs(const Ensemble& family, const std::vector<Scenario>& scenarios,
                                           const SampleRequest& req, const CheckOptions& opt) {
  if (family.empty()) throw ConfigError("certificate check: empty ensemble");
  if (scenarios.empty()) throw ConfigError("certificate check: empty scenario list");
  for (const auto& sc : scenarios) {
    if (!(sc.t0 < opt.horizon)) throw DomainError("scenario t0 must lie before the horizon");
  }
  std::vector<RunSamples> runs(family.size() * scenarios.size());
  parallel_for(runs.size(), thread_count(opt.threads), [&](std::size_t i) {
    const std::size_t m = i / scenarios.size(), s = i % scenarios.size();
    runs[i] = sample_run(family[m], scenarios[s], req, opt);
    runs[i].member = m;
    runs[i].scenario = s;
    runs[i].gamma = &family[m].gamma;
  });
  return runs;
}

struct Sides {
  double lhs;
  double bound;
};

inline Sides sides(const EstimateSpec& spec, double x0_norm, const PointSample& p) {
  const double s = spec.mode == EstimateMode::Strong ? p.hyb : p.dt;
  switch (spec.kind) {
    case EstimateKind::ZeroGUAS: return {p.x_norm, spec.beta_value(x0_norm, s)};
    case EstimateKind::ISS: return {p.x_norm, spec.beta_value(x0_norm, s) + (*spec.rho)(p.sup)};
    case EstimateKind::iISS: return {(*spec.alpha)(p.x_norm), spec.beta_value(x0_norm, s) + p.energy};
    case EstimateKind::UBEBS: {
      const double a = spec.sigma0 ? (*spec.sigma0)(x0_norm) : x0_norm;
      const double b = spec.sigma1 ? (*spec.sigma1)(p.energy) : p.energy;
      return {(*spec.alpha)(p.x_norm), a + b + spec.c};
    }
  }
  return {0.0, 0.0};
}

inline double margin_of(const Sides& s) {
  if (std::isnan(s.lhs) || std::isinf(s.lhs)) return -std::numeric_limits<double>::infinity();
  if (std::isnan(s.bound)) return -std::numeric_limits<double>::infinity();
  return s.bound - s.lhs;
}

inline SampleRequest request_for(const EstimateSpec& spec) {
  SampleRequest req;
  req.zero_input = spec.kind == EstimateKind::ZeroGUAS;
  if (spec.uses_energy()) {
    req.rho1 = spec.rho1;
    req.rho2 = spec.rho2;
  }
  return req;
}

/// Min-margin aggregation in (member, scenario, time) order; ties keep the first.
inline CertificateReport aggregate(const EstimateSpec& spec, const std::vector<RunSamples>& runs,
                                   const std::vector<Scenario>& scenarios, const CheckOptions& opt) {
  CertificateReport rep;
  rep.trajectories = runs.size();
  for (const auto& run : runs) {
    const ImpulseSequence& gamma = *run.gamma;
    RunSummary rs;
    rs.member = run.member;
    rs.scenario = run.scenario;
    rs.escaped = run.escaped;
    rs.escape_time = run.escape_time;
    rs.points = run.points.size();
    for (const auto& p : run.points) {
      const Sides sd = sides(spec, run.x0_norm, p);
      const double m = margin_of(sd);
      if (m < rs.min_margin) {
        rs.min_margin = m;
        rs.worst_t = p.t;
      }
      if (m < rep.worst_margin) {
        rep.worst_margin = m;
        const auto& sc = scenarios[run.scenario];
        rep.witness = Witness{run.member, run.scenario, sc.id, run.t0, run.x0_norm, p.t, sd.lhs, sd.bound};
      }
      const double up = std::nextafter(p.t, std::numeric_limits<double>::infinity());
      if (m < rep.worst_flow_margin && !gamma.contains(p.t) && !gamma.contains(up)) {
        rep.worst_flow_margin = m;
        const auto& sc = scenarios[run.scenario];
        rep.flow_witness = Witness{run.member, run.scenario, sc.id, run.t0, run.x0_norm, p.t, sd.lhs, sd.bound};
      }
    }
    rep.checks += run.points.size();
    if (run.escaped) rep.escapes.push_back({run.member, run.scenario, run.escape_time});
    rep.runs.push_back(rs);
  }
  rep.pass = rep.checks > 0 && rep.worst_margin >= -opt.slack;
  rep.inconsistent = rep.pass && !rep.escapes.empty();
  rep.note = rep.pass ? "no counterexample found among " + std::to_string(rep.checks) + " sampled points"
                      : "counterexample found";
  return rep;
}

}  // namespace detail

/// Evaluates the estimate on every (member, scenario) trajectory at the
/// check times and reports the smallest bound - lhs margin. Finite escapes
/// end a trajectory early; they are listed, not counted as failures.
inline CertificateReport check_estimate(const Ensemble& family, const EstimateSpec& spec,
                                        const std::vector<Scenario>& scenarios, const CheckOptions& opt = {}) {
  spec.validate();
  const auto runs = detail::sample_runs(family, scenarios, detail::request_for(spec), opt);
  return detail::aggregate(spec, runs, scenarios, opt);
}

// ---------------------------------------------------------------------------
// Scenario generation

enum class InputShape { Zero, Step, Sinusoid, ImpulsivePoint };

inline const char* to_string(InputShape s) {
  switch (s) {
    case InputShape::Zero: return "zero";
    case InputShape::Step: return "step";
    case InputShape::Sinusoid: return "sinusoid";
    case InputShape::ImpulsivePoint: return "impulsive-point";
  }
  return "?";
}

struct ScenarioSpec {
  std::size_t count = 50;
  std::uint64_t seed = 1;
  std::size_t n = 1;
  std::size_t m = 1;
  double horizon = 10.0;
  double t0_max = 3.0;
  double x0_max = 10.0;
  double input_max = 2.0;
  /// Shapes are assigned round-robin by scenario index.
  std::vector<InputShape> shapes{InputShape::Zero, InputShape::Step, InputShape::Sinusoid, InputShape::ImpulsivePoint};
  /// Where impulsive-point inputs put their spikes (typically the family's impulse times).
  std::vector<double> point_times;
};

inline InputSignal make_input(InputShape shape, std::mt19937_64& rng, std::size_t m, double horizon, double amp_max,
                              const std::vector<double>& point_times) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto rand_vec = [&](double radius) { return detail::sample_ball(rng, m, radius); };
  switch (shape) {
    case InputShape::Zero: return InputSignal::zero(horizon, m);
    case InputShape::Step: {
      const double s = horizon * (0.1 + 0.8 * U(rng));
      return InputSignal(m, {{0.0, s, SegmentShape::constant(rand_vec(amp_max))},
                             {s, horizon, SegmentShape::constant(rand_vec(amp_max))}});
    }
    case InputShape::Sinusoid: {
      Vector amp(m), om(m), ph(m), off(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        amp[i] = amp_max * U(rng) / std::sqrt(static_cast<double>(m));
        om[i] = 0.5 + 4.5 * U(rng);
        ph[i] = 2.0 * std::numbers::pi * U(rng);
      }
      return InputSignal(m, {{0.0, horizon, SegmentShape::sinusoid(amp, om, ph, off)}});
    }
    case InputShape::ImpulsivePoint: {
      InputSignal u = InputSignal::constant(horizon, rand_vec(0.1 * amp_max));
      for (double t : point_times) {
        if (t > 0.0 && t <= horizon) u = u.with_point_value(t, rand_vec(amp_max));
      }
      return u;
    }
  }
  return InputSignal::zero(horizon, m);
}

/// Seeded scenarios: t0 uniform on [0, t0_max], x0 uniform in the ball of
/// radius x0_max, inputs of the listed shapes with magnitude <= input_max.
inline std::vector<Scenario> make_scenarios(const ScenarioSpec& spec) {
  if (spec.shapes.empty()) throw ConfigError("scenario generator needs at least one input shape");
  if (!(spec.t0_max < spec.horizon)) throw ConfigError("scenario t0_max must lie before the horizon");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Scenario> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Scenario sc;
    sc.t0 = spec.t0_max * U(rng);
    sc.x0 = detail::sample_ball(rng, spec.n, spec.x0_max);
    const InputShape shape = spec.shapes[i % spec.shapes.size()];
    sc.u = make_input(shape, rng, spec.m, spec.horizon, spec.input_max, spec.point_times);
    sc.id = std::string(to_string(shape)) + "-" + std::to_string(i);
    out.push_back(std::move(sc));
  }
  return out;
}

/// All impulse times of a family, merged.
inline std::vector<double> impulse_times(const Ensemble& family) {
  std::vector<double> ts;
  for (const auto& mem : family) ts.insert(ts.end(), mem.gamma.times().begin(), mem.gamma.times().end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

// ---------------------------------------------------------------------------
// Epsilon-delta probes

struct ProbeOptions {
  std::vector<double> eps_grid{0.1, 0.5, 1.0};
  std::vector<double> r_grid{1.0, 5.0};
  std::vector<double> s_grid{0.5, 2.0};
  std::vector<double> T_cells{2.0, 5.0};             ///< item (i) hybrid-time windows
  std::vector<double> T_search{1.0, 2.0, 4.0, 8.0};  ///< item (iii) candidates, ascending
  std::size_t budget = 16;                           ///< scenarios per search step
  std::size_t max_halvings = 20;
  double horizon = 10.0;
  double t0_max = 1.0;
  double input_max = 2.0;
  std::uint64_t seed = 1;
  ComparisonFunction alpha = ComparisonFunction::identity();
  CheckOptions check{};
};

enum class ProbeStatus { Found, Inconclusive };

inline const char* to_string(ProbeStatus s) { return s == ProbeStatus::Found ? "found" : "inconclusive"; }

struct BoundCell {
  double T = 0.0, r = 0.0, s = 0.0;
  double C = 0.0;  ///< largest |x(t)| seen with hybrid elapsed time <= T
  std::size_t samples = 0;
  bool escaped = false;
};

struct DeltaSearch {
  double eps = 0.0;
  ProbeStatus status = ProbeStatus::Inconclusive;
  double delta = 0.0;
  std::vector<std::pair<double, double>> trace;  ///< (delta tried, largest |x| seen)
};

struct SettleSearch {
  double r = 0.0, eps = 0.0;
  ProbeStatus status = ProbeStatus::Inconclusive;
  double T = 0.0;
  std::vector<std::pair<double, double>> trace;  ///< (T tried, largest alpha(|x|) - eps - ||u|| seen)
};

struct ProbeReport {
  std::vector<BoundCell> bounds;
  std::vector<DeltaSearch> deltas;
  std::vector<SettleSearch> settles;
  std::size_t trajectories = 0;
  std::string note = "sampled witnesses only: found values are not certified";
};

namespace detail {

/// Largest multiple theta in [0, 1] of u with energy over (t0, horizon] <= target.
inline InputSignal fit_energy(const InputSignal& u, const ImpulseSequence& gamma, double t0, double horizon,
                              double target, const ComparisonFunction& rho1, const ComparisonFunction& rho2) {
  auto E = [&](double th) { return energy_norm(u.scaled(th), t0, horizon, gamma, rho1, rho2); };
  if (E(1.0) <= target) return u;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (E(mid) <= target ? lo : hi) = mid;
  }
  return u.scaled(lo);
}

struct ProbeSample {
  Member const* member = nullptr;
  double t0 = 0.0;
  Vector x0;
  InputSignal u;
  double energy = 0.0;  ///< ||u||_lambda over (t0, horizon]
};

/// `count` scenarios per member with |x0| <= r and energy <= s. The first
/// one puts x0 on the sphere and uses zero input.
inline std::vector<ProbeSample> probe_samples(const Ensemble& family, std::mt19937_64& rng, std::size_t count,
                                              double r, double s, const ComparisonFunction& rho1,
                                              const ComparisonFunction& rho2, const ProbeOptions& opt) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const InputShape shapes[] = {InputShape::Zero, InputShape::Step, InputShape::Sinusoid, InputShape::ImpulsivePoint};
  std::vector<ProbeSample> out;
  for (const auto& mem : family) {
    for (std::size_t i = 0; i < count; ++i) {
      ProbeSample p;
      p.member = &mem;
      p.t0 = i == 0 ? 0.0 : opt.t0_max * U(rng);
      p.x0 = sample_ball(rng, mem.sys.n, r);
      if (i == 0) {
        const double nx = norm(p.x0);
        if (nx > 0.0) {
          for (double& v : p.x0) v *= r / nx;
        } else {
          p.x0[0] = r;
        }
      }
      const InputShape shape = i == 0 ? InputShape::Zero : shapes[i % 4];
      InputSignal u = make_input(shape, rng, mem.sys.m, opt.horizon, opt.input_max, mem.gamma.times());
      p.u = fit_energy(u, mem.gamma, p.t0, opt.horizon, s, rho1, rho2);
      p.energy = energy_norm(p.u, p.t0, opt.horizon, mem.gamma, rho1, rho2);
      out.push_back(std::move(p));
    }
  }
  return out;
}

struct ProbeRun {
  std::vector<PointSample> points;
  bool escaped = false;
};

inline std::vector<ProbeRun> run_probe_samples(const std::vector<ProbeSample>& samples, const ProbeOptions& opt) {
  std::vector<ProbeRun> runs(samples.size());
  parallel_for(samples.size(), thread_count(opt.check.threads), [&](std::size_t i) {
    const auto& p = samples[i];
    const Trajectory traj =
        simulate(p.member->sys, p.member->gamma, p.t0, p.x0, p.u, opt.horizon, opt.check.integrator);
    runs[i].escaped = traj.escaped;
    if (!(traj.end > p.t0)) return;
    for (double t : check_times(p.member->gamma, p.t0, traj.end, opt.check.grid_points)) {
      PointSample s;
      s.t = t;
      s.x_norm = norm(traj.eval(t));
      s.dt = t - p.t0;
      s.hyb = hybrid_elapsed(p.member->gamma, p.t0, t);
      runs[i].points.push_back(s);
    }
  });
  return runs;
}

}  // namespace detail

/// Empirical versions of the three conditions of the epsilon-delta
/// characterization of strong iISS with energy gains (rho1, rho2):
///   (i)   C(T, r, s): sup |x(t)| over |x0| <= r, ||u|| <= s, hybrid time <= T
///   (ii)  for each eps a delta with |x0|, ||u|| <= delta  =>  |x| <= eps
///   (iii) for each (r, eps) a T with alpha(|x|) <= eps + ||u|| once hybrid time >= T
/// Searches that run out of candidates are inconclusive, not failures.
inline ProbeReport probe_eps_delta(const Ensemble& family, const ComparisonFunction& rho1,
                                   const ComparisonFunction& rho2, const ProbeOptions& opt = {}) {
  if (family.empty()) throw ConfigError("probe: empty family");
  if (opt.budget == 0) throw ConfigError("probe: budget must be positive");
  require_valid(rho1, "rho1");
  require_valid(rho2, "rho2");
  require_valid(opt.alpha, "alpha");
  std::mt19937_64 rng(opt.seed);
  ProbeReport rep;

  for (double T : opt.T_cells) {
    for (double r : opt.r_grid) {
      for (double s : opt.s_grid) {
        const auto samples = detail::probe_samples(family, rng, opt.budget, r, s, rho1, rho2, opt);
        const auto runs = detail::run_probe_samples(samples, opt);
        BoundCell cell{T, r, s, 0.0, samples.size(), false};
        for (const auto& run : runs) {
          cell.escaped = cell.escaped || run.escaped;
          for (const auto& p : run.points) {
            if (p.hyb <= T) cell.C = std::max(cell.C, p.x_norm);
          }
        }
        rep.trajectories += runs.size();
        rep.bounds.push_back(cell);
      }
    }
  }

  for (double eps : opt.eps_grid) {
    DeltaSearch ds;
    ds.eps = eps;
    double delta = eps;
    for (std::size_t k = 0; k <= opt.max_halvings; ++k, delta *= 0.5) {
      const auto samples = detail::probe_samples(family, rng, opt.budget, delta, delta, rho1, rho2, opt);
      const auto runs = detail::run_probe_samples(samples, opt);
      rep.trajectories += runs.size();
      double worst = 0.0;
      bool escaped = false;
      for (const auto& run : runs) {
        escaped = escaped || run.escaped;
        for (const auto& p : run.points) worst = std::max(worst, p.x_norm);
      }
      ds.trace.emplace_back(delta, escaped ? std::numeric_limits<double>::infinity() : worst);
      if (!escaped && worst <= eps) {
        ds.status = ProbeStatus::Found;
        ds.delta = delta;
        break;
      }
    }
    rep.deltas.push_back(ds);
  }

  for (double r : opt.r_grid) {
    for (double eps : opt.eps_grid) {
      SettleSearch ss;
      ss.r = r;
      ss.eps = eps;
      const double s_max = opt.s_grid.empty() ? r : opt.s_grid.back();
      const auto samples = detail::probe_samples(family, rng, opt.budget, r, s_max, rho1, rho2, opt);
      const auto runs = detail::run_probe_samples(samples, opt);
      rep.trajectories += runs.size();
      for (double T : opt.T_search) {
        double worst = -std::numeric_limits<double>::infinity();
        std::size_t seen = 0;
        bool escaped = false;
        for (std::size_t i = 0; i < runs.size(); ++i) {
          escaped = escaped || runs[i].escaped;
          for (const auto& p : runs[i].points) {
            if (p.hyb < T) continue;
            ++seen;
            worst = std::max(worst, opt.alpha(p.x_norm) - eps - samples[i].energy);
          }
        }
        ss.trace.emplace_back(T, escaped ? std::numeric_limits<double>::infinity() : worst);
        // a T with no sampled point past it is no evidence
        if (!escaped && seen > 0 && worst <= 0.0) {
          ss.status = ProbeStatus::Found;
          ss.T = T;
          break;
        }
      }
      rep.settles.push_back(ss);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// iISS => 0-GUAS and UBEBS

struct DerivedEstimateReport {
  CertificateReport iiss, guas, ubebs;
  EstimateSpec guas_spec, ubebs_spec;
  /// iISS pass implies both derived passes.
  bool holds = false;
};

/// From alpha(|x|) <= beta + E: beta~ = alpha^{-1} o beta gives 0-GUAS and
/// alpha~ = psi o alpha with psi(r) = min{beta0^{-1}(r/2), r/2} gives UBEBS
/// with c = 0.
inline DerivedEstimateReport check_iiss_decomposition(const Ensemble& family, const EstimateSpec& iiss,
                                                      const std::vector<Scenario>& scenarios,
                                                      const CheckOptions& opt = {}) {
  if (iiss.kind != EstimateKind::iISS || !iiss.beta || iiss.beta_fn) {
    throw ConfigError("decomposition check needs an iISS spec with a KL beta");
  }
  DerivedEstimateReport rep;
  rep.iiss = check_estimate(family, iiss, scenarios, opt);

  rep.guas_spec.kind = EstimateKind::ZeroGUAS;
  rep.guas_spec.mode = iiss.mode;
  rep.guas_spec.beta = iiss.beta->composed_with(inverse(*iiss.alpha));
  // alpha^{-1} is evaluated directly: its stored domain stops at alpha(hint)
  rep.guas_spec.beta_fn = [b = *iiss.beta, a = *iiss.alpha](double r, double s) {
    return invert(a, b(r, s), kDefaultInversionTol);
  };
  rep.guas = check_estimate(family, rep.guas_spec, scenarios, opt);

  rep.ubebs_spec.kind = EstimateKind::UBEBS;
  rep.ubebs_spec.mode = iiss.mode;
  rep.ubebs_spec.alpha = compose(psi_from_iiss(*iiss.beta), *iiss.alpha);
  rep.ubebs_spec.rho1 = iiss.rho1;
  rep.ubebs_spec.rho2 = iiss.rho2;
  rep.ubebs = check_estimate(family, rep.ubebs_spec, scenarios, opt);

  rep.holds = !rep.iiss.pass || (rep.guas.pass && rep.ubebs.pass);
  return rep;
}

// ---------------------------------------------------------------------------
// Weak and strong estimates under uniform incremental boundedness

struct WeakStrongReport {
  UibReport uib;
  CertificateReport strong, weak, surrogate;
  std::size_t points = 0;
  /// Sampled points where the strong estimate holds and the weak one does not.
  std::size_t implication_violations = 0;
  bool pass = false;
};

/// Checks, pointwise, that the strong estimate implies the weak estimate
/// with the same functions, and that a weak pass carries over to the strong
/// surrogate beta''(r, s) = beta(r, max{0, s - phi(s)}).
inline WeakStrongReport check_weak_strong_equiv(const Ensemble& family, const std::function<double(double)>& phi,
                                                const EstimateSpec& spec, const std::vector<Scenario>& scenarios,
                                                const CheckOptions& opt = {}) {
  if (spec.kind == EstimateKind::UBEBS) throw ConfigError("weak/strong comparison needs an estimate with beta");
  std::vector<ImpulseSequence> gammas;
  for (const auto& mem : family) gammas.push_back(mem.gamma);
  WeakStrongReport rep;
  rep.uib = check_uib(gammas, phi);
  if (!rep.uib.pass) throw PreconditionError("weak/strong comparison: family is not UIB for the given phi");

  EstimateSpec strong = spec, weak = spec;
  strong.mode = EstimateMode::Strong;
  weak.mode = EstimateMode::Weak;
  strong.validate();
  const auto runs = detail::sample_runs(family, scenarios, detail::request_for(spec), opt);
  rep.strong = detail::aggregate(strong, runs, scenarios, opt);
  rep.weak = detail::aggregate(weak, runs, scenarios, opt);

  for (const auto& run : runs) {
    for (const auto& p : run.points) {
      ++rep.points;
      const bool s_ok = detail::margin_of(detail::sides(strong, run.x0_norm, p)) >= -opt.slack;
      const bool w_ok = detail::margin_of(detail::sides(weak, run.x0_norm, p)) >= -opt.slack;
      if (s_ok && !w_ok) ++rep.implication_violations;
    }
  }

  EstimateSpec sur = spec;
  sur.mode = EstimateMode::Strong;
  sur.beta_fn = [weak, phi](double r, double s) { return weak.beta_value(r, std::max(0.0, s - phi(s))); };
  rep.surrogate = detail::aggregate(sur, runs, scenarios, opt);

  rep.pass = rep.implication_violations == 0 && (!rep.weak.pass || rep.surrogate.pass);
  return rep;
}

// ---------------------------------------------------------------------------
// ISS => iISS pipeline

struct StageReport {
  std::string name;
  bool pass = false;
  CertificateReport report;
  std::string detail;
};

struct PipelineReport {
  std::vector<StageReport> stages;
  bool pass = false;
  std::optional<std::size_t> halted_at;  ///< index of the failing stage
  std::optional<UbebsGainResult> gains;
  std::optional<EstimateSpec> iiss;  ///< the candidate checked in the last stage
};

struct PipelineOptions {
  CheckOptions check{};
  GainGridSpec gains{};
  std::size_t alpha_hat_knots = 64;
  double alpha_hat_safety = 1.1;
};

namespace detail {

/// K-infinity majorant of the sampled (r, |x|) pairs: on each knot cell the
/// sup over all samples up to the next knot, times `safety`, plus r, so
/// it also dominates the identity.
inline ComparisonFunction alpha_hat_from(std::vector<std::pair<double, double>> pts, std::size_t knots, double safety) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> rs;
  for (const auto& [r, x] : pts) {
    if (r > 0.0) rs.push_back(r);
  }
  std::vector<double> kr{0.0}, kv{0.0};
  if (rs.empty()) return ComparisonFunction::identity();
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  std::vector<double> picks;
  const std::size_t k = std::min(knots, rs.size());
  for (std::size_t i = 1; i <= k; ++i) picks.push_back(rs[(i * rs.size()) / k - 1]);
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  // running sup of |x| over r <= picks[i]
  std::vector<double> sup_at(picks.size(), 0.0);
  double run = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    while (j < pts.size() && pts[j].first <= picks[i]) run = std::max(run, pts[j++].second);
    sup_at[i] = run;
  }
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const double top = sup_at[std::min(i + 1, picks.size() - 1)];
    kr.push_back(picks[i]);
    kv.push_back(std::max(safety * top + picks[i], kv.back() * (1.0 + 1e-12) + 1e-12 * picks[i]));
  }
  // past the data keep slope at least one
  kr.push_back(2.0 * kr.back() + 1.0);
  kv.push_back(kv.back() + (kr.back() - kr[kr.size() - 2]));
  return ComparisonFunction::tabulated(kr, kv, FunctionKind::KInf, true);
}

inline ComparisonFunction max_over_members(const Ensemble& family,
                                           std::optional<ComparisonFunction> AssumptionData::*field,
                                           const char* name) {
  std::optional<ComparisonFunction> out;
  for (const auto& mem : family) {
    const auto& f = mem.sys.assumptions.*field;
    if (!f) throw ConfigError(std::string("pipeline needs ") + name + " for every member");
    out = out ? ComparisonFunction::max_of(*out, *f) : *f;
  }
  return *out;
}

}  // namespace detail

/// Runs the implication chain on the sampled ensemble:
///   1. 0-GUAS with the certificate's beta under zero input;
///   2. the ISS estimate itself, then the synthesized UBEBS bound
///      |x| <= alpha~(|x0|) + alpha~(Psi(E)) with the (chi1, chi2) energy;
///   3. the zero-offset form alpha~(|x|) <= |x0| + E with gains
///      max{chi_i, nu} and alpha~(s) = alpha^^{-1}(s/2), alpha^^ fitted on
///      even-indexed scenarios and checked on odd-indexed ones;
///   4. the iISS candidate alpha~(|x|)/2 <= alpha~(2 beta)/2 + E.
/// Stops at the first failing stage.
inline PipelineReport pipeline_iss_to_iiss(const Ensemble& family, const IssCertificateData& cert,
                                           const AssumptionEnvelopes& env, const std::vector<Scenario>& scenarios,
                                           const PipelineOptions& opt = {}) {
  using CF = ComparisonFunction;
  if (scenarios.empty()) throw ConfigError("pipeline: empty scenario budget");
  if (family.empty()) throw ConfigError("pipeline: empty family");
  PipelineReport rep;
  auto finish = [&](StageReport st) {
    rep.stages.push_back(std::move(st));
    if (!rep.stages.back().pass) rep.halted_at = rep.stages.size() - 1;
    return rep.stages.back().pass;
  };

  EstimateSpec guas;
  guas.kind = EstimateKind::ZeroGUAS;
  guas.beta = cert.beta;
  {
    StageReport st{"strong 0-GUAS (zero input)", false, check_estimate(family, guas, scenarios, opt.check), ""};
    st.pass = st.report.pass;
    if (!finish(std::move(st))) return rep;
  }

  {
    StageReport st{"UBEBS from the ISS certificate", false, {}, ""};
    EstimateSpec iss;
    iss.kind = EstimateKind::ISS;
    iss.beta = cert.beta;
    iss.rho = cert.rho;
    st.report = check_estimate(family, iss, scenarios, opt.check);
    if (!st.report.pass) {
      st.detail = "ISS estimate fails on the ensemble";
      finish(std::move(st));
      return rep;
    }
    double u_max = 0.0;
    for (const auto& mem : family) {
      for (const auto& sc : scenarios) u_max = std::max(u_max, sup_norm(sc.u, 0.0, opt.check.horizon, mem.gamma));
    }
    GainGridSpec gs = opt.gains;
    gs.r_max = std::max({gs.r_max, 4.0, 1.05 * 3.0 * cert.rho(u_max)});
    rep.gains = synthesize_ubebs_gain(env, cert, gs);
    const auto& g = *rep.gains;
    const double psi0 = g.psi_big(0.0);
    EstimateSpec ub;
    ub.kind = EstimateKind::UBEBS;
    ub.alpha = CF::identity();
    ub.rho1 = g.chi1;
    ub.rho2 = g.chi2;
    ub.sigma0 = g.alpha_tilde;
    const CF at = g.alpha_tilde, pb = g.psi_big;
    const double off = at(psi0);
    ub.sigma1 = CF::custom([at, pb, off](double E) { return at(pb(E)) - off; }, FunctionKind::Nondecreasing,
                           "alpha~ o Psi - alpha~(Psi(0))");
    ub.c = off;
    st.report = check_estimate(family, ub, scenarios, opt.check);
    st.pass = st.report.pass;
    st.detail = "kappa tabulated up to r = " + std::to_string(g.r_max);
    if (!finish(std::move(st))) return rep;
  }

  const auto& g = *rep.gains;
  const auto [rt1, rt2] = rho_tilde(g.chi1, g.chi2, detail::max_over_members(family, &AssumptionData::nu_f, "nu_f"),
                                    detail::max_over_members(family, &AssumptionData::nu_g, "nu_g"));
  CF alpha_t;
  {
    StageReport st{"zero-offset UBEBS", false, {}, ""};
    std::vector<Scenario> fit, held;
    for (std::size_t i = 0; i < scenarios.size(); ++i) (i % 2 == 0 ? fit : held).push_back(scenarios[i]);
    if (held.empty()) held = fit;
    detail::SampleRequest req;
    req.rho1 = rt1;
    req.rho2 = rt2;
    std::vector<std::pair<double, double>> pts;
    for (const auto& run : detail::sample_runs(family, fit, req, opt.check)) {
      for (const auto& p : run.points) pts.emplace_back(std::max(run.x0_norm, p.energy), p.x_norm);
    }
    const CF ahat = detail::alpha_hat_from(std::move(pts), opt.alpha_hat_knots, opt.alpha_hat_safety);
    alpha_t = CF::custom([ahat](double s) { return invert(ahat, 0.5 * s, kDefaultInversionTol); }, FunctionKind::KInf,
                         "alpha^^{-1}(s/2)");
    EstimateSpec zo;
    zo.kind = EstimateKind::UBEBS;
    zo.alpha = alpha_t;
    zo.rho1 = rt1;
    zo.rho2 = rt2;
    st.report = check_estimate(family, zo, held, opt.check);
    st.pass = st.report.pass;
    st.detail = "alpha^ fitted on " + std::to_string(fit.size()) + " scenarios, checked on " +
                std::to_string(held.size());
    if (!finish(std::move(st))) return rep;
  }

  {
    StageReport st{"strong iISS candidate", false, {}, ""};
    EstimateSpec is;
    is.kind = EstimateKind::iISS;
    is.alpha = CF::custom([alpha_t](double s) { return 0.5 * alpha_t(s); }, FunctionKind::KInf, "alpha~/2");
    const CF outer =
        CF::custom([alpha_t](double s) { return 0.5 * alpha_t(2.0 * s); }, FunctionKind::KInf, "alpha~(2 .)/2");
    is.beta = cert.beta.composed_with(outer);
    is.rho1 = rt1;
    is.rho2 = rt2;
    st.report = check_estimate(family, is, scenarios, opt.check);
    st.pass = st.report.pass;
    rep.iiss = is;
    if (!finish(std::move(st))) return rep;
  }
  rep.pass = true;
  return rep;
}

}  // namespace impulsive
