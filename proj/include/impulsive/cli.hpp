#pragma once

// Command-line front end. `run` takes the output streams so tests can drive
// it in-process; tools/impulsive_cli.cpp is a thin main around it.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 an estimate (or
// one of its preconditions) failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "impulsive/acceptance.hpp"
#include "impulsive/certify.hpp"
#include "impulsive/config.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/gronwall.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/simulator.hpp"

namespace impulsive::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kEstimateFailed = 2;

inline constexpr const char* kTrajectoryTag = "# impulsive-trajectory v1";
inline constexpr const char* kBoundTag = "# impulsive-bound v1";
inline constexpr const char* kNormsTag = "# impulsive-norms v1";
inline constexpr const char* kGainsTag = "# impulsive-gains v1";
inline constexpr const char* kMarginsTag = "# impulsive-margins v1";

namespace detail {

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

/// Writes `text` to `path`, or to `out` when the path is empty.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("write failed for '" + path + "'");
}

inline const config::MemberSpec& member_of(const config::Config& c, std::size_t idx) {
  if (c.family.empty()) throw ConfigError("config: no system given");
  if (idx >= c.family.size()) throw ConfigError(fmt::format("member {} out of range ({} members)", idx, c.family.size()));
  return c.family[idx];
}

inline std::string trajectory_csv(const Trajectory& tr, std::size_t points) {
  const std::size_t n = tr.dimension();
  std::string s = std::string(kTrajectoryTag) + "\nt";
  for (std::size_t i = 1; i <= n; ++i) s += fmt::format(",x{}", i);
  s += ",jump_flag";
  for (std::size_t i = 1; i <= n; ++i) s += fmt::format(",left_x{}", i);
  s += "\n";

  std::vector<double> ts;
  const std::size_t m = std::max<std::size_t>(points, 2);
  for (std::size_t k = 0; k < m; ++k) {
    ts.push_back(std::min(tr.end, tr.t0 + (tr.end - tr.t0) * static_cast<double>(k) / static_cast<double>(m - 1)));
  }
  for (const auto& j : tr.jumps) ts.push_back(j.tau);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  for (double t : ts) {
    const Vector x = tr.eval(t);
    const JumpRecord* j = tr.jump_at(t);
    s += num(t);
    for (double v : x) s += "," + num(v);
    s += j ? ",1" : ",0";
    for (std::size_t i = 0; i < n; ++i) s += "," + (j ? num(j->left[i]) : std::string());
    s += "\n";
  }
  return s;
}

inline void print_witness(std::ostream& os, const char* label, const Witness& w) {
  fmt::print(os, "{}: member {} scenario {} ({}) t0={} |x0|={} t={} lhs={} bound={}\n", label, w.member, w.scenario,
             w.input_id, num(w.t0), num(w.x0_norm), num(w.t), num(w.lhs), num(w.bound));
}

inline void print_report(std::ostream& os, const std::string& title, const CertificateReport& r) {
  fmt::print(os, "{}: {}  worst margin {}  ({} points, {} trajectories)\n", title, r.pass ? "PASS" : "FAIL",
             num(r.worst_margin), r.checks, r.trajectories);
  if (!r.pass && r.witness) print_witness(os, "  witness", *r.witness);
  if (!r.escapes.empty()) {
    fmt::print(os, "  finite escape in {} run(s), first at t={}\n", r.escapes.size(), num(r.escapes.front().escape_time));
  }
  if (r.inconsistent) os << "  inconsistent: estimate passed but a solution escaped\n";
  if (!r.note.empty()) os << "  note: " << r.note << "\n";
}

inline std::string margins_csv(const CertificateReport& r, const std::vector<Scenario>& sc) {
  std::string s = std::string(kMarginsTag) + "\nmember,scenario,input_id,t0,x0_norm,min_margin,worst_t,escaped,escape_time\n";
  for (const auto& run : r.runs) {
    const auto& c = sc.at(run.scenario);
    s += fmt::format("{},{},{},{},{},{},{},{},{}\n", run.member, run.scenario, c.id, num(c.t0), num(norm(c.x0)),
                     num(run.min_margin), num(run.worst_t), run.escaped ? 1 : 0,
                     run.escaped ? num(run.escape_time) : std::string());
  }
  return s;
}

// ---- subcommands ----

struct Common {
  std::string config;
  std::string out;
  std::size_t threads = 0;
};

inline int cmd_simulate(const Common& o, std::size_t member, std::size_t initial, std::size_t points,
                        std::ostream& out, std::ostream& err) {
  const auto cfg = config::load(o.config);
  const auto& ms = member_of(cfg, member);
  if (cfg.initial.empty()) throw ConfigError("simulate needs an 'initial' list");
  if (initial >= cfg.initial.size()) throw ConfigError(fmt::format("initial condition {} out of range", initial));
  const auto sys = ms.system.build();
  const auto gamma = ms.gamma.build();
  const auto& ic = cfg.initial[initial];
  const InputSignal u = cfg.input ? *cfg.input : InputSignal::zero(cfg.horizon, sys.m);
  const auto tr = simulate(sys, gamma, ic.t0, ic.x0, u, cfg.horizon, cfg.integrator);
  const std::string path = o.out.empty() ? cfg.output.csv : o.out;
  emit(trajectory_csv(tr, points), path, out);
  if (tr.escaped) fmt::print(err, "finite escape near t={}\n", num(tr.escape_time.value_or(tr.end)));
  if (!path.empty()) fmt::print(out, "wrote {} ({} jumps, end t={})\n", path, tr.jumps.size(), num(tr.end));
  return kOk;
}

inline int cmd_norms(const Common& o, std::size_t member, std::ostream& out) {
  const auto cfg = config::load(o.config);
  if (!cfg.input) throw ConfigError("norms needs an 'input' section");
  if (!cfg.norms) throw ConfigError("norms needs a 'norms' section");
  const auto gamma = member_of(cfg, member).gamma.build();
  const auto& n = *cfg.norms;
  std::string s = std::string(kNormsTag) + "\nquantity,level,value\n";
  s += fmt::format("sup_norm,,{}\n", num(sup_norm(*cfg.input, n.a, n.b, gamma)));
  s += fmt::format("energy_norm,,{}\n", num(energy_norm(*cfg.input, n.a, n.b, gamma, n.rho1, n.rho2)));
  for (double b : n.levels) {
    const auto e = exceedance(*cfg.input, b, gamma);
    s += fmt::format("exceedance_measure,{},{}\n", num(b), num(e.measure));
    s += fmt::format("exceedance_count,{},{}\n", num(b), e.impulse_count);
  }
  emit(s, o.out.empty() ? cfg.output.csv : o.out, out);
  return kOk;
}

inline int cmd_bound(const Common& o, std::ostream& out) {
  const auto cfg = config::load(o.config);
  if (!cfg.gronwall) throw ConfigError("bound needs a 'gronwall' section");
  const auto& g = *cfg.gronwall;
  const auto prob = g.build();
  const GronwallBound hb(prob);
  std::string s = std::string(kBoundTag) + "\nt,k,h\n";
  const std::size_t m = std::max<std::size_t>(g.points, 2);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = std::min(prob.T, prob.t0 + (prob.T - prob.t0) * static_cast<double>(i) / static_cast<double>(m - 1));
    const std::size_t k = count_impulses(prob.sigma, prob.t0, std::min(t, prob.sigma.horizon()));
    s += fmt::format("{},{},{}\n", num(t), k, num(hb(t)));
  }
  emit(s, o.out.empty() ? cfg.output.csv : o.out, out);
  return kOk;
}

inline int cmd_gains(const Common& o, std::size_t member, std::ostream& out) {
  const auto cfg = config::load(o.config);
  if (!cfg.certificate) throw ConfigError("gains needs a 'certificate' section");
  const auto sys = member_of(cfg, member).system.build();
  const auto env = AssumptionEnvelopes::from(sys.assumptions);
  const auto res = synthesize_ubebs_gain(env, *cfg.certificate, cfg.gains);
  std::string s = std::string(kGainsTag) + "\nr,ell,kappa,alpha,chi1,chi2\n";
  auto maybe = [](const ComparisonFunction& f, double r) {
    try {
      return num(f(r));
    } catch (const std::exception&) {
      return std::string();  // outside the tabulated range
    }
  };
  for (const auto& [r, l] : res.ell_table) {
    s += fmt::format("{},{},{},{},{},{}\n", num(r), num(l), maybe(res.kappa, r), maybe(res.alpha, r),
                     maybe(res.chi1, r), maybe(res.chi2, r));
  }
  emit(s, o.out.empty() ? cfg.output.csv : o.out, out);
  return kOk;
}

inline int certify_task(const Common& o, const config::Config& cfg, std::ostream& out) {
  const auto fam = cfg.ensemble();
  const auto scenarios = cfg.make_scenario_list(fam);
  auto copt = cfg.check_options();
  if (o.threads) copt.threads = o.threads;
  const std::string& task = cfg.certify.task;
  const std::string path = o.out.empty() ? cfg.output.csv : o.out;

  if (task == "estimate") {
    if (!cfg.estimate) throw ConfigError("certify: task 'estimate' needs an 'estimate' section");
    const auto rep = check_estimate(fam, *cfg.estimate, scenarios, copt);
    print_report(out, fmt::format("{} estimate", to_string(cfg.estimate->kind)), rep);
    if (!path.empty()) emit(margins_csv(rep, scenarios), path, out);
    return rep.pass ? kOk : kEstimateFailed;
  }
  if (task == "pipeline") {
    if (!cfg.certificate) throw ConfigError("certify: task 'pipeline' needs a 'certificate' section");
    PipelineOptions popt;
    popt.check = copt;
    popt.gains = cfg.gains;
    const auto env = AssumptionEnvelopes::from(fam.front().sys.assumptions);
    const auto rep = pipeline_iss_to_iiss(fam, *cfg.certificate, env, scenarios, popt);
    for (std::size_t i = 0; i < rep.stages.size(); ++i) {
      const auto& st = rep.stages[i];
      print_report(out, fmt::format("stage {} {}", i + 1, st.name), st.report);
      if (!st.detail.empty()) out << "  " << st.detail << "\n";
    }
    if (rep.halted_at) fmt::print(out, "halted at stage {}\n", *rep.halted_at + 1);
    fmt::print(out, "pipeline: {}\n", rep.pass ? "PASS" : "FAIL");
    return rep.pass ? kOk : kEstimateFailed;
  }
  if (task == "weak-strong") {
    if (!cfg.estimate) throw ConfigError("certify: task 'weak-strong' needs an 'estimate' section");
    if (!cfg.certify.uib_phi) throw ConfigError("certify: task 'weak-strong' needs 'certify.uib_phi'");
    const ComparisonFunction phi = *cfg.certify.uib_phi;
    const auto rep = check_weak_strong_equiv(fam, [phi](double s) { return phi(s); }, *cfg.estimate, scenarios, copt);
    fmt::print(out, "uib: {} ({} pairs)\n", rep.uib.pass ? "PASS" : "FAIL", rep.uib.pairs_checked);
    print_report(out, "strong", rep.strong);
    print_report(out, "weak", rep.weak);
    print_report(out, "surrogate", rep.surrogate);
    fmt::print(out, "strong-implies-weak violations: {} of {} points\n", rep.implication_violations, rep.points);
    fmt::print(out, "weak/strong: {}\n", rep.pass ? "PASS" : "FAIL");
    return rep.pass ? kOk : kEstimateFailed;
  }
  if (task == "decomposition") {
    if (!cfg.estimate) throw ConfigError("certify: task 'decomposition' needs an 'estimate' section");
    const auto rep = check_iiss_decomposition(fam, *cfg.estimate, scenarios, copt);
    print_report(out, "iISS", rep.iiss);
    print_report(out, "derived 0-GUAS", rep.guas);
    print_report(out, "derived UBEBS", rep.ubebs);
    fmt::print(out, "decomposition: {}\n", rep.holds ? "PASS" : "FAIL");
    return rep.holds ? kOk : kEstimateFailed;
  }
  throw ConfigError("certify.task: unknown task '" + task + "' (expected estimate, pipeline, weak-strong, decomposition)");
}

inline int cmd_certify(const Common& o, std::ostream& out) {
  const auto cfg = config::load(o.config);
  if (cfg.output.report.empty()) return certify_task(o, cfg, out);
  // report text goes to stdout and to the report file
  std::ostringstream rs;
  const int code = certify_task(o, cfg, rs);
  out << rs.str();
  emit(rs.str(), cfg.output.report, out);
  return code;
}

inline int cmd_probe(const Common& o, std::ostream& out) {
  const auto cfg = config::load(o.config);
  const auto fam = cfg.ensemble();
  ProbeOptions p;
  p.eps_grid = cfg.probe.eps_grid;
  p.r_grid = cfg.probe.r_grid;
  p.s_grid = cfg.probe.s_grid;
  p.T_cells = cfg.probe.T_cells;
  p.T_search = cfg.probe.T_search;
  p.budget = cfg.probe.budget;
  p.horizon = cfg.horizon;
  p.t0_max = std::min(cfg.scenarios.t0_max, cfg.horizon / 2);
  p.input_max = cfg.scenarios.input_max;
  p.seed = cfg.seed;
  p.alpha = cfg.probe.alpha;
  p.check = cfg.check_options();
  if (o.threads) p.check.threads = o.threads;
  const auto rep = probe_eps_delta(fam, cfg.probe.rho1, cfg.probe.rho2, p);
  out << "bounded reachable sets (T, r, s) -> C\n";
  for (const auto& b : rep.bounds) {
    fmt::print(out, "  T={} r={} s={}  C={}{}\n", num(b.T), num(b.r), num(b.s), num(b.C), b.escaped ? "  (escape)" : "");
  }
  out << "stability radius eps -> delta\n";
  for (const auto& d : rep.deltas) {
    fmt::print(out, "  eps={}  {}  delta={}\n", num(d.eps), to_string(d.status), num(d.delta));
  }
  out << "settling r, eps -> T\n";
  for (const auto& s : rep.settles) {
    fmt::print(out, "  r={} eps={}  {}  T={}\n", num(s.r), num(s.eps), to_string(s.status), num(s.T));
  }
  fmt::print(out, "{} trajectories; {}\n", rep.trajectories, rep.note);
  return kOk;
}

inline int cmd_suite(const std::vector<std::string>& only, std::uint64_t seed, std::ostream& out) {
  const auto results = acceptance::run(only, seed);
  if (results.empty()) throw ConfigError("suite: --only matched no criterion");
  bool all = true;
  for (const auto& r : results) {
    out << acceptance::format(r) << "\n";
    all = all && r.pass;
  }
  fmt::print(out, "{} of {} criteria passed\n",
             std::count_if(results.begin(), results.end(), [](const auto& r) { return r.pass; }), results.size());
  return all ? kOk : kEstimateFailed;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Stability checks for impulsive systems with inputs", "impulsive"};
  app.require_subcommand(1);

  detail::Common common;
  std::size_t member = 0, initial = 0, points = 201;
  std::vector<std::string> only;
  std::uint64_t seed = 1;

  auto with_config = [&](CLI::App* sub, bool writes) {
    sub->add_option("-c,--config", common.config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
    if (writes) sub->add_option("-o,--out", common.out, "output file (default: config output.csv, else stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "simulate one member from one initial condition, CSV out");
  with_config(sim, true);
  sim->add_option("--member", member, "family member index");
  sim->add_option("--initial", initial, "initial condition index");
  sim->add_option("--points", points, "uniform output rows (jump rows are added)");

  auto* nrm = app.add_subcommand("norms", "sup and energy norms of the input, exceedance sets");
  with_config(nrm, true);
  nrm->add_option("--member", member, "family member whose impulse times are used");

  auto* bnd = app.add_subcommand("bound", "Gronwall bound h_k(t) as CSV");
  with_config(bnd, true);

  auto* gns = app.add_subcommand("gains", "synthesize UBEBS gains from an ISS certificate");
  with_config(gns, true);
  gns->add_option("--member", member, "family member whose envelopes are used");

  auto* cert = app.add_subcommand("certify", "check an estimate or run a certification task");
  with_config(cert, true);
  cert->add_option("--threads", common.threads, "worker threads (default: IMPULSIVE_THREADS or all cores)");

  auto* prb = app.add_subcommand("probe", "epsilon-delta probes of the zero-input equilibrium");
  with_config(prb, false);
  prb->add_option("--threads", common.threads, "worker threads");

  auto* ste = app.add_subcommand("suite", "run the acceptance criteria");
  ste->add_option("--only", only, "criterion tags or numbers")->delimiter(',');
  ste->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return detail::cmd_simulate(common, member, initial, points, out, err);
    if (*nrm) return detail::cmd_norms(common, member, out);
    if (*bnd) return detail::cmd_bound(common, out);
    if (*gns) return detail::cmd_gains(common, member, out);
    if (*cert) return detail::cmd_certify(common, out);
    if (*prb) return detail::cmd_probe(common, out);
    if (*ste) return detail::cmd_suite(only, seed, out);
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kEstimateFailed;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace impulsive::cli
