#pragma once

// JSON scenario files: comparison-function descriptors, systems, impulse
// sequences, inputs, estimates and run options. Every parsed object
// serializes back to an equal document.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "impulsive/certify.hpp"
#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/gains.hpp"
#include "impulsive/gronwall.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/simulator.hpp"
#include "impulsive/systems.hpp"

namespace impulsive::config {

using json = nlohmann::ordered_json;

inline constexpr const char* kSupportedForms =
    "identity, affine-power, exp-decay, rational-decay, log1p, min-of-two, max-of-two, sum, product, "
    "composition, inverse, tabulated";

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("config") : path) + ": " + msg);
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      fail(path, "unknown key '" + k + "' (expected one of: " + list + ")");
    }
  }
}

inline const json& at(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(path, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline double num(const json& j, const std::string& path, const char* key, double def) {
  return j.contains(key) ? num(j.at(key), join(path, key)) : def;
}

inline std::vector<double> nums(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline FunctionKind kind_from(const std::string& s, const std::string& path) {
  for (auto k : {FunctionKind::K, FunctionKind::KInf, FunctionKind::KLSection, FunctionKind::Nondecreasing}) {
    if (s == to_string(k)) return k;
  }
  fail(path, "unknown function kind '" + s + "' (expected K, KInf, KL-section, nondecreasing)");
}

/// Call f, prefixing any library error with the config path.
template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Comparison functions

inline json to_json(const ComparisonFunction& f) {
  if (f.form() == FunctionForm::Custom) {
    throw ConfigError("function '" + f.name() + "' is a custom callable and cannot be serialized");
  }
  json j;
  j["form"] = to_string(f.form());
  j["kind"] = to_string(f.kind());
  if (f.form() == FunctionForm::Tabulated) {
    j["extrapolate"] = f.parameters().at(0) != 0.0;
    j["knots"] = {{"r", f.knots_r()}, {"v", f.knots_v()}};
  } else if (!f.parameters().empty()) {
    j["params"] = f.parameters();
  }
  if (!f.children().empty()) {
    json ch = json::array();
    for (const auto& c : f.children()) ch.push_back(to_json(c));
    j["children"] = ch;
  }
  j["hint"] = f.domain_hint();
  return j;
}

/// Accepts the canonical descriptor written by to_json and the shorthand
/// string "identity".
inline ComparisonFunction function_from(const json& j, const std::string& path) {
  using CF = ComparisonFunction;
  using namespace detail;
  if (j.is_string()) {
    if (j.get<std::string>() == "identity") return CF::identity();
    fail(path, "unknown function '" + j.get<std::string>() + "'; supported forms: " + kSupportedForms);
  }
  check_keys(j, path, {"form", "kind", "params", "children", "knots", "extrapolate", "hint"});
  const std::string form = str(at(j, path, "form"), join(path, "form"));
  auto params = [&](std::size_t n) {
    const auto p = nums(at(j, path, "params"), join(path, "params"));
    if (p.size() != n) fail(join(path, "params"), "expected " + std::to_string(n) + " values for " + form);
    return p;
  };
  auto children = [&](std::size_t n) {
    const json& c = at(j, path, "children");
    if (!c.is_array() || c.size() != n) fail(join(path, "children"), "expected " + std::to_string(n) + " functions");
    std::vector<CF> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(function_from(c[i], join(path, "children") + "[" + std::to_string(i) + "]"));
    return out;
  };
  return guarded(path, [&]() -> CF {
    CF f;
    if (form == "identity") {
      f = CF::identity();
    } else if (form == "affine-power") {
      const auto p = params(3);
      f = CF::affine_power(p[0], p[1], p[2]);
    } else if (form == "exp-decay") {
      const auto p = params(2);
      f = CF::exp_decay(p[0], p[1]);
    } else if (form == "rational-decay") {
      const auto p = params(2);
      f = CF::rational_decay(p[0], p[1]);
    } else if (form == "log1p") {
      f = CF::log1p(params(1)[0]);
    } else if (form == "min-of-two" || form == "max-of-two" || form == "sum" || form == "product" ||
               form == "composition") {
      const auto c = children(2);
      if (form == "min-of-two") f = CF::min_of(c[0], c[1]);
      if (form == "max-of-two") f = CF::max_of(c[0], c[1]);
      if (form == "sum") f = CF::sum(c[0], c[1]);
      if (form == "product") f = CF::product(c[0], c[1]);
      if (form == "composition") f = compose(c[0], c[1]);
    } else if (form == "inverse") {
      const auto c = children(1);
      const double tol = j.contains("params") ? params(1)[0] : kDefaultInversionTol;
      f = inverse(c[0], tol);
    } else if (form == "tabulated") {
      const json& k = at(j, path, "knots");
      const auto r = nums(at(k, join(path, "knots"), "r"), join(path, "knots.r"));
      const auto v = nums(at(k, join(path, "knots"), "v"), join(path, "knots.v"));
      const bool ex = j.value("extrapolate", true);
      const FunctionKind kind = j.contains("kind") ? kind_from(str(j["kind"], join(path, "kind")), path) : FunctionKind::KInf;
      f = CF::tabulated(r, v, kind, ex);
    } else {
      fail(join(path, "form"), "unknown function form '" + form + "'; supported forms: " + kSupportedForms);
    }
    if (j.contains("kind")) f = f.with_kind(kind_from(str(j["kind"], join(path, "kind")), join(path, "kind")));
    if (j.contains("hint")) f = f.with_domain_hint(num(j["hint"], join(path, "hint")));
    return f;
  });
}

inline json to_json(const KLFunction& b) {
  json j{{"amplitude", to_json(b.amplitude())}, {"decay", to_json(b.decay())}};
  if (b.outer()) j["outer"] = to_json(*b.outer());
  return j;
}

/// Canonical {amplitude, decay[, outer]} or the shorthand
/// {"form": "exponential", "scale": c, "rate": k} for c r e^{-k s}.
inline KLFunction kl_from(const json& j, const std::string& path) {
  using namespace detail;
  if (j.is_object() && j.contains("form")) {
    check_keys(j, path, {"form", "scale", "rate"});
    if (str(j["form"], join(path, "form")) != "exponential") fail(join(path, "form"), "only 'exponential' is a KL shorthand");
    const double c = num(at(j, path, "scale"), join(path, "scale"));
    const double k = num(at(j, path, "rate"), join(path, "rate"));
    return guarded(path, [&] { return KLFunction::exponential(c, k); });
  }
  check_keys(j, path, {"amplitude", "decay", "outer"});
  auto amp = function_from(at(j, path, "amplitude"), join(path, "amplitude"));
  auto dec = function_from(at(j, path, "decay"), join(path, "decay"));
  if (j.contains("outer")) return KLFunction(amp, dec, function_from(j["outer"], join(path, "outer")));
  return KLFunction(amp, dec);
}

// ---------------------------------------------------------------------------
// Systems, impulse sequences, inputs

struct SystemSpec {
  std::string name = "S1";
  std::map<std::string, double> params;

  SystemModel build() const { return detail::guarded("system", [&] { return systems::from_name(name, params); }); }
};

struct GammaSpec {
  std::vector<double> times;
  std::optional<double> dwell;
  std::optional<std::uint64_t> jitter_seed;
  double jitter = 0.5;
  double horizon = 10.0;

  ImpulseSequence build() const {
    return detail::guarded("gamma", [&] {
      if (dwell) return gen_dwell(*dwell, horizon, jitter_seed, jitter);
      return ImpulseSequence(times, horizon);
    });
  }
};

struct MemberSpec {
  SystemSpec system;
  GammaSpec gamma;
};

inline json to_json(const SystemSpec& s) {
  json p = json::object();
  for (const auto& [k, v] : s.params) p[k] = v;
  return {{"name", s.name}, {"params", p}};
}

inline SystemSpec system_from(const json& j, const std::string& path) {
  using namespace detail;
  if (j.is_string()) return {j.get<std::string>(), {}};
  check_keys(j, path, {"name", "params"});
  SystemSpec s;
  s.name = str(at(j, path, "name"), join(path, "name"));
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) fail(join(path, "params"), "expected an object of numbers");
    for (const auto& [k, v] : p.items()) s.params[k] = num(v, join(join(path, "params"), k));
  }
  return s;
}

inline json to_json(const GammaSpec& g) {
  json j;
  if (g.dwell) {
    j["kind"] = "dwell";
    j["delta"] = *g.dwell;
    if (g.jitter_seed) j["seed"] = *g.jitter_seed;
    j["jitter"] = g.jitter;
  } else {
    j["kind"] = "literal";
    j["times"] = g.times;
  }
  j["horizon"] = g.horizon;
  return j;
}

/// {"kind": "literal", "times": [...]} or {"kind": "dwell", "delta": d,
/// "seed": s, "jitter": f}; a bare array is a literal.
inline GammaSpec gamma_from(const json& j, const std::string& path, double horizon) {
  using namespace detail;
  GammaSpec g;
  g.horizon = horizon;
  if (j.is_array()) {
    g.times = nums(j, path);
    return g;
  }
  check_keys(j, path, {"kind", "times", "delta", "seed", "jitter", "horizon"});
  g.horizon = num(j, path, "horizon", g.horizon);
  const std::string kind = j.contains("kind") ? str(j["kind"], join(path, "kind")) : "literal";
  if (kind == "dwell") {
    if (j.contains("times")) fail(path, "a dwell generator takes no 'times'");
    g.dwell = num(at(j, path, "delta"), join(path, "delta"));
    if (j.contains("seed")) g.jitter_seed = count(j["seed"], join(path, "seed"));
    g.jitter = num(j, path, "jitter", g.jitter);
  } else if (kind == "literal") {
    if (j.contains("delta") || j.contains("seed")) fail(path, "a literal sequence takes only 'times' and 'horizon'");
    if (j.contains("times")) g.times = nums(j["times"], join(path, "times"));
  } else {
    fail(join(path, "kind"), "expected 'literal' or 'dwell'");
  }
  return g;
}

inline json to_json(const SegmentShape& s) {
  using K = SegmentShape::Kind;
  switch (s.kind) {
    case K::Constant: return {{"shape", "constant"}, {"value", s.value}};
    case K::Polynomial: return {{"shape", "polynomial"}, {"coeffs", s.coeffs}};
    case K::Sinusoid:
      return {{"shape", "sinusoid"}, {"amplitude", s.amplitude}, {"omega", s.omega}, {"phase", s.phase}, {"offset", s.offset}};
    case K::Tabulated:
      return {{"shape", "tabulated"}, {"times", s.sample_times}, {"values", s.samples}, {"linear", s.linear}};
    case K::Custom: throw ConfigError("custom input segments cannot be serialized");
  }
  return {};
}

inline SegmentShape shape_from(const json& j, const std::string& path) {
  using namespace detail;
  const std::string shape = str(at(j, path, "shape"), join(path, "shape"));
  auto vec = [&](const char* k) { return nums(at(j, path, k), join(path, k)); };
  return guarded(path, [&] {
    if (shape == "constant") {
      check_keys(j, path, {"start", "end", "shape", "value"});
      return SegmentShape::constant(vec("value"));
    }
    if (shape == "polynomial") {
      check_keys(j, path, {"start", "end", "shape", "coeffs"});
      std::vector<std::vector<double>> c;
      const json& cj = at(j, path, "coeffs");
      if (!cj.is_array()) fail(join(path, "coeffs"), "expected one coefficient list per component");
      for (std::size_t i = 0; i < cj.size(); ++i) c.push_back(nums(cj[i], join(path, "coeffs") + "[" + std::to_string(i) + "]"));
      return SegmentShape::polynomial(c);
    }
    if (shape == "sinusoid") {
      check_keys(j, path, {"start", "end", "shape", "amplitude", "omega", "phase", "offset"});
      const Vector amp = vec("amplitude");
      const Vector ph = j.contains("phase") ? vec("phase") : Vector(amp.size(), 0.0);
      const Vector off = j.contains("offset") ? vec("offset") : Vector(amp.size(), 0.0);
      return SegmentShape::sinusoid(amp, vec("omega"), ph, off);
    }
    if (shape == "tabulated") {
      check_keys(j, path, {"start", "end", "shape", "times", "values", "linear"});
      std::vector<Vector> vals;
      const json& vj = at(j, path, "values");
      if (!vj.is_array()) fail(join(path, "values"), "expected a list of vectors");
      for (std::size_t i = 0; i < vj.size(); ++i) vals.push_back(nums(vj[i], join(path, "values") + "[" + std::to_string(i) + "]"));
      return SegmentShape::tabulated(vec("times"), vals, j.value("linear", true));
    }
    fail(join(path, "shape"), "unknown segment shape '" + shape + "' (expected constant, polynomial, sinusoid, tabulated)");
  });
}

inline json to_json(const InputSignal& u) {
  json segs = json::array();
  for (const auto& s : u.segments()) {
    json sj{{"start", s.start}, {"end", s.end}};
    sj.update(to_json(s.shape));
    segs.push_back(sj);
  }
  json pts = json::array();
  for (const auto& [t, v] : u.point_values()) pts.push_back({{"t", t}, {"value", v}});
  json j{{"dim", u.dimension()}, {"segments", segs}, {"points", pts}, {"scale", u.scale()}};
  if (u.clip()) j["clip"] = *u.clip();
  return j;
}

/// Full segment form, or the shorthand {"constant": [..], "horizon": H}.
inline InputSignal input_from(const json& j, const std::string& path) {
  using namespace detail;
  if (j.contains("constant")) {
    check_keys(j, path, {"constant", "horizon"});
    const auto v = nums(j["constant"], join(path, "constant"));
    const double h = num(at(j, path, "horizon"), join(path, "horizon"));
    return guarded(path, [&] { return InputSignal::constant(h, v); });
  }
  check_keys(j, path, {"dim", "segments", "points", "scale", "clip"});
  const std::size_t dim = count(at(j, path, "dim"), join(path, "dim"));
  const json& sj = at(j, path, "segments");
  if (!sj.is_array()) fail(join(path, "segments"), "expected a list");
  std::vector<SignalSegment> segs;
  for (std::size_t i = 0; i < sj.size(); ++i) {
    const std::string p = join(path, "segments") + "[" + std::to_string(i) + "]";
    segs.push_back({num(at(sj[i], p, "start"), p + ".start"), num(at(sj[i], p, "end"), p + ".end"), shape_from(sj[i], p)});
  }
  std::map<double, Vector> pts;
  if (j.contains("points")) {
    const json& pj = j["points"];
    if (!pj.is_array()) fail(join(path, "points"), "expected a list of {t, value}");
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const std::string p = join(path, "points") + "[" + std::to_string(i) + "]";
      check_keys(pj[i], p, {"t", "value"});
      pts[num(at(pj[i], p, "t"), p + ".t")] = nums(at(pj[i], p, "value"), p + ".value");
    }
  }
  return guarded(path, [&] {
    InputSignal u(dim, segs, pts);
    if (j.contains("scale")) u = u.scaled(num(j["scale"], join(path, "scale")));
    if (j.contains("clip")) u = truncate(u, num(j["clip"], join(path, "clip")));
    return u;
  });
}

// ---------------------------------------------------------------------------
// Estimates and certificates

inline json to_json(const EstimateSpec& e) {
  if (e.beta_fn) throw ConfigError("estimate with a callable beta cannot be serialized");
  json j{{"kind", to_string(e.kind)}, {"mode", e.mode == EstimateMode::Strong ? "strong" : "weak"}};
  if (e.beta) j["beta"] = to_json(*e.beta);
  auto put = [&](const char* k, const std::optional<ComparisonFunction>& f) {
    if (f) j[k] = to_json(*f);
  };
  put("alpha", e.alpha);
  put("rho", e.rho);
  put("rho1", e.rho1);
  put("rho2", e.rho2);
  put("sigma0", e.sigma0);
  put("sigma1", e.sigma1);
  if (e.kind == EstimateKind::UBEBS) j["c"] = e.c;
  return j;
}

inline EstimateSpec estimate_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"kind", "mode", "beta", "alpha", "rho", "rho1", "rho2", "sigma0", "sigma1", "c"});
  EstimateSpec e;
  const std::string kind = str(at(j, path, "kind"), join(path, "kind"));
  if (kind == "0-GUAS") e.kind = EstimateKind::ZeroGUAS;
  else if (kind == "ISS") e.kind = EstimateKind::ISS;
  else if (kind == "iISS") e.kind = EstimateKind::iISS;
  else if (kind == "UBEBS") e.kind = EstimateKind::UBEBS;
  else fail(join(path, "kind"), "unknown estimate kind '" + kind + "' (expected 0-GUAS, ISS, iISS, UBEBS)");
  const std::string mode = j.contains("mode") ? str(j["mode"], join(path, "mode")) : "strong";
  if (mode != "strong" && mode != "weak") fail(join(path, "mode"), "expected 'strong' or 'weak'");
  e.mode = mode == "strong" ? EstimateMode::Strong : EstimateMode::Weak;
  if (j.contains("beta")) e.beta = kl_from(j["beta"], join(path, "beta"));
  auto get = [&](const char* k, std::optional<ComparisonFunction>& f) {
    if (j.contains(k)) f = function_from(j[k], join(path, k));
  };
  get("alpha", e.alpha);
  get("rho", e.rho);
  get("rho1", e.rho1);
  get("rho2", e.rho2);
  get("sigma0", e.sigma0);
  get("sigma1", e.sigma1);
  e.c = num(j, path, "c", 0.0);
  guarded(path, [&] {
    e.validate();
    return 0;
  });
  return e;
}

inline json to_json(const IssCertificateData& c) { return {{"beta", to_json(c.beta)}, {"rho", to_json(c.rho)}}; }

inline IssCertificateData certificate_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"beta", "rho"});
  IssCertificateData c{kl_from(at(j, path, "beta"), join(path, "beta")),
                       function_from(at(j, path, "rho"), join(path, "rho"))};
  return c;
}

// ---------------------------------------------------------------------------
// Run options

inline json to_json(const IntegratorOptions& o) {
  return {{"method", o.method == IntegratorOptions::Method::RK45 ? "rk45" : "rk4"},
          {"rel_tol", o.rel_tol},
          {"abs_tol", o.abs_tol},
          {"max_step", o.max_step},
          {"initial_step", o.initial_step},
          {"fixed_step", o.fixed_step},
          {"blowup", o.blowup},
          {"escape_resolution", o.escape_resolution},
          {"max_steps", o.max_steps}};
}

inline IntegratorOptions integrator_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"method", "rel_tol", "abs_tol", "max_step", "initial_step", "fixed_step", "blowup",
                       "escape_resolution", "max_steps"});
  IntegratorOptions o;
  if (j.contains("method")) {
    const std::string m = str(j["method"], join(path, "method"));
    if (m == "rk45") o.method = IntegratorOptions::Method::RK45;
    else if (m == "rk4") o.method = IntegratorOptions::Method::RK4;
    else fail(join(path, "method"), "expected 'rk45' or 'rk4'");
  }
  o.rel_tol = num(j, path, "rel_tol", o.rel_tol);
  o.abs_tol = num(j, path, "abs_tol", o.abs_tol);
  o.max_step = num(j, path, "max_step", o.max_step);
  o.initial_step = num(j, path, "initial_step", o.initial_step);
  o.fixed_step = num(j, path, "fixed_step", o.fixed_step);
  o.blowup = num(j, path, "blowup", o.blowup);
  o.escape_resolution = num(j, path, "escape_resolution", o.escape_resolution);
  if (j.contains("max_steps")) o.max_steps = count(j["max_steps"], join(path, "max_steps"));
  return o;
}

struct InitialCondition {
  double t0 = 0.0;
  Vector x0;
};

struct GronwallSpec {
  double p = 0.0;
  std::vector<double> a_breaks;
  std::vector<double> a_values{0.0};
  std::vector<double> c_seq;
  ComparisonFunction omega = ComparisonFunction::identity();
  GammaSpec sigma;
  double t0 = 0.0;
  double T = 1.0;
  std::size_t points = 101;  ///< output rows

  GronwallProblem build() const {
    return detail::guarded("gronwall", [&] {
      GronwallProblem g;
      g.p = p;
      g.a = RateFunction::piecewise_constant(a_breaks, a_values);
      g.c_seq = c_seq;
      g.omega = omega;
      g.sigma = sigma.build();
      g.t0 = t0;
      g.T = T;
      return g;
    });
  }
};

inline json to_json(const GronwallSpec& g) {
  return {{"p", g.p},           {"a_breaks", g.a_breaks}, {"a_values", g.a_values}, {"c", g.c_seq},
          {"omega", to_json(g.omega)}, {"sigma", to_json(g.sigma)}, {"t0", g.t0}, {"T", g.T}, {"points", g.points}};
}

inline GronwallSpec gronwall_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"p", "a_breaks", "a_values", "c", "omega", "sigma", "t0", "T", "points"});
  GronwallSpec g;
  g.p = num(j, path, "p", 0.0);
  if (j.contains("a_breaks")) g.a_breaks = nums(j["a_breaks"], join(path, "a_breaks"));
  if (j.contains("a_values")) g.a_values = nums(j["a_values"], join(path, "a_values"));
  if (j.contains("c")) g.c_seq = nums(j["c"], join(path, "c"));
  if (j.contains("omega")) g.omega = function_from(j["omega"], join(path, "omega"));
  if (j.contains("sigma")) g.sigma = gamma_from(j["sigma"], join(path, "sigma"), g.T);
  g.t0 = num(j, path, "t0", 0.0);
  g.T = num(at(j, path, "T"), join(path, "T"));
  if (j.contains("points")) g.points = count(j["points"], join(path, "points"));
  return g;
}

struct NormsSpec {
  double a = 0.0;
  double b = 1.0;
  ComparisonFunction rho1 = ComparisonFunction::identity();
  ComparisonFunction rho2 = ComparisonFunction::identity();
  std::vector<double> levels;  ///< exceedance levels
};

inline json to_json(const NormsSpec& n) {
  return {{"a", n.a}, {"b", n.b}, {"rho1", to_json(n.rho1)}, {"rho2", to_json(n.rho2)}, {"levels", n.levels}};
}

inline NormsSpec norms_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"a", "b", "rho1", "rho2", "levels"});
  NormsSpec n;
  n.a = num(j, path, "a", n.a);
  n.b = num(at(j, path, "b"), join(path, "b"));
  if (j.contains("rho1")) n.rho1 = function_from(j["rho1"], join(path, "rho1"));
  if (j.contains("rho2")) n.rho2 = function_from(j["rho2"], join(path, "rho2"));
  if (j.contains("levels")) n.levels = nums(j["levels"], join(path, "levels"));
  return n;
}

struct ProbeSpec {
  ComparisonFunction rho1 = ComparisonFunction::identity();
  ComparisonFunction rho2 = ComparisonFunction::identity();
  ComparisonFunction alpha = ComparisonFunction::identity();
  std::vector<double> eps_grid{0.1, 0.5, 1.0};
  std::vector<double> r_grid{1.0, 5.0};
  std::vector<double> s_grid{0.5, 2.0};
  std::vector<double> T_cells{2.0, 5.0};
  std::vector<double> T_search{1.0, 2.0, 4.0, 8.0};
  std::size_t budget = 16;
};

inline json to_json(const ProbeSpec& p) {
  return {{"rho1", to_json(p.rho1)},   {"rho2", to_json(p.rho2)},   {"alpha", to_json(p.alpha)},
          {"eps", p.eps_grid},         {"r", p.r_grid},             {"s", p.s_grid},
          {"T_cells", p.T_cells},      {"T_search", p.T_search},    {"budget", p.budget}};
}

inline ProbeSpec probe_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"rho1", "rho2", "alpha", "eps", "r", "s", "T_cells", "T_search", "budget"});
  ProbeSpec p;
  if (j.contains("rho1")) p.rho1 = function_from(j["rho1"], join(path, "rho1"));
  if (j.contains("rho2")) p.rho2 = function_from(j["rho2"], join(path, "rho2"));
  if (j.contains("alpha")) p.alpha = function_from(j["alpha"], join(path, "alpha"));
  if (j.contains("eps")) p.eps_grid = nums(j["eps"], join(path, "eps"));
  if (j.contains("r")) p.r_grid = nums(j["r"], join(path, "r"));
  if (j.contains("s")) p.s_grid = nums(j["s"], join(path, "s"));
  if (j.contains("T_cells")) p.T_cells = nums(j["T_cells"], join(path, "T_cells"));
  if (j.contains("T_search")) p.T_search = nums(j["T_search"], join(path, "T_search"));
  if (j.contains("budget")) p.budget = count(j["budget"], join(path, "budget"));
  return p;
}

struct ScenarioGenSpec {
  std::size_t count = 50;
  double t0_max = 3.0;
  double x0_max = 10.0;
  double input_max = 2.0;
  std::vector<std::string> shapes{"zero", "step", "sinusoid", "impulsive-point"};
};

inline json to_json(const ScenarioGenSpec& s) {
  return {{"count", s.count}, {"t0_max", s.t0_max}, {"x0_max", s.x0_max}, {"input_max", s.input_max}, {"shapes", s.shapes}};
}

inline ScenarioGenSpec scenario_gen_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"count", "t0_max", "x0_max", "input_max", "shapes"});
  ScenarioGenSpec s;
  if (j.contains("count")) s.count = count(j["count"], join(path, "count"));
  s.t0_max = num(j, path, "t0_max", s.t0_max);
  s.x0_max = num(j, path, "x0_max", s.x0_max);
  s.input_max = num(j, path, "input_max", s.input_max);
  if (j.contains("shapes")) {
    s.shapes.clear();
    for (const auto& v : j["shapes"]) s.shapes.push_back(str(v, join(path, "shapes")));
  }
  return s;
}

inline InputShape shape_named(const std::string& s) {
  for (auto k : {InputShape::Zero, InputShape::Step, InputShape::Sinusoid, InputShape::ImpulsivePoint}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("scenarios.shapes: unknown input shape '" + s + "' (expected zero, step, sinusoid, impulsive-point)");
}

struct CertifySpec {
  std::string task = "estimate";  ///< estimate | pipeline | weak-strong | decomposition
  std::optional<ComparisonFunction> uib_phi;
  std::size_t grid_points = 200;
  double slack = 1e-7;
};

inline json to_json(const CertifySpec& c) {
  json j{{"task", c.task}, {"grid_points", c.grid_points}, {"slack", c.slack}};
  if (c.uib_phi) j["uib_phi"] = to_json(*c.uib_phi);
  return j;
}

inline CertifySpec certify_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"task", "uib_phi", "grid_points", "slack"});
  CertifySpec c;
  if (j.contains("task")) c.task = str(j["task"], join(path, "task"));
  if (c.task != "estimate" && c.task != "pipeline" && c.task != "weak-strong" && c.task != "decomposition") {
    fail(join(path, "task"), "expected estimate, pipeline, weak-strong or decomposition");
  }
  if (j.contains("uib_phi")) c.uib_phi = function_from(j["uib_phi"], join(path, "uib_phi"));
  if (j.contains("grid_points")) c.grid_points = count(j["grid_points"], join(path, "grid_points"));
  c.slack = num(j, path, "slack", c.slack);
  return c;
}

struct OutputSpec {
  std::string csv;
  std::string report;
};

/// One scenario file. Sections are optional; each subcommand states which
/// it needs.
struct Config {
  std::vector<MemberSpec> family;
  std::optional<InputSignal> input;
  std::vector<InitialCondition> initial;
  std::optional<EstimateSpec> estimate;
  std::optional<IssCertificateData> certificate;
  IntegratorOptions integrator;
  ScenarioGenSpec scenarios;
  std::optional<GronwallSpec> gronwall;
  std::optional<NormsSpec> norms;
  GainGridSpec gains;
  ProbeSpec probe;
  CertifySpec certify;
  OutputSpec output;
  double horizon = 10.0;
  std::uint64_t seed = 1;

  Ensemble ensemble() const {
    Ensemble e;
    for (const auto& m : family) e.push_back({m.system.build(), m.gamma.build()});
    return e;
  }

  /// The explicit initial conditions with `input`, or seeded scenarios.
  std::vector<Scenario> make_scenario_list(const Ensemble& fam) const {
    if (fam.empty()) throw ConfigError("config: no system given");
    if (!initial.empty()) {
      std::vector<Scenario> out;
      for (std::size_t i = 0; i < initial.size(); ++i) {
        out.push_back({initial[i].t0, initial[i].x0, input ? *input : InputSignal::zero(horizon, fam.front().sys.m),
                       "initial-" + std::to_string(i)});
      }
      return out;
    }
    ScenarioSpec s;
    s.count = scenarios.count;
    s.seed = seed;
    s.n = fam.front().sys.n;
    s.m = fam.front().sys.m;
    s.horizon = horizon;
    s.t0_max = scenarios.t0_max;
    s.x0_max = scenarios.x0_max;
    s.input_max = scenarios.input_max;
    s.shapes.clear();
    for (const auto& n : scenarios.shapes) s.shapes.push_back(shape_named(n));
    s.point_times = impulse_times(fam);
    return make_scenarios(s);
  }

  CheckOptions check_options() const {
    CheckOptions c;
    c.horizon = horizon;
    c.integrator = integrator;
    c.grid_points = certify.grid_points;
    c.slack = certify.slack;
    return c;
  }
};

inline json to_json(const GainGridSpec& g) {
  return {{"r_max", g.r_max}, {"knots", g.knots}, {"refine", g.refine}, {"epsilon", g.epsilon}, {"safety", g.safety}};
}

inline GainGridSpec gains_from(const json& j, const std::string& path) {
  using namespace detail;
  check_keys(j, path, {"r_max", "knots", "refine", "epsilon", "safety"});
  GainGridSpec g;
  g.r_max = num(j, path, "r_max", g.r_max);
  if (j.contains("knots")) g.knots = count(j["knots"], join(path, "knots"));
  if (j.contains("refine")) g.refine = count(j["refine"], join(path, "refine"));
  g.epsilon = num(j, path, "epsilon", g.epsilon);
  g.safety = num(j, path, "safety", g.safety);
  return g;
}

inline json to_json(const Config& c) {
  json j;
  json fam = json::array();
  for (const auto& m : c.family) fam.push_back({{"system", to_json(m.system)}, {"gamma", to_json(m.gamma)}});
  j["family"] = fam;
  j["horizon"] = c.horizon;
  j["seed"] = c.seed;
  if (c.input) j["input"] = to_json(*c.input);
  if (!c.initial.empty()) {
    json ic = json::array();
    for (const auto& i : c.initial) ic.push_back({{"t0", i.t0}, {"x0", i.x0}});
    j["initial"] = ic;
  }
  if (c.estimate) j["estimate"] = to_json(*c.estimate);
  if (c.certificate) j["certificate"] = to_json(*c.certificate);
  j["integrator"] = to_json(c.integrator);
  j["scenarios"] = to_json(c.scenarios);
  if (c.gronwall) j["gronwall"] = to_json(*c.gronwall);
  if (c.norms) j["norms"] = to_json(*c.norms);
  j["gains"] = to_json(c.gains);
  j["probe"] = to_json(c.probe);
  j["certify"] = to_json(c.certify);
  j["output"] = {{"csv", c.output.csv}, {"report", c.output.report}};
  return j;
}

/// Top level: either "family": [{system, gamma}, ...] or the single-member
/// shorthand "system" + "gamma".
inline Config config_from(const json& j) {
  using namespace detail;
  check_keys(j, "", {"family", "system", "gamma", "horizon", "seed", "input", "initial", "estimate", "certificate",
                     "integrator", "scenarios", "gronwall", "norms", "gains", "probe", "certify", "output"});
  Config c;
  c.horizon = num(j, "", "horizon", c.horizon);
  if (j.contains("seed")) c.seed = count(j["seed"], "seed");
  if (j.contains("family")) {
    if (j.contains("system") || j.contains("gamma")) fail("family", "give either 'family' or 'system'/'gamma'");
    const json& f = j["family"];
    if (!f.is_array()) fail("family", "expected a list of {system, gamma}");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string p = "family[" + std::to_string(i) + "]";
      check_keys(f[i], p, {"system", "gamma"});
      MemberSpec m{system_from(at(f[i], p, "system"), p + ".system"), {}};
      m.gamma.horizon = c.horizon;
      if (f[i].contains("gamma")) m.gamma = gamma_from(f[i]["gamma"], p + ".gamma", c.horizon);
      c.family.push_back(m);
    }
  } else if (j.contains("system")) {
    MemberSpec m{system_from(j["system"], "system"), {}};
    m.gamma.horizon = c.horizon;
    if (j.contains("gamma")) m.gamma = gamma_from(j["gamma"], "gamma", c.horizon);
    c.family.push_back(m);
  }
  if (j.contains("input")) c.input = input_from(j["input"], "input");
  if (j.contains("initial")) {
    const json& ic = j["initial"];
    if (!ic.is_array()) fail("initial", "expected a list of {t0, x0}");
    for (std::size_t i = 0; i < ic.size(); ++i) {
      const std::string p = "initial[" + std::to_string(i) + "]";
      check_keys(ic[i], p, {"t0", "x0"});
      c.initial.push_back({num(ic[i], p, "t0", 0.0), nums(at(ic[i], p, "x0"), p + ".x0")});
    }
  }
  if (j.contains("estimate")) c.estimate = estimate_from(j["estimate"], "estimate");
  if (j.contains("certificate")) c.certificate = certificate_from(j["certificate"], "certificate");
  if (j.contains("integrator")) c.integrator = integrator_from(j["integrator"], "integrator");
  if (j.contains("scenarios")) c.scenarios = scenario_gen_from(j["scenarios"], "scenarios");
  if (j.contains("gronwall")) c.gronwall = gronwall_from(j["gronwall"], "gronwall");
  if (j.contains("norms")) c.norms = norms_from(j["norms"], "norms");
  if (j.contains("gains")) c.gains = gains_from(j["gains"], "gains");
  if (j.contains("probe")) c.probe = probe_from(j["probe"], "probe");
  if (j.contains("certify")) c.certify = certify_from(j["certify"], "certify");
  if (j.contains("output")) {
    check_keys(j["output"], "output", {"csv", "report"});
    c.output.csv = j["output"].value("csv", "");
    c.output.report = j["output"].value("report", "");
  }
  return c;
}

/// Parses JSON text; syntax errors report line and column.
inline Config parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  return config_from(j);
}

inline Config load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace impulsive::config
