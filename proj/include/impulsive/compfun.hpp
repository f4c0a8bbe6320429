#pragma once

// Comparison functions: class K, K-infinity, KL and the nondecreasing
// envelopes that appear next to them in stability estimates.
//
// A ComparisonFunction is an immutable expression tree over a handful of
// closed forms (power laws, exponential decay, log1p, tabulated knots) and
// combinators (min, max, sum, product, composition, numerical inverse).
// Class membership is never assumed: it is checked on a sampling grid by
// validate().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/errors.hpp"

namespace impulsive {

enum class FunctionKind {
  K,              ///< continuous, strictly increasing, zero at zero
  KInf,           ///< class K and unbounded
  KLSection,      ///< decay profile t -> d(t), nonincreasing to zero
  Nondecreasing,  ///< continuous nondecreasing, nonnegative (envelopes N, O, P, L)
};

enum class FunctionForm {
  AffinePower,    ///< c + a r^p
  ExpDecay,       ///< c exp(-k t)
  RationalDecay,  ///< c (1 + t)^(-q)
  Log1p,          ///< a ln(1 + r)
  MinOfTwo,
  MaxOfTwo,
  Sum,
  Product,
  Composition,  ///< children[0] o children[1]
  Inverse,      ///< numerical inverse of children[0]
  Tabulated,    ///< piecewise linear through knots
  Custom,       ///< user callable, not serializable
};

inline constexpr double kDefaultDomainHint = 1e6;
inline constexpr double kDefaultInversionTol = 1e-10;
inline constexpr std::size_t kDefaultValidationGrid = 1024;

inline const char* to_string(FunctionKind k) {
  switch (k) {
    case FunctionKind::K: return "K";
    case FunctionKind::KInf: return "KInf";
    case FunctionKind::KLSection: return "KL-section";
    case FunctionKind::Nondecreasing: return "nondecreasing";
  }
  return "?";
}

inline const char* to_string(FunctionForm f) {
  switch (f) {
    case FunctionForm::AffinePower: return "affine-power";
    case FunctionForm::ExpDecay: return "exp-decay";
    case FunctionForm::RationalDecay: return "rational-decay";
    case FunctionForm::Log1p: return "log1p";
    case FunctionForm::MinOfTwo: return "min-of-two";
    case FunctionForm::MaxOfTwo: return "max-of-two";
    case FunctionForm::Sum: return "sum";
    case FunctionForm::Product: return "product";
    case FunctionForm::Composition: return "composition";
    case FunctionForm::Inverse: return "inverse";
    case FunctionForm::Tabulated: return "tabulated";
    case FunctionForm::Custom: return "custom";
  }
  return "?";
}

class ComparisonFunction;
double invert(const ComparisonFunction& f, double y, double tol = kDefaultInversionTol);

class ComparisonFunction {
 public:
  using Callable = std::function<double(double)>;

  /// Identity, the default-constructed function.
  ComparisonFunction() : ComparisonFunction(affine_power(1.0, 1.0)) {}

  static ComparisonFunction identity() { return affine_power(1.0, 1.0); }

  static ComparisonFunction linear(double slope) { return affine_power(slope, 1.0); }

  /// c + a r^p. Kind defaults to KInf when c == 0 and a, p > 0, otherwise
  /// Nondecreasing.
  static ComparisonFunction affine_power(double a, double p, double c = 0.0) {
    if (!(p > 0.0) && a != 0.0) throw DomainError("affine-power: exponent must be positive");
    const bool k_inf = (c == 0.0 && a > 0.0 && p > 0.0);
    return make(k_inf ? FunctionKind::KInf : FunctionKind::Nondecreasing,
                FunctionForm::AffinePower, {a, p, c});
  }

  static ComparisonFunction constant(double c) {
    if (c < 0.0) throw DomainError("constant envelope must be nonnegative");
    return make(FunctionKind::Nondecreasing, FunctionForm::AffinePower, {0.0, 1.0, c});
  }

  static ComparisonFunction exp_decay(double scale, double rate) {
    if (!(scale > 0.0) || !(rate > 0.0)) throw DomainError("exp-decay: scale and rate must be positive");
    return make(FunctionKind::KLSection, FunctionForm::ExpDecay, {scale, rate});
  }

  static ComparisonFunction rational_decay(double scale, double order) {
    if (!(scale > 0.0) || !(order > 0.0)) throw DomainError("rational-decay: scale and order must be positive");
    return make(FunctionKind::KLSection, FunctionForm::RationalDecay, {scale, order});
  }

  static ComparisonFunction log1p(double a) {
    if (!(a > 0.0)) throw DomainError("log1p: coefficient must be positive");
    return make(FunctionKind::KInf, FunctionForm::Log1p, {a});
  }

  static ComparisonFunction min_of(const ComparisonFunction& f, const ComparisonFunction& g) {
    auto out = combine(FunctionForm::MinOfTwo, f, g);
    out.node_->domain_hint = std::min(f.domain_hint(), g.domain_hint());
    // min of a K-infinity and a bounded K function is bounded
    if (f.kind() == FunctionKind::KInf && g.kind() == FunctionKind::KInf) {
      out.node_->kind = FunctionKind::KInf;
    }
    return out;
  }

  static ComparisonFunction max_of(const ComparisonFunction& f, const ComparisonFunction& g) {
    auto out = combine(FunctionForm::MaxOfTwo, f, g);
    out.node_->domain_hint = std::min(f.domain_hint(), g.domain_hint());
    if (f.kind() == FunctionKind::KInf || g.kind() == FunctionKind::KInf) {
      if (is_class_k(f.kind()) && is_class_k(g.kind())) out.node_->kind = FunctionKind::KInf;
    }
    return out;
  }

  static ComparisonFunction sum(const ComparisonFunction& f, const ComparisonFunction& g) {
    auto out = combine(FunctionForm::Sum, f, g);
    out.node_->domain_hint = std::min(f.domain_hint(), g.domain_hint());
    if (is_class_k(f.kind()) && is_class_k(g.kind()) &&
        (f.kind() == FunctionKind::KInf || g.kind() == FunctionKind::KInf)) {
      out.node_->kind = FunctionKind::KInf;
    }
    return out;
  }

  static ComparisonFunction product(const ComparisonFunction& f, const ComparisonFunction& g) {
    auto out = combine(FunctionForm::Product, f, g);
    out.node_->domain_hint = std::min(f.domain_hint(), g.domain_hint());
    return out;
  }

  /// Piecewise-linear interpolation through (r_i, v_i). The first knot must be
  /// at r = 0. Past the last knot the last slope is continued when
  /// `extrapolate` is set; otherwise evaluation there is a DomainError.
  static ComparisonFunction tabulated(std::vector<double> r, std::vector<double> v,
                                      FunctionKind kind = FunctionKind::KInf,
                                      bool extrapolate = true) {
    if (r.size() < 2 || r.size() != v.size()) throw DomainError("tabulated: need >= 2 matching knots");
    if (r.front() != 0.0) throw DomainError("tabulated: first knot must be at 0");
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (!(r[i] > r[i - 1])) throw DomainError("tabulated: knot abscissae must increase strictly");
    }
    auto out = make(kind, FunctionForm::Tabulated, {extrapolate ? 1.0 : 0.0});
    out.node_->domain_hint = r.back();
    out.node_->knots_r = std::move(r);
    out.node_->knots_v = std::move(v);
    return out;
  }

  static ComparisonFunction custom(Callable fn, FunctionKind kind, std::string name,
                                   double domain_hint = kDefaultDomainHint) {
    auto out = make(kind, FunctionForm::Custom, {});
    out.node_->fn = std::move(fn);
    out.node_->name = std::move(name);
    out.node_->domain_hint = domain_hint;
    return out;
  }

  double operator()(double r) const {
    if (r < 0.0 || std::isnan(r)) throw DomainError("comparison function evaluated at negative argument");
    return eval(*node_, r);
  }

  FunctionKind kind() const { return node_->kind; }
  FunctionForm form() const { return node_->form; }
  const std::vector<double>& parameters() const { return node_->params; }
  const std::vector<ComparisonFunction>& children() const { return node_->children; }
  const std::vector<double>& knots_r() const { return node_->knots_r; }
  const std::vector<double>& knots_v() const { return node_->knots_v; }
  const std::string& name() const { return node_->name; }
  double domain_hint() const { return node_->domain_hint; }
  bool serializable() const {
    if (node_->form == FunctionForm::Custom) return false;
    return std::all_of(node_->children.begin(), node_->children.end(),
                       [](const ComparisonFunction& c) { return c.serializable(); });
  }

  ComparisonFunction with_domain_hint(double hint) const {
    if (!(hint > 0.0)) throw DomainError("domain hint must be positive");
    ComparisonFunction out = *this;
    out.node_ = std::make_shared<Node>(*node_);
    out.node_->domain_hint = hint;
    return out;
  }

  ComparisonFunction with_kind(FunctionKind kind) const {
    ComparisonFunction out = *this;
    out.node_ = std::make_shared<Node>(*node_);
    out.node_->kind = kind;
    return out;
  }

  static bool is_class_k(FunctionKind k) { return k == FunctionKind::K || k == FunctionKind::KInf; }

 private:
  struct Node {
    FunctionKind kind = FunctionKind::KInf;
    FunctionForm form = FunctionForm::AffinePower;
    std::vector<double> params;
    std::vector<ComparisonFunction> children;
    std::vector<double> knots_r, knots_v;
    Callable fn;
    std::string name;
    double domain_hint = kDefaultDomainHint;
  };

  explicit ComparisonFunction(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static ComparisonFunction make(FunctionKind kind, FunctionForm form, std::vector<double> params) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->form = form;
    n->params = std::move(params);
    return ComparisonFunction(std::move(n));
  }

  static ComparisonFunction combine(FunctionForm form, const ComparisonFunction& f,
                                    const ComparisonFunction& g) {
    FunctionKind kind = FunctionKind::Nondecreasing;
    if (is_class_k(f.kind()) && is_class_k(g.kind())) kind = FunctionKind::K;
    auto out = make(kind, form, {});
    out.node_->children = {f, g};
    return out;
  }

  static double eval(const Node& n, double r) {
    switch (n.form) {
      case FunctionForm::AffinePower: {
        const double a = n.params[0], p = n.params[1], c = n.params[2];
        if (a == 0.0) return c;
        if (p == 1.0) return c + a * r;
        if (p == 2.0) return c + a * r * r;
        return c + a * std::pow(r, p);
      }
      case FunctionForm::ExpDecay: return n.params[0] * std::exp(-n.params[1] * r);
      case FunctionForm::RationalDecay: return n.params[0] * std::pow(1.0 + r, -n.params[1]);
      case FunctionForm::Log1p: return n.params[0] * std::log1p(r);
      case FunctionForm::MinOfTwo: return std::min(n.children[0](r), n.children[1](r));
      case FunctionForm::MaxOfTwo: return std::max(n.children[0](r), n.children[1](r));
      case FunctionForm::Sum: return n.children[0](r) + n.children[1](r);
      case FunctionForm::Product: return n.children[0](r) * n.children[1](r);
      case FunctionForm::Composition: return n.children[0](n.children[1](r));
      case FunctionForm::Inverse: return invert(n.children[0], r, n.params.empty() ? kDefaultInversionTol : n.params[0]);
      case FunctionForm::Tabulated: return eval_table(n, r);
      case FunctionForm::Custom: return n.fn(r);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  static double eval_table(const Node& n, double r) {
    const auto& xs = n.knots_r;
    const auto& vs = n.knots_v;
    if (r >= xs.back()) {
      if (r == xs.back()) return vs.back();
      if (n.params[0] == 0.0) throw DomainError("tabulated function evaluated past its last knot");
      const std::size_t k = xs.size() - 1;
      const double slope = (vs[k] - vs[k - 1]) / (xs[k] - xs[k - 1]);
      return vs[k] + slope * (r - xs[k]);
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (r - xs[i]) / (xs[i + 1] - xs[i]);
    return vs[i] + w * (vs[i + 1] - vs[i]);
  }

  friend ComparisonFunction compose(const ComparisonFunction& f, const ComparisonFunction& g);
  friend ComparisonFunction inverse(const ComparisonFunction& f, double tol);

  std::shared_ptr<Node> node_;
};

/// Bisection inverse of a strictly increasing function on [0, domain_hint].
/// The upper bracket starts at min(1, hint) and doubles up to the hint.
inline double invert(const ComparisonFunction& f, double y, double tol) {
  if (y < 0.0 || std::isnan(y)) throw DomainError("invert: target must be nonnegative");
  const double f0 = f(0.0);
  if (y <= f0) {
    if (y == f0 || f0 - y <= tol) return 0.0;
    throw RangeError("invert: target below f(0)");
  }
  const double hint = f.domain_hint();
  double lo = 0.0, flo = f0;
  double hi = std::min(1.0, hint);
  double fhi = f(hi);
  while (fhi < y) {
    if (fhi < flo) throw ValidationError("invert: function not monotone on bracket");
    if (hi >= hint) {
      throw RangeError("invert: target " + std::to_string(y) + " above f(domain_hint) = " +
                       std::to_string(fhi));
    }
    lo = hi;
    flo = fhi;
    hi = std::min(2.0 * hi, hint);
    fhi = f(hi);
  }
  if (std::abs(fhi - y) <= tol) return hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm < flo || fm > fhi) throw ValidationError("invert: function not monotone on bracket");
    if (std::abs(fm - y) <= tol) return mid;
    if (fm < y) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return (y - flo <= fhi - y) ? lo : hi;
}

/// Lazily inverted function; evaluation bisects children[0] at each call.
inline ComparisonFunction inverse(const ComparisonFunction& f, double tol = kDefaultInversionTol) {
  if (!ComparisonFunction::is_class_k(f.kind())) throw ValidationError("inverse: argument must be class K");
  auto out = ComparisonFunction::make(f.kind(), FunctionForm::Inverse, {tol});
  out.node_->children = {f};
  out.node_->domain_hint = f(f.domain_hint());
  return out;
}

/// f o g. The result's domain hint is the largest r <= g.hint with
/// g(r) <= f.hint, so validation never samples f outside its own domain.
inline ComparisonFunction compose(const ComparisonFunction& f, const ComparisonFunction& g) {
  FunctionKind kind = FunctionKind::Nondecreasing;
  if (ComparisonFunction::is_class_k(f.kind()) && ComparisonFunction::is_class_k(g.kind())) {
    kind = (f.kind() == FunctionKind::KInf && g.kind() == FunctionKind::KInf) ? FunctionKind::KInf
                                                                                : FunctionKind::K;
  }
  double hint = g.domain_hint();
  if (g(hint) > f.domain_hint()) {
    double lo = 0.0, hi = hint;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hint; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) <= f.domain_hint() ? lo : hi) = mid;
    }
    hint = lo;
    if (!(hint > 1e-12 * g.domain_hint())) {
      throw DomainError("compose: inner function leaves the outer domain immediately");
    }
  }
  auto out = ComparisonFunction::make(kind, FunctionForm::Composition, {});
  out.node_->children = {f, g};
  out.node_->domain_hint = hint;
  return out;
}

/// beta(r, t) = outer(amplitude(r) * decay(t)).
///
/// The product form covers the usual exponential and polynomial decay rates;
/// `outer` lets compositions like alpha^{-1} o beta stay class KL.
class KLFunction {
 public:
  KLFunction() = default;
  KLFunction(ComparisonFunction amplitude, ComparisonFunction decay)
      : amplitude_(std::move(amplitude)), decay_(std::move(decay)) {}
  KLFunction(ComparisonFunction amplitude, ComparisonFunction decay, ComparisonFunction outer)
      : amplitude_(std::move(amplitude)), decay_(std::move(decay)), outer_(std::move(outer)) {}

  /// beta(r, s) = scale * r * exp(-rate s)
  static KLFunction exponential(double scale, double rate) {
    return KLFunction(ComparisonFunction::linear(scale), ComparisonFunction::exp_decay(1.0, rate));
  }

  double operator()(double r, double t) const {
    if (r < 0.0 || t < 0.0 || std::isnan(r) || std::isnan(t)) {
      throw DomainError("KL function evaluated at negative argument");
    }
    const double inner = amplitude_(r) * decay_(t);
    return outer_ ? (*outer_)(inner) : inner;
  }

  /// beta(., 0) as a class-K function.
  ComparisonFunction at_zero() const {
    const double d0 = decay_(0.0);
    ComparisonFunction inner =
        d0 == 1.0 ? amplitude_ : compose(ComparisonFunction::linear(d0), amplitude_);
    return outer_ ? compose(*outer_, inner) : inner;
  }

  /// g o beta
  KLFunction composed_with(const ComparisonFunction& g) const {
    return KLFunction(amplitude_, decay_, outer_ ? compose(g, *outer_) : g);
  }

  const ComparisonFunction& amplitude() const { return amplitude_; }
  const ComparisonFunction& decay() const { return decay_; }
  const std::optional<ComparisonFunction>& outer() const { return outer_; }

 private:
  ComparisonFunction amplitude_ = ComparisonFunction::identity();
  ComparisonFunction decay_ = ComparisonFunction::exp_decay(1.0, 1.0);
  std::optional<ComparisonFunction> outer_;
};

struct Violation {
  enum class Type { ZeroAtZero, Monotonicity, Decay, Negative, NonFinite };
  Type type;
  double r = 0.0;
  double t = 0.0;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;  ///< first few offending points
  std::size_t violation_count = 0;
  std::size_t points_checked = 0;

  bool ok() const { return violation_count == 0; }

  void add(Violation v) {
    ++violation_count;
    if (violations.size() < 32) violations.push_back(std::move(v));
  }
};

namespace detail {

/// Uniform grid on [0, hint] merged with a geometric grid on [1e-9 hint, hint].
inline std::vector<double> validation_grid(double hint, std::size_t n) {
  if (n < 2) throw DomainError("validation grid needs at least 2 points");
  std::vector<double> g;
  g.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) g.push_back(hint * static_cast<double>(i) / static_cast<double>(n - 1));
  const double lo = std::log(hint * 1e-9), hi = std::log(hint);
  for (std::size_t i = 0; i < n; ++i) {
    g.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  std::sort(g.begin(), g.end());
  // drop near-duplicates where the two grids meet
  g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return b - a <= 1e-12 * std::abs(b); }), g.end());
  g.back() = hint;
  return g;
}

}  // namespace detail

/// Checks the declared class on a sampling grid. Violations are reported,
/// never thrown; evaluation failures count as NonFinite violations.
inline ValidationReport validate(const ComparisonFunction& f,
                                 std::size_t grid_size = kDefaultValidationGrid) {
  ValidationReport rep;
  const auto grid = detail::validation_grid(f.domain_hint(), grid_size);
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      vals[i] = f(grid[i]);
    } catch (const std::exception& e) {
      rep.add({Violation::Type::NonFinite, grid[i], 0.0, 0.0, e.what()});
      vals[i] = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(vals[i]) && !std::isnan(vals[i])) {
      rep.add({Violation::Type::NonFinite, grid[i], 0.0, vals[i], "non-finite value"});
    }
  }
  rep.points_checked = grid.size();
  const FunctionKind kind = f.kind();
  if (ComparisonFunction::is_class_k(kind) && !(std::abs(vals[0]) <= 1e-12)) {
    rep.add({Violation::Type::ZeroAtZero, 0.0, 0.0, vals[0], "f(0) != 0"});
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (vals[i] < 0.0) rep.add({Violation::Type::Negative, grid[i], 0.0, vals[i], "negative value"});
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = vals[i - 1], b = vals[i];
    if (std::isnan(a) || std::isnan(b)) continue;
    bool bad = false;
    switch (kind) {
      case FunctionKind::K:
      case FunctionKind::KInf: bad = !(b > a); break;
      case FunctionKind::Nondecreasing: bad = b < a; break;
      case FunctionKind::KLSection: bad = b > a; break;
    }
    if (bad) {
      rep.add({Violation::Type::Monotonicity, grid[i], 0.0, b,
               kind == FunctionKind::KLSection ? "decay profile increases" : "not increasing"});
    }
  }
  return rep;
}

struct KLValidationOptions {
  std::size_t grid_size = kDefaultValidationGrid;
  double t_big = 1e7;
  double decay_tol = 1e-6;
  std::vector<double> t_samples{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
};

/// beta(., t) strictly increasing for sampled t, beta(r, .) nonincreasing and
/// below decay_tol * beta(r, 0) at t_big.
inline ValidationReport validate(const KLFunction& beta, const KLValidationOptions& opt = {}) {
  ValidationReport rep;
  const double hint = beta.amplitude().domain_hint();
  const auto rgrid = detail::validation_grid(hint, opt.grid_size);
  auto safe = [&](double r, double t) -> double {
    try {
      return beta(r, t);
    } catch (const std::exception& e) {
      rep.add({Violation::Type::NonFinite, r, t, 0.0, e.what()});
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  for (double t : opt.t_samples) {
    double prev = safe(0.0, t);
    if (!(std::abs(prev) <= 1e-12)) rep.add({Violation::Type::ZeroAtZero, 0.0, t, prev, "beta(0,t) != 0"});
    for (std::size_t i = 1; i < rgrid.size(); ++i) {
      const double v = safe(rgrid[i], t);
      ++rep.points_checked;
      if (!(v > prev)) rep.add({Violation::Type::Monotonicity, rgrid[i], t, v, "beta(.,t) not increasing"});
      prev = v;
    }
  }
  std::vector<double> tgrid;
  const std::size_t nt = std::max<std::size_t>(opt.grid_size / 4, 16);
  tgrid.push_back(0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    tgrid.push_back(std::exp(std::log(1e-3) + (std::log(opt.t_big) - std::log(1e-3)) *
                                                  static_cast<double>(i) / static_cast<double>(nt - 1)));
  }
  for (double r : {1e-3 * hint, 1e-6 * hint, 1.0, hint}) {
    double prev = safe(r, 0.0);
    const double b0 = prev;
    for (std::size_t i = 1; i < tgrid.size(); ++i) {
      const double v = safe(r, tgrid[i]);
      ++rep.points_checked;
      if (v > prev) rep.add({Violation::Type::Monotonicity, r, tgrid[i], v, "beta(r,.) increases"});
      prev = v;
    }
    if (!(prev < opt.decay_tol * b0)) {
      rep.add({Violation::Type::Decay, r, opt.t_big, prev, "beta(r,t_big) not below tolerance"});
    }
  }
  return rep;
}

inline void require_valid(const ComparisonFunction& f, const std::string& what,
                          std::size_t grid = 256) {
  const auto rep = validate(f, grid);
  if (!rep.ok()) {
    const auto& v = rep.violations.front();
    throw ValidationError(what + " failed class validation at r=" + std::to_string(v.r) + ": " + v.message);
  }
}

}  // namespace impulsive
