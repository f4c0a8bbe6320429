#pragma once

// Piecewise-smooth inputs with explicit values at impulse instants, the two
// hybrid input norms, magnitude truncation and exceedance sets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/compfun.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/hybrid_time.hpp"
#include "impulsive/quadrature.hpp"
#include "impulsive/vector.hpp"

namespace impulsive {

/// Closed-form shape of one input segment, evaluated at absolute time t.
struct SegmentShape {
  enum class Kind { Constant, Polynomial, Sinusoid, Tabulated, Custom };

  Kind kind = Kind::Constant;
  Vector value;                              ///< Constant
  std::vector<std::vector<double>> coeffs;   ///< Polynomial: per component, c0 + c1 t + ...
  Vector amplitude, omega, phase, offset;    ///< Sinusoid: offset + amplitude sin(omega t + phase)
  std::vector<double> sample_times;          ///< Tabulated
  std::vector<Vector> samples;
  bool linear = true;                        ///< Tabulated: linear interpolation, else zero-order hold
  std::function<Vector(double)> custom;

  static SegmentShape constant(Vector v) {
    SegmentShape s;
    s.kind = Kind::Constant;
    s.value = std::move(v);
    return s;
  }
  static SegmentShape polynomial(std::vector<std::vector<double>> c) {
    SegmentShape s;
    s.kind = Kind::Polynomial;
    s.coeffs = std::move(c);
    return s;
  }
  static SegmentShape sinusoid(Vector amp, Vector om, Vector ph, Vector off) {
    SegmentShape s;
    s.kind = Kind::Sinusoid;
    s.amplitude = std::move(amp);
    s.omega = std::move(om);
    s.phase = std::move(ph);
    s.offset = std::move(off);
    return s;
  }
  static SegmentShape tabulated(std::vector<double> times, std::vector<Vector> values, bool linear) {
    if (times.empty() || times.size() != values.size()) throw DomainError("tabulated input: mismatched samples");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw DomainError("tabulated input: sample times must increase");
    }
    SegmentShape s;
    s.kind = Kind::Tabulated;
    s.sample_times = std::move(times);
    s.samples = std::move(values);
    s.linear = linear;
    return s;
  }
  static SegmentShape from_function(std::function<Vector(double)> fn) {
    SegmentShape s;
    s.kind = Kind::Custom;
    s.custom = std::move(fn);
    return s;
  }

  std::size_t dimension() const {
    switch (kind) {
      case Kind::Constant: return value.size();
      case Kind::Polynomial: return coeffs.size();
      case Kind::Sinusoid: return amplitude.size();
      case Kind::Tabulated: return samples.front().size();
      case Kind::Custom: return custom(0.0).size();
    }
    return 0;
  }

  Vector operator()(double t) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Polynomial: {
        Vector out(coeffs.size(), 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
          double acc = 0.0;
          for (auto it = coeffs[i].rbegin(); it != coeffs[i].rend(); ++it) acc = acc * t + *it;
          out[i] = acc;
        }
        return out;
      }
      case Kind::Sinusoid: {
        Vector out(amplitude.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
          out[i] = offset[i] + amplitude[i] * std::sin(omega[i] * t + phase[i]);
        }
        return out;
      }
      case Kind::Tabulated: {
        if (t <= sample_times.front()) return samples.front();
        if (t >= sample_times.back()) return samples.back();
        const auto it = std::upper_bound(sample_times.begin(), sample_times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - sample_times.begin()) - 1;
        if (!linear) return samples[i];
        const double w = (t - sample_times[i]) / (sample_times[i + 1] - sample_times[i]);
        Vector out = samples[i];
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * (samples[i + 1][k] - samples[i][k]);
        return out;
      }
      case Kind::Custom: return custom(t);
    }
    return {};
  }
};

struct SignalSegment {
  double start = 0.0;  ///< segment covers [start, end)
  double end = 0.0;
  SegmentShape shape;
};

/// Piecewise-smooth input u : [0, horizon] -> R^m.
///
/// Segments partition [0, horizon); the last one is closed at the horizon.
/// `point_values` override u at isolated instants (the values the jump map
/// sees); elsewhere those instants carry the segment value. An optional
/// clip level b makes the signal u_b with |u_b| = min(|u|, b).
class InputSignal {
 public:
  InputSignal() = default;

  InputSignal(std::size_t dimension, std::vector<SignalSegment> segments, std::map<double, Vector> point_values = {})
      : dim_(dimension), segments_(std::move(segments)), points_(std::move(point_values)) {
    if (segments_.empty()) throw DomainError("input signal needs at least one segment");
    if (segments_.front().start != 0.0) throw DomainError("input segments must start at 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(s.end > s.start)) throw DomainError("input segment with empty interval");
      if (i > 0 && s.start != segments_[i - 1].end) throw DomainError("input segments must be contiguous");
      if (s.shape.dimension() != dim_) throw DomainError("input segment dimension mismatch");
    }
    for (const auto& [t, v] : points_) {
      if (t < 0.0 || t > horizon()) throw DomainError("point value outside the signal horizon");
      if (v.size() != dim_) throw DomainError("point value dimension mismatch");
    }
  }

  static InputSignal constant(double horizon, Vector value) {
    const std::size_t m = value.size();
    return InputSignal(m, {{0.0, horizon, SegmentShape::constant(std::move(value))}});
  }
  static InputSignal zero(double horizon, std::size_t m) { return constant(horizon, Vector(m, 0.0)); }
  static InputSignal from_function(double horizon, std::size_t m, std::function<Vector(double)> fn) {
    return InputSignal(m, {{0.0, horizon, SegmentShape::from_function(std::move(fn))}});
  }

  std::size_t dimension() const { return dim_; }
  double horizon() const { return segments_.back().end; }
  const std::vector<SignalSegment>& segments() const { return segments_; }
  const std::map<double, Vector>& point_values() const { return points_; }
  std::optional<double> clip() const { return clip_; }

  InputSignal with_point_value(double t, Vector v) const {
    InputSignal out = *this;
    out.points_[t] = std::move(v);
    if (t < 0.0 || t > horizon()) throw DomainError("point value outside the signal horizon");
    return out;
  }

  /// Same signal with every value scaled by `s` (point values included).
  InputSignal scaled(double s) const {
    InputSignal out = *this;
    out.scale_ *= s;
    return out;
  }
  double scale() const { return scale_; }

  /// Index of the segment whose half-open interval contains t.
  std::size_t segment_index(double t) const {
    if (t < 0.0 || t > horizon()) throw DomainError("input evaluated outside [0, horizon]");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const SignalSegment& s) { return v < s.end; });
    if (it == segments_.end()) return segments_.size() - 1;
    return static_cast<std::size_t>(it - segments_.begin());
  }

  /// Segment value at t, ignoring point overrides.
  Vector flow_value(double t) const { return piece_value(segment_index(t), t); }

  /// Value the jump map sees: the point override if one exists, else the segment value.
  Vector value_at(double t) const {
    if (auto it = points_.find(t); it != points_.end()) return finish(it->second);
    return flow_value(t);
  }

  /// Segment `idx` evaluated at an arbitrary t (its closed-interval continuation).
  Vector piece_value(std::size_t idx, double t) const { return finish(segments_[idx].shape(t)); }

  /// Interior segment boundaries.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 1; i < segments_.size(); ++i) b.push_back(segments_[i].start);
    return b;
  }

  friend InputSignal truncate(const InputSignal& u, double b);

 private:
  Vector finish(Vector v) const {
    if (scale_ != 1.0) {
      for (double& x : v) x *= scale_;
    }
    if (clip_) {
      const double n = norm(v);
      if (n > *clip_) {
        const double f = *clip_ / n;
        for (double& x : v) x *= f;
      }
    }
    return v;
  }

  std::size_t dim_ = 1;
  std::vector<SignalSegment> segments_;
  std::map<double, Vector> points_;
  double scale_ = 1.0;
  std::optional<double> clip_;
};

/// u_b: values with |u| > b are rescaled onto the sphere of radius b.
inline InputSignal truncate(const InputSignal& u, double b) {
  if (b < 0.0) throw DomainError("truncate: level must be nonnegative");
  InputSignal out = u;
  out.clip_ = u.clip_ ? std::min(*u.clip_, b) : b;
  return out;
}

struct NormOptions {
  std::size_t refine_points = 256;  ///< per-segment sampling for the essential sup
  QuadratureOptions quadrature{};
};

namespace detail {

inline void check_interval(const InputSignal& u, double a, double b) {
  if (a < 0.0) throw DomainError("norm interval starts before 0");
  if (b > u.horizon() * (1.0 + 1e-15)) throw DomainError("norm interval ends past the input horizon");
}

/// Golden-section maximisation of g on [lo, hi].
template <class G>
double golden_max(const G& g, double lo, double hi, int iters = 60) {
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  double best = std::max({g(lo), g(hi), f1, f2});
  for (int i = 0; i < iters && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = g(x2);
      best = std::max(best, f2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = g(x1);
      best = std::max(best, f1);
    }
  }
  return best;
}

/// max of |u| over the closed segment piece [lo, hi].
inline double segment_sup(const InputSignal& u, std::size_t idx, double lo, double hi, std::size_t n) {
  if (u.segments()[idx].shape.kind == SegmentShape::Kind::Constant) return norm(u.piece_value(idx, lo));
  auto g = [&](double t) { return norm(u.piece_value(idx, t)); };
  if (!(hi > lo)) return g(lo);
  double best = -1.0;
  std::size_t arg = 0;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    vals[i] = g(t);
    if (vals[i] > best) {
      best = vals[i];
      arg = i;
    }
  }
  const double h = (hi - lo) / static_cast<double>(n);
  const double a = lo + h * static_cast<double>(arg > 0 ? arg - 1 : 0);
  const double b = std::min(hi, lo + h * static_cast<double>(arg + 1));
  return std::max(best, golden_max(g, a, b));
}

}  // namespace detail

/// ||u_(a,b]||_{inf,gamma}: max of the essential sup of |u| over (a, b] and
/// |u(tau)| over impulse times tau in (a, b]. An empty interval gives 0.
inline double sup_norm(const InputSignal& u, double a, double b, const ImpulseSequence& gamma,
                       const NormOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  detail::check_interval(u, a, b);
  b = std::min(b, u.horizon());
  double best = 0.0;
  const auto& segs = u.segments();
  for (std::size_t i = u.segment_index(a); i < segs.size(); ++i) {
    const double lo = std::max(a, segs[i].start), hi = std::min(b, segs[i].end);
    if (segs[i].start >= b) break;
    if (!(hi > lo)) continue;
    best = std::max(best, detail::segment_sup(u, i, lo, hi, opt.refine_points));
  }
  for (double tau : gamma.times()) {
    if (tau > a && tau <= b) best = std::max(best, norm(u.value_at(tau)));
  }
  return best;
}

/// ||u_(a,b]||_{rho1,rho2,gamma} = int_a^b rho1(|u|) + sum over tau in (a, b] of rho2(|u(tau)|).
inline double energy_norm(const InputSignal& u, double a, double b, const ImpulseSequence& gamma,
                          const ComparisonFunction& rho1, const ComparisonFunction& rho2,
                          const NormOptions& opt = {}) {
  require_valid(rho1, "rho1", 64);
  require_valid(rho2, "rho2", 64);
  if (!(b > a)) return 0.0;
  detail::check_interval(u, a, b);
  b = std::min(b, u.horizon());
  double total = 0.0;
  const auto& segs = u.segments();
  for (std::size_t i = u.segment_index(a); i < segs.size(); ++i) {
    if (segs[i].start >= b) break;
    const double lo = std::max(a, segs[i].start), hi = std::min(b, segs[i].end);
    if (!(hi > lo)) continue;
    QuadratureOptions q = opt.quadrature;
    q.abs_tol = opt.quadrature.abs_tol * (hi - lo) / (b - a);
    if (segs[i].shape.kind == SegmentShape::Kind::Constant) {
      total += rho1(norm(u.piece_value(i, lo))) * (hi - lo);
      continue;
    }
    if (segs[i].shape.kind == SegmentShape::Kind::Tabulated) {
      // integrate between sample times so hold/linear kinks are breakpoints
      const auto& st = segs[i].shape.sample_times;
      total += integrate_piecewise([&](double s) { return rho1(norm(u.piece_value(i, s))); }, lo, hi, st, q);
      continue;
    }
    total += integrate([&](double s) { return rho1(norm(u.piece_value(i, s))); }, lo, hi, q);
  }
  for (double tau : gamma.times()) {
    if (tau > a && tau <= b) total += rho2(norm(u.value_at(tau)));
  }
  return total;
}

struct Exceedance {
  double measure = 0.0;          ///< Lebesgue measure of {t in [0, horizon] : |u(t)| > b}
  std::size_t impulse_count = 0;  ///< number of impulse times with |u(tau)| > b
};

/// Omega_u(b) = {t : |u(t)| > b}: its measure over the signal horizon and the
/// impulse times inside it.
inline Exceedance exceedance(const InputSignal& u, double b, const ImpulseSequence& gamma,
                             std::size_t samples_per_segment = 512) {
  if (b < 0.0) throw DomainError("exceedance: level must be nonnegative");
  Exceedance out;
  const auto& segs = u.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const double lo = segs[i].start, hi = segs[i].end;
    auto g = [&](double t) { return norm(u.piece_value(i, t)) - b; };
    if (segs[i].shape.kind == SegmentShape::Kind::Constant) {
      if (g(lo) > 0.0) out.measure += hi - lo;
      continue;
    }
    std::vector<double> grid;
    const std::size_t n = samples_per_segment;
    for (std::size_t k = 0; k <= n; ++k) grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n));
    if (segs[i].shape.kind == SegmentShape::Kind::Tabulated) {
      for (double st : segs[i].shape.sample_times) {
        if (st > lo && st < hi) grid.push_back(st);
      }
      std::sort(grid.begin(), grid.end());
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      double x0 = grid[k], x1 = grid[k + 1];
      const double g0 = g(x0), g1 = g(x1);
      const bool in0 = g0 > 0.0, in1 = g1 > 0.0;
      if (in0 && in1) {
        out.measure += x1 - x0;
      } else if (in0 != in1) {
        // one crossing assumed inside a sampling cell
        double a = x0, c = x1;
        for (int it = 0; it < 100 && c - a > 1e-15 * std::max(1.0, std::abs(c)); ++it) {
          const double m = 0.5 * (a + c);
          ((g(m) > 0.0) == in0 ? a : c) = m;
        }
        const double root = 0.5 * (a + c);
        out.measure += in0 ? root - x0 : x1 - root;
      }
    }
  }
  for (double tau : gamma.times()) {
    if (tau <= u.horizon() && norm(u.value_at(tau)) > b) ++out.impulse_count;
  }
  return out;
}

}  // namespace impulsive
