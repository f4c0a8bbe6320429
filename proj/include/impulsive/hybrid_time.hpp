#pragma once

// Impulse-time sequences and the hybrid clock (t - t0) + #jumps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/errors.hpp"

namespace impulsive {

/// Finite, strictly increasing impulse times inside (0, horizon]. Time zero
/// is never an impulse time.
class ImpulseSequence {
 public:
  ImpulseSequence() = default;

  ImpulseSequence(std::vector<double> times, double horizon)
      : times_(std::move(times)), horizon_(horizon) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw DomainError("impulse sequence: horizon must be positive");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      if (!(t > 0.0) || t > horizon_) throw DomainError("impulse sequence: times must lie in (0, horizon]");
      if (i > 0 && !(t > times_[i - 1])) throw DomainError("impulse sequence: times must increase strictly");
    }
  }

  static ImpulseSequence empty(double horizon) { return ImpulseSequence({}, horizon); }

  const std::vector<double>& times() const { return times_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  bool contains(double t) const { return std::binary_search(times_.begin(), times_.end(), t); }

  /// Impulse times in (a, b].
  std::vector<double> in_interval(double a, double b) const {
    auto lo = std::upper_bound(times_.begin(), times_.end(), a);
    auto hi = std::upper_bound(times_.begin(), times_.end(), b);
    return {lo, hi};
  }

  /// Same times on a different horizon; times past the new horizon are dropped.
  ImpulseSequence truncated(double horizon) const {
    std::vector<double> kept;
    for (double t : times_) {
      if (t <= horizon) kept.push_back(t);
    }
    return ImpulseSequence(std::move(kept), horizon);
  }

  ImpulseSequence without(double t) const {
    std::vector<double> kept;
    for (double s : times_) {
      if (s != t) kept.push_back(s);
    }
    return ImpulseSequence(std::move(kept), horizon_);
  }

  friend bool operator==(const ImpulseSequence&, const ImpulseSequence&) = default;

 private:
  std::vector<double> times_;
  double horizon_ = 1.0;
};

/// Number of impulse times in the half-open interval (a, b].
inline std::size_t count_impulses(const ImpulseSequence& gamma, double a, double b) {
  if (b > gamma.horizon()) throw DomainError("count_impulses: interval end past horizon");
  if (!(b > a)) return 0;
  const auto& t = gamma.times();
  return static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), b) -
                                  std::upper_bound(t.begin(), t.end(), a));
}

/// (t - t0) + number of impulses in (t0, t].
inline double hybrid_elapsed(const ImpulseSequence& gamma, double t0, double t) {
  if (t < t0) throw DomainError("hybrid_elapsed: t < t0");
  return (t - t0) + static_cast<double>(count_impulses(gamma, t0, t));
}

/// Snapshot of the hybrid clock started at t0.
struct HybridClock {
  double t0 = 0.0;
  double t = 0.0;
  std::size_t jumps = 0;

  static HybridClock at(const ImpulseSequence& gamma, double t0, double t) {
    if (t < t0) throw DomainError("HybridClock: t < t0");
    return {t0, t, count_impulses(gamma, t0, t)};
  }
  double elapsed() const { return (t - t0) + static_cast<double>(jumps); }
};

struct UibViolation {
  std::size_t sequence = 0;  ///< index into the family
  double t0 = 0.0;
  double t = 0.0;
  std::size_t count = 0;
  double bound = 0.0;  ///< phi(t - t0)
};

struct UibReport {
  bool pass = true;
  std::size_t pairs_checked = 0;
  std::optional<UibViolation> worst;  ///< largest count - phi excess
  std::optional<std::size_t> first_failing;
  std::size_t failing_sequences = 0;
  /// The definition quantifies over all t > t0 >= 0; only pairs inside each
  /// sequence's horizon are examined.
  std::string limitation = "finite-horizon check: pairs (t0, t) restricted to each sequence horizon";
};

/// Checks n_(t0,t] <= phi(t - t0) for every sequence of the family.
///
/// Jump counts are piecewise constant with breakpoints on the impulse times,
/// so the binding pairs are t0 just below tau_i and t = tau_j; those are
/// examined exactly, with phi evaluated at the limit tau_j - tau_i (phi is
/// continuous). A uniform grid of pairs is added as a cross-check.
inline UibReport check_uib(const std::vector<ImpulseSequence>& family,
                           const std::function<double(double)>& phi, std::size_t grid = 512) {
  UibReport rep;
  double worst_excess = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t idx, double t0, double t, std::size_t count, bool& seq_failed) {
    ++rep.pairs_checked;
    const double bound = phi(std::max(0.0, t - t0));
    const double excess = static_cast<double>(count) - bound;
    if (excess > 0.0) {
      rep.pass = false;
      if (!seq_failed) {
        seq_failed = true;
        ++rep.failing_sequences;
        if (!rep.first_failing) rep.first_failing = idx;
      }
    }
    if (excess > worst_excess) {
      worst_excess = excess;
      if (excess > 0.0) rep.worst = UibViolation{idx, t0, t, count, bound};
    }
  };
  for (std::size_t idx = 0; idx < family.size(); ++idx) {
    const auto& g = family[idx];
    const auto& ts = g.times();
    bool failed = false;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = i; j < ts.size(); ++j) {
        // t0 just below tau_i counts j - i + 1 jumps while t - t0 -> tau_j - tau_i
        consider(idx, ts[i], ts[j], j - i + 1, failed);
      }
    }
    const double h = g.horizon();
    for (std::size_t a = 0; a < grid; a += 8) {
      const double t0 = h * static_cast<double>(a) / static_cast<double>(grid);
      for (std::size_t b = a + 1; b <= grid; b += 4) {
        const double t = h * static_cast<double>(b) / static_cast<double>(grid);
        consider(idx, t0, t, count_impulses(g, t0, t), failed);
      }
    }
  }
  return rep;
}

/// Sequence with consecutive gaps >= delta on (0, horizon]. Without a seed
/// the gaps are exactly delta; with a seed each gap is delta (1 + U[0, jitter)).
inline ImpulseSequence gen_dwell(double delta, double horizon, std::optional<std::uint64_t> jitter_seed = {},
                                 double jitter = 0.5) {
  if (!(delta > 0.0)) throw DomainError("gen_dwell: delta must be positive");
  if (!(horizon > 0.0)) throw DomainError("gen_dwell: horizon must be positive");
  std::vector<double> times;
  if (!jitter_seed) {
    for (std::size_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * delta;
      if (t > horizon * (1.0 + 1e-15)) break;
      times.push_back(std::min(t, horizon));
    }
  } else {
    std::mt19937_64 rng(*jitter_seed);
    std::uniform_real_distribution<double> u(0.0, jitter);
    double t = 0.0;
    while (true) {
      t += delta * (1.0 + u(rng));
      if (t > horizon) break;
      times.push_back(t);
    }
  }
  return ImpulseSequence(std::move(times), horizon);
}

/// s_0 = t0, s_j = inf{t >= s_{j-1} : t - s_{j-1} + n_(s_{j-1}, t] >= T~},
/// stopping once s_j would pass the horizon.
///
/// Between impulses the hybrid clock grows with slope one; at an impulse it
/// jumps by one. When the threshold is met exactly by a jump the infimum is
/// the impulse time itself.
inline std::vector<double> partition_hybrid(const ImpulseSequence& gamma, double t0, double t_tilde,
                                            double horizon) {
  if (!(t_tilde > 0.0)) throw DomainError("partition_hybrid: T~ must be positive");
  const auto& ts = gamma.times();
  std::vector<double> s{t0};
  while (true) {
    const double start = s.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), start);
    double m = 0.0;  // jumps counted so far in (start, t]
    std::optional<double> next;
    while (true) {
      const double candidate = start + t_tilde - m;  // pure flow with m jumps
      const double seg_end = it == ts.end() ? std::numeric_limits<double>::infinity() : *it;
      if (candidate < seg_end) {
        next = std::max(candidate, start);
        break;
      }
      m += 1.0;
      if ((*it - start) + m >= t_tilde) {
        next = *it;
        break;
      }
      ++it;
    }
    if (!next || *next > horizon) break;
    if (!(*next > start)) break;
    s.push_back(*next);
  }
  return s;
}

}  // namespace impulsive
