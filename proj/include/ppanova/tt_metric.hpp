#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ppanova/assignment.hpp"
#include "ppanova/errors.hpp"
#include "ppanova/parallel.hpp"
#include "ppanova/point_pattern.hpp"

namespace ppanova {

/// Builds the padded assignment problem for two patterns, everything in the
/// p-th power domain. The smaller pattern is padded with dummies up to the
/// larger cardinality; real-real entries are cut off at 2 C^p, which makes
/// matching two far points cost the same as leaving both unmatched;
/// real-dummy entries cost C^p.
inline CostMatrix tt_cost_matrix(const PointPattern& a, const PointPattern& b,
                                 const MetricParams& params) {
  params.validate();
  const std::size_t m = a.size();
  const std::size_t k = b.size();
  const std::size_t n = std::max(m, k);
  const double dummy = params.unmatched_cost();
  const double cutoff = params.pair_cutoff();
  const double p = params.order;

  CostMatrix cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool real_i = i < m;
      const bool real_j = j < k;
      if (real_i && real_j) {
        double c;
        if (p == 2.0) {
          c = squared_distance(a[i], b[j]);
        } else if (p == 1.0) {
          c = euclidean_distance(a[i], b[j]);
        } else {
          c = std::pow(euclidean_distance(a[i], b[j]), p);
        }
        cost.cost(i, j) = std::min(c, cutoff);
        cost.tag(i, j) = CostTag::RealReal;
      } else if (real_i || real_j) {
        cost.cost(i, j) = dummy;
        cost.tag(i, j) = CostTag::RealDummy;
      } else {
        cost.cost(i, j) = 0.0;
        cost.tag(i, j) = CostTag::DummyDummy;
      }
    }
  }
  return cost;
}

namespace detail {

inline bool pattern_less(const PointPattern& a, const PointPattern& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x) return a[i].x < b[i].x;
    if (a[i].y != b[i].y) return a[i].y < b[i].y;
  }
  return false;
}

inline double tt_power_cost(const PointPattern& a, const PointPattern& b,
                            const MetricParams& params) {
  // Canonical argument order makes d(a, b) and d(b, a) the same computation,
  // hence bitwise equal.
  const PointPattern& lo = pattern_less(b, a) ? b : a;
  const PointPattern& hi = pattern_less(b, a) ? a : b;
  if (hi.empty()) return 0.0;
  return solve_assignment(tt_cost_matrix(lo, hi, params)).total_cost;
}

}  // namespace detail

/// Transport-transform distance between two patterns: the optimal total cost
/// of the padded assignment problem, rooted once at the end. The distance of
/// the empty pattern to itself is 0 and to a pattern xi is C*|xi|^(1/p).
inline double tt_distance(const PointPattern& a, const PointPattern& b,
                          const MetricParams& params) {
  if (params.kind != MetricKind::TT) {
    throw invalid_input("tt_distance requires MetricKind::TT");
  }
  params.validate();
  return params.root(detail::tt_power_cost(a, b, params));
}

/// Relative transport-transform distance: TT divided by the larger
/// cardinality to the 1/p. Defined as 0 when both patterns are empty.
inline double rtt_distance(const PointPattern& a, const PointPattern& b,
                           const MetricParams& params) {
  if (params.kind != MetricKind::RTT) {
    throw invalid_input("rtt_distance requires MetricKind::RTT");
  }
  params.validate();
  const std::size_t card = std::max(a.size(), b.size());
  if (card == 0) return 0.0;
  MetricParams tt = params;
  tt.kind = MetricKind::TT;
  return tt_distance(a, b, tt) / params.root(static_cast<double>(card));
}

inline double pattern_distance(const PointPattern& a, const PointPattern& b,
                               const MetricParams& params) {
  return params.kind == MetricKind::TT ? tt_distance(a, b, params)
                                       : rtt_distance(a, b, params);
}

/// Symmetric pairwise-distance store with zero diagonal; only the upper
/// triangle is kept.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, MetricParams params)
      : n_(n), params_(params), data_(n * (n - 1) / 2, 0.0) {
    if (n == 0) data_.clear();
  }

  std::size_t size() const { return n_; }
  const MetricParams& params() const { return params_; }

  double at(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return data_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double value) {
    if (i == j) {
      if (value != 0.0) throw invalid_input("distance matrix diagonal must be 0");
      return;
    }
    if (!std::isfinite(value) || value < 0.0) {
      throw invalid_input("distances must be finite and >= 0");
    }
    data_[index(i, j)] = value;
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    // Row-major upper triangle without the diagonal.
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  MetricParams params_{};
  std::vector<double> data_;
};

/// All pairwise distances of a pattern list. Entries are independent, so the
/// computation may be spread over threads; every entry is produced by the
/// same single-pair call either way and the result is bit-identical.
inline DistanceMatrix distance_matrix(const std::vector<PointPattern>& patterns,
                                      const MetricParams& params,
                                      unsigned threads = 1) {
  params.validate();
  const std::size_t n = patterns.size();
  if (n < 2) {
    throw invalid_input("distance_matrix needs at least 2 patterns");
  }
  DistanceMatrix d(n, params);
  const std::int64_t total = static_cast<std::int64_t>(n * (n - 1) / 2);
  parallel_for(total, threads, [&](std::int64_t t) {
    // Unrank the linear index into (i, j), i < j.
    std::size_t i = 0;
    std::size_t rem = static_cast<std::size_t>(t);
    while (rem >= n - 1 - i) {
      rem -= n - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + rem;
    d.set(i, j, pattern_distance(patterns[i], patterns[j], params));
  });
  return d;
}

}  // namespace ppanova
