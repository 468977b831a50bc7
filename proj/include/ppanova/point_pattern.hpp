#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ppanova/errors.hpp"

namespace ppanova {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double euclidean_distance(Point a, Point b) {
  return std::sqrt(squared_distance(a, b));
}

/// A finite multiset of planar points. The empty pattern is valid and
/// repeated points are allowed.
class PointPattern {
 public:
  PointPattern() = default;
  explicit PointPattern(std::vector<Point> points) : points_(std::move(points)) {
    for (const Point& p : points_) check_finite(p);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  void add(Point p) {
    check_finite(p);
    points_.push_back(p);
  }

 private:
  static void check_finite(Point p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw invalid_input("point pattern coordinates must be finite");
    }
  }

  std::vector<Point> points_;
};

enum class MetricKind { TT, RTT };

/// Penalty C (in coordinate units) and order p >= 1 of the transport
/// metric. The per-point penalty for leaving a point unmatched is C^p; a
/// matched pair never costs more than 2 C^p.
struct MetricParams {
  double penalty = 0.25;
  double order = 2.0;
  MetricKind kind = MetricKind::TT;

  void validate() const {
    if (!(penalty > 0.0) || !std::isfinite(penalty)) {
      throw invalid_input("metric penalty C must be positive and finite");
    }
    if (!(order >= 1.0) || !std::isfinite(order)) {
      throw invalid_input("metric order p must be >= 1");
    }
  }

  /// C^p, the cost of matching a real point to a dummy.
  double unmatched_cost() const { return std::pow(penalty, order); }

  /// 2 C^p, the cutoff applied to real-real matching costs.
  double pair_cutoff() const { return 2.0 * unmatched_cost(); }

  /// x^(1/p) with the common p = 2 and p = 1 cases kept exact.
  double root(double x) const {
    if (order == 2.0) return std::sqrt(x);
    if (order == 1.0) return x;
    return std::pow(x, 1.0 / order);
  }
};

}  // namespace ppanova
