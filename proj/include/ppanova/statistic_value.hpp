#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace ppanova {

/// Outcome flag of a statistic evaluation.
///  - Ok:         a regular finite value.
///  - Infinite:   zero denominator with a positive numerator; sorts above
///                every finite value in permutation ranking.
///  - Degenerate: 0/0, reported as 0.
///  - Invalid:    not evaluable (e.g. non-positive covariance estimate);
///                never outranks the observed value.
enum class StatFlag { Ok, Infinite, Degenerate, Invalid };

inline const char* to_string(StatFlag f) {
  switch (f) {
    case StatFlag::Ok: return "ok";
    case StatFlag::Infinite: return "infinite";
    case StatFlag::Degenerate: return "degenerate";
    case StatFlag::Invalid: return "invalid";
  }
  return "unknown";
}

struct StatisticValue {
  std::string name;
  double value = 0.0;
  StatFlag flag = StatFlag::Ok;
  std::map<std::string, double> components;

  bool ok() const { return flag == StatFlag::Ok; }
};

/// Conservative permutation-ranking order: does a permuted outcome count as
/// greater-or-equal to the observed one? Ties count as greater; infinities
/// outrank all finite values; invalid outcomes never count.
inline bool counts_as_geq(const StatisticValue& permuted,
                          const StatisticValue& observed) {
  if (permuted.flag == StatFlag::Invalid) return false;
  if (permuted.flag == StatFlag::Infinite) return true;
  if (observed.flag == StatFlag::Infinite) return false;
  return permuted.value >= observed.value;
}

/// Plug-in estimates of the null quantities behind the normalized Levene
/// statistic, reported on the full-distance scale.
struct NullEstimates {
  double gamma_sq_hat = 0.0;  ///< estimate of Cov(d(X,Y), d(X,Z))
  double sigma_sq_hat = 0.0;  ///< estimate of Var d(X,Y)
  bool gamma_negative = false;
};

namespace detail {

// Fills value/flag of a ratio statistic with the zero-denominator sentinels.
inline void flag_ratio(StatisticValue& s, double numerator, double denominator,
                       double scale) {
  if (denominator > 0.0) {
    s.value = scale * numerator / denominator;
    s.flag = StatFlag::Ok;
  } else if (numerator > 0.0) {
    s.value = std::numeric_limits<double>::infinity();
    s.flag = StatFlag::Infinite;
  } else {
    s.value = 0.0;
    s.flag = StatFlag::Degenerate;
  }
}

}  // namespace detail

}  // namespace ppanova
