#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ppanova {

/// Pairwise (tree) summation. Error grows like O(log n) instead of O(n),
/// which matters for the cubic-size triple sums of the Levene statistics.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 32) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

/// Neumaier compensated accumulator for streaming sums and means.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_mean(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s.add(v);
  return x.empty() ? 0.0 : s.value() / static_cast<double>(x.size());
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

}  // namespace ppanova
