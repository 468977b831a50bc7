#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ppanova/layout.hpp"
#include "ppanova/numeric.hpp"
#include "ppanova/statistic_value.hpp"

namespace ppanova {

namespace detail {

inline double group_mean(std::span<const double> values,
                         const std::vector<std::size_t>& members) {
  CompensatedSum s;
  for (std::size_t i : members) s.add(values[i]);
  return s.value() / static_cast<double>(members.size());
}

}  // namespace detail

/// Classic one-way ANOVA F on scalar data. Components carry TSS, MSS and
/// RSS with TSS = MSS + RSS.
inline StatisticValue one_way_f(std::span<const double> values,
                                const GroupLayout& layout) {
  layout.require_k_at_least(2);
  if (values.size() != layout.n()) {
    throw invalid_input("value count does not match layout");
  }
  const int k = layout.k();
  const double n = static_cast<double>(layout.n());

  CompensatedSum total;
  for (double v : values) total.add(v);
  const double grand_mean = total.value() / n;

  double tss = 0.0, rss = 0.0, mss = 0.0;
  {
    CompensatedSum t;
    for (double v : values) t.add((v - grand_mean) * (v - grand_mean));
    tss = t.value();
  }
  CompensatedSum r, m;
  for (int g = 0; g < k; ++g) {
    const auto& mem = layout.members(g);
    const double gm = detail::group_mean(values, mem);
    for (std::size_t i : mem) r.add((values[i] - gm) * (values[i] - gm));
    m.add(static_cast<double>(mem.size()) * (gm - grand_mean) * (gm - grand_mean));
  }
  rss = r.value();
  mss = m.value();

  StatisticValue s;
  s.name = "one_way_f";
  const double scale = (n - k) / (k - 1);
  s.components = {{"TSS", tss}, {"MSS", mss}, {"RSS", rss}, {"scale", scale}};
  detail::flag_ratio(s, mss, rss, scale);
  return s;
}

/// Levene's test: the one-way F applied to the absolute deviations from the
/// group means, z_ij = |x_ij - xbar_i|.
inline StatisticValue levene_f(std::span<const double> values,
                               const GroupLayout& layout) {
  layout.require_k_at_least(2);
  layout.require_group_sizes_at_least(2);
  if (values.size() != layout.n()) {
    throw invalid_input("value count does not match layout");
  }
  std::vector<double> z(values.size());
  for (int g = 0; g < layout.k(); ++g) {
    const auto& mem = layout.members(g);
    const double gm = detail::group_mean(values, mem);
    for (std::size_t i : mem) z[i] = std::abs(values[i] - gm);
  }
  StatisticValue s = one_way_f(z, layout);
  s.name = "levene_f";
  return s;
}

struct TwoWayAnovaResult {
  StatisticValue factor_a;     // Fa
  StatisticValue factor_b;     // Fb
  StatisticValue interaction;  // Fi
};

/// Balanced two-way ANOVA with interaction. TSS = SSa + SSb + SSi + RSS.
inline TwoWayAnovaResult two_way_f(std::span<const double> values,
                                   const TwoWayLayout& layout) {
  if (layout.cell_size() < 2) {
    throw invalid_input("two-way ANOVA needs at least 2 observations per cell");
  }
  if (values.size() != layout.n()) {
    throw invalid_input("value count does not match layout");
  }
  const int k1 = layout.k1();
  const int k2 = layout.k2();
  const double nn = static_cast<double>(layout.cell_size());
  const double n = static_cast<double>(layout.n());

  CompensatedSum total;
  for (double v : values) total.add(v);
  const double grand = total.value() / n;

  std::vector<double> cell_mean(static_cast<std::size_t>(k1) * k2);
  std::vector<double> row_mean(k1, 0.0), col_mean(k2, 0.0);
  double tss = 0.0, rss = 0.0;
  {
    CompensatedSum t, r;
    for (int i1 = 0; i1 < k1; ++i1) {
      for (int i2 = 0; i2 < k2; ++i2) {
        const auto& mem = layout.cell(i1, i2);
        const double cm = detail::group_mean(values, mem);
        cell_mean[static_cast<std::size_t>(i1) * k2 + i2] = cm;
        row_mean[i1] += cm / static_cast<double>(k2);
        col_mean[i2] += cm / static_cast<double>(k1);
        for (std::size_t i : mem) {
          t.add((values[i] - grand) * (values[i] - grand));
          r.add((values[i] - cm) * (values[i] - cm));
        }
      }
    }
    tss = t.value();
    rss = r.value();
  }

  double ssa = 0.0, ssb = 0.0, ssi = 0.0;
  for (int i1 = 0; i1 < k1; ++i1) {
    ssa += static_cast<double>(k2) * nn * (row_mean[i1] - grand) * (row_mean[i1] - grand);
  }
  for (int i2 = 0; i2 < k2; ++i2) {
    ssb += static_cast<double>(k1) * nn * (col_mean[i2] - grand) * (col_mean[i2] - grand);
  }
  for (int i1 = 0; i1 < k1; ++i1) {
    for (int i2 = 0; i2 < k2; ++i2) {
      const double di = cell_mean[static_cast<std::size_t>(i1) * k2 + i2] -
                        row_mean[i1] - col_mean[i2] + grand;
      ssi += nn * di * di;
    }
  }

  const double cells = static_cast<double>(k1 * k2);
  auto make = [&](const char* name, double ss, double df) {
    StatisticValue s;
    s.name = name;
    const double scale = (n - cells) / df;
    s.components = {{"TSS", tss}, {"RSS", rss}, {"SSa", ssa}, {"SSb", ssb},
                    {"SSi", ssi}, {"SS", ss},   {"scale", scale}};
    detail::flag_ratio(s, ss, rss, scale);
    return s;
  };

  TwoWayAnovaResult r;
  r.factor_a = make("two_way_f_factor_a", ssa, static_cast<double>(k1 - 1));
  r.factor_b = make("two_way_f_factor_b", ssb, static_cast<double>(k2 - 1));
  r.interaction = make("two_way_f_interaction", ssi,
                       static_cast<double>((k1 - 1) * (k2 - 1)));
  return r;
}

}  // namespace ppanova
