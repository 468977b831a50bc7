#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ppanova/layout.hpp"
#include "ppanova/numeric.hpp"
#include "ppanova/statistic_value.hpp"
#include "ppanova/tt_metric.hpp"

namespace ppanova {

/// Per-group half pairwise distances d_{i,{j1,j2}} = d(x_{ij1}, x_{ij2}) / 2,
/// the dispersion surrogates of the Levene-type statistics. Group i yields
/// exactly C(n_i, 2) values; between-group entries are never touched.
template <class Map = IdentityMap>
std::vector<std::vector<double>> half_distances(const DistanceMatrix& d,
                                                const GroupLayout& layout,
                                                Map map = {}) {
  std::vector<std::vector<double>> out(layout.k());
  for (int g = 0; g < layout.k(); ++g) {
    const auto& mem = layout.members(g);
    out[g].reserve(layout.pairs_in(g));
    for (std::size_t a = 0; a < mem.size(); ++a) {
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        out[g].push_back(0.5 * d.at(map(mem[a]), map(mem[b])));
      }
    }
  }
  return out;
}

namespace detail {

// (1/n) sum_{i<j} n_i n_j (u_i - u_j)^2, the size-weighted spread of group
// means used by all Levene-type numerators.
inline double weighted_mean_spread(const std::vector<double>& u,
                                   const std::vector<std::size_t>& sizes,
                                   double n) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const double diff = u[i] - u[j];
      s += static_cast<double>(sizes[i]) * static_cast<double>(sizes[j]) * diff * diff;
    }
  }
  return s / n;
}

}  // namespace detail

/// Location test from squared pairwise distances: TSS is the mean of all
/// pairwise squared distances, RSS collects the within-group ones scaled by
/// group size, and F_A = ((n-k)/(k-1)) * (TSS-RSS)/RSS.
template <class Map = IdentityMap>
StatisticValue anderson_f(const DistanceMatrix& d, const GroupLayout& layout,
                          Map map = {}) {
  layout.require_k_at_least(2);
  const std::size_t n = layout.n();
  const int k = layout.k();

  double all_pairs = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = d.at(map(a), map(b));
      all_pairs += v * v;
    }
  }
  double rss = 0.0;
  for (int g = 0; g < k; ++g) {
    const auto& mem = layout.members(g);
    double within = 0.0;
    for (std::size_t a = 0; a < mem.size(); ++a) {
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        const double v = d.at(map(mem[a]), map(mem[b]));
        within += v * v;
      }
    }
    rss += within / static_cast<double>(mem.size());
  }
  const double tss = all_pairs / static_cast<double>(n);
  const double mss = tss - rss;

  StatisticValue s;
  s.name = "anderson_f";
  s.components = {{"TSS", tss}, {"RSS", rss}, {"MSS", mss},
                  {"scale", static_cast<double>(n - k) / (k - 1)}};
  detail::flag_ratio(s, mss, rss, static_cast<double>(n - k) / (k - 1));
  return s;
}

/// Brown-Forsythe-corrected variant for heteroscedastic unbalanced designs:
/// same MSS, denominator sum_i (1 - n_i/n) / (n_i (n_i - 1)) * within_i.
template <class Map = IdentityMap>
StatisticValue anderson_bf(const DistanceMatrix& d, const GroupLayout& layout,
                           Map map = {}) {
  layout.require_k_at_least(2);
  layout.require_group_sizes_at_least(2);
  const std::size_t n = layout.n();
  const int k = layout.k();

  double all_pairs = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = d.at(map(a), map(b));
      all_pairs += v * v;
    }
  }
  double rss = 0.0;
  double denom = 0.0;
  for (int g = 0; g < k; ++g) {
    const auto& mem = layout.members(g);
    const double ni = static_cast<double>(mem.size());
    double within = 0.0;
    for (std::size_t a = 0; a < mem.size(); ++a) {
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        const double v = d.at(map(mem[a]), map(mem[b]));
        within += v * v;
      }
    }
    rss += within / ni;
    denom += (1.0 - ni / static_cast<double>(n)) / (ni * (ni - 1.0)) * within;
  }
  const double tss = all_pairs / static_cast<double>(n);
  const double mss = tss - rss;

  StatisticValue s;
  s.name = "anderson_bf";
  s.components = {{"TSS", tss}, {"RSS", rss}, {"MSS", mss}, {"denominator", denom},
                  {"scale", 1.0}};
  detail::flag_ratio(s, mss, denom, 1.0);
  return s;
}

/// Dispersion test from half pairwise within-group distances,
/// L = ((N-k)/(k-1)) * [(1/n) sum_{i<j} n_i n_j (dbar_i - dbar_j)^2]
///                   / [sum_i sum_j (d_ij - dbar_i)^2].
/// In the balanced case the numerator equals sum_i n_i (dbar_i - dbar)^2.
template <class Map = IdentityMap>
StatisticValue levene_l(const DistanceMatrix& d, const GroupLayout& layout,
                        Map map = {}) {
  layout.require_k_at_least(2);
  layout.require_group_sizes_at_least(2);
  const int k = layout.k();
  const auto hd = half_distances(d, layout, map);

  std::vector<double> group_means(k);
  std::vector<std::size_t> sizes(k);
  double denom = 0.0;
  for (int g = 0; g < k; ++g) {
    group_means[g] = pairwise_sum(hd[g]) / static_cast<double>(hd[g].size());
    sizes[g] = layout.group_size(g);
    std::vector<double> sq(hd[g].size());
    for (std::size_t j = 0; j < hd[g].size(); ++j) {
      const double dev = hd[g][j] - group_means[g];
      sq[j] = dev * dev;
    }
    denom += pairwise_sum(sq);
  }
  const double num = detail::weighted_mean_spread(group_means, sizes,
                                                  static_cast<double>(layout.n()));
  const double scale =
      static_cast<double>(layout.total_pairs() - k) / (k - 1);

  StatisticValue s;
  s.name = "levene_l";
  s.components = {{"numerator", num}, {"denominator", denom}, {"scale", scale}};
  detail::flag_ratio(s, num, denom, scale);
  return s;
}

/// Normalized dispersion statistic: the same numerator as levene_l over
/// 4 T_n, where T_n sums products of deviations over within-group triples
/// sharing one observation. (k-1) times this statistic is asymptotically
/// chi-squared with k-1 degrees of freedom. Also returns the plug-in
/// estimates of gamma^2 = Cov(d(X,Y), d(X,Z)) and sigma^2 = Var d(X,Y) on
/// the full-distance scale.
template <class Map = IdentityMap>
std::pair<StatisticValue, NullEstimates> levene_ltilde(
    const DistanceMatrix& d, const GroupLayout& layout, Map map = {}) {
  layout.require_k_at_least(2);
  layout.require_group_sizes_at_least(3);
  const int k = layout.k();

  std::vector<double> group_means(k);
  std::vector<std::size_t> sizes(k);
  double rss_half = 0.0;
  double t_n = 0.0;
  for (int g = 0; g < k; ++g) {
    const auto& mem = layout.members(g);
    const std::size_t m = mem.size();
    sizes[g] = m;
    std::vector<double> row_sums(m, 0.0);
    std::vector<double> sq;
    sq.reserve(m * (m - 1) / 2);
    double total = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        const double h = 0.5 * d.at(map(mem[a]), map(mem[b]));
        row_sums[a] += h;
        row_sums[b] += h;
        total += h;
        sq.push_back(h);
      }
    }
    const double mean = total / static_cast<double>(sq.size());
    group_means[g] = mean;
    for (double& v : sq) {
      const double dev = v - mean;
      v = dev * dev;
    }
    rss_half += pairwise_sum(sq);
    // sum over j2, j3 != j1 of (h_{j1 j2} - mean)(h_{j1 j3} - mean) is the
    // square of the deviation row sum.
    std::vector<double> row_sq(m);
    for (std::size_t a = 0; a < m; ++a) {
      const double dev_sum = row_sums[a] - static_cast<double>(m - 1) * mean;
      row_sq[a] = dev_sum * dev_sum;
    }
    t_n += pairwise_sum(row_sq);
  }

  const double num = detail::weighted_mean_spread(group_means, sizes,
                                                  static_cast<double>(layout.n()));
  const double nstar_k = static_cast<double>(layout.nstar() - k);
  const double scale = nstar_k / (k - 1);

  StatisticValue s;
  s.name = "levene_ltilde";
  s.components = {{"numerator", num}, {"T_n", t_n}, {"scale", scale}};

  NullEstimates est;
  est.gamma_sq_hat = 4.0 * t_n / nstar_k;
  est.sigma_sq_hat =
      4.0 * rss_half / static_cast<double>(layout.total_pairs() - k);
  est.gamma_negative = t_n < 0.0;

  if (t_n > 0.0) {
    s.value = scale * num / (4.0 * t_n);
    s.flag = StatFlag::Ok;
  } else if (t_n == 0.0 && num == 0.0) {
    s.value = 0.0;
    s.flag = StatFlag::Degenerate;
  } else {
    s.value = std::numeric_limits<double>::quiet_NaN();
    s.flag = StatFlag::Invalid;
  }
  return {s, est};
}

struct TwoWayLeveneResult {
  StatisticValue overall;      // L
  StatisticValue factor_a;     // La
  StatisticValue factor_b;     // Lb
  StatisticValue interaction;  // Li
};

/// Balanced two-way Levene family on within-cell half distances. Distances
/// between observations of different factor combinations are never used.
/// MSS decomposes exactly into SSa + SSb + SSi.
template <class Map = IdentityMap>
TwoWayLeveneResult two_way_levene(const DistanceMatrix& d,
                                  const TwoWayLayout& layout, Map map = {}) {
  if (layout.cell_size() < 2) {
    throw invalid_input("two-way Levene needs at least 2 observations per cell");
  }
  const int k1 = layout.k1();
  const int k2 = layout.k2();
  const double cell_pairs = static_cast<double>(layout.cell_pairs());
  const double n_obs_cell = static_cast<double>(layout.cell_size());

  std::vector<std::vector<double>> cell_values(
      static_cast<std::size_t>(k1) * k2);
  std::vector<double> cell_mean(cell_values.size(), 0.0);
  double rss = 0.0;
  CompensatedSum grand;
  for (int i1 = 0; i1 < k1; ++i1) {
    for (int i2 = 0; i2 < k2; ++i2) {
      auto& vals = cell_values[static_cast<std::size_t>(i1) * k2 + i2];
      const auto& mem = layout.cell(i1, i2);
      vals.reserve(layout.cell_pairs());
      for (std::size_t a = 0; a < mem.size(); ++a) {
        for (std::size_t b = a + 1; b < mem.size(); ++b) {
          vals.push_back(0.5 * d.at(map(mem[a]), map(mem[b])));
        }
      }
      const double m = pairwise_sum(vals) / cell_pairs;
      cell_mean[static_cast<std::size_t>(i1) * k2 + i2] = m;
      grand.add(m);
      std::vector<double> sq(vals.size());
      for (std::size_t j = 0; j < vals.size(); ++j) {
        const double dev = vals[j] - m;
        sq[j] = dev * dev;
      }
      rss += pairwise_sum(sq);
    }
  }
  const double overall_mean = grand.value() / static_cast<double>(k1 * k2);
  std::vector<double> row_mean(k1, 0.0), col_mean(k2, 0.0);
  for (int i1 = 0; i1 < k1; ++i1) {
    for (int i2 = 0; i2 < k2; ++i2) {
      row_mean[i1] += cell_mean[static_cast<std::size_t>(i1) * k2 + i2];
      col_mean[i2] += cell_mean[static_cast<std::size_t>(i1) * k2 + i2];
    }
  }
  for (double& v : row_mean) v /= static_cast<double>(k2);
  for (double& v : col_mean) v /= static_cast<double>(k1);

  double mss = 0.0, ssa = 0.0, ssb = 0.0, ssi = 0.0;
  for (int i1 = 0; i1 < k1; ++i1) {
    const double ra = row_mean[i1] - overall_mean;
    ssa += static_cast<double>(k2) * n_obs_cell * ra * ra;
  }
  for (int i2 = 0; i2 < k2; ++i2) {
    const double rb = col_mean[i2] - overall_mean;
    ssb += static_cast<double>(k1) * n_obs_cell * rb * rb;
  }
  for (int i1 = 0; i1 < k1; ++i1) {
    for (int i2 = 0; i2 < k2; ++i2) {
      const double cm = cell_mean[static_cast<std::size_t>(i1) * k2 + i2];
      const double dm = cm - overall_mean;
      mss += n_obs_cell * dm * dm;
      const double di = cm - row_mean[i1] - col_mean[i2] + overall_mean;
      ssi += n_obs_cell * di * di;
    }
  }

  const double cells = static_cast<double>(k1 * k2);
  const double n_half = cells * cell_pairs;

  auto make = [&](const char* name, double ss, double df) {
    StatisticValue s;
    s.name = name;
    const double scale = (n_half - cells) / df;
    s.components = {{"RSS", rss},   {"MSS", mss}, {"SSa", ssa}, {"SSb", ssb},
                    {"SSi", ssi},   {"SS", ss},   {"scale", scale}};
    detail::flag_ratio(s, ss, rss, scale);
    return s;
  };

  TwoWayLeveneResult r;
  r.overall = make("two_way_levene_overall", mss, cells - 1.0);
  r.factor_a = make("two_way_levene_factor_a", ssa, static_cast<double>(k1 - 1));
  r.factor_b = make("two_way_levene_factor_b", ssb, static_cast<double>(k2 - 1));
  r.interaction = make("two_way_levene_interaction", ssi,
                       static_cast<double>((k1 - 1) * (k2 - 1)));
  return r;
}

}  // namespace ppanova
