#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ppanova/assignment.hpp"
#include "ppanova/errors.hpp"
#include "ppanova/layout.hpp"
#include "ppanova/rng.hpp"
#include "ppanova/statistic_value.hpp"
#include "ppanova/tt_metric.hpp"

namespace ppanova {

struct BarycenterResult {
  PointPattern pattern;
  double objective = 0.0;  ///< sum over data patterns of squared TT distance
  int restarts_used = 0;
  bool converged = false;
  /// Objective after each accepted iteration of the winning restart;
  /// non-increasing by construction.
  std::vector<double> objective_trace;
};

namespace detail {

inline double squared_tt(double power_cost, double order) {
  if (order == 2.0) return power_cost;
  return std::pow(power_cost, 2.0 / order);
}

// One matching of a candidate barycenter against a data pattern: total
// p-power cost plus, per barycenter point, the data point it is matched to
// below the pair cutoff (or none).
struct Matching {
  double power_cost = 0.0;
  std::vector<int> partner;  // index into the data pattern, -1 if none
  std::vector<bool> data_covered;
};

inline Matching match_pattern(const std::vector<Point>& center,
                              const PointPattern& data,
                              const MetricParams& params) {
  Matching result;
  result.partner.assign(center.size(), -1);
  result.data_covered.assign(data.size(), false);
  const std::size_t q = center.size();
  const std::size_t m = data.size();
  if (q == 0 && m == 0) return result;

  PointPattern center_pattern{std::vector<Point>(center)};
  const CostMatrix cost = q >= m ? tt_cost_matrix(data, center_pattern, params)
                                 : tt_cost_matrix(center_pattern, data, params);
  const AssignmentResult assignment = solve_assignment(cost);
  result.power_cost = assignment.total_cost;

  const double cutoff = params.pair_cutoff();
  if (q >= m) {
    // rows = data (padded), cols = center
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = assignment.row_to_col[i];
      if (cost.tag(i, j) == CostTag::RealReal && cost.cost(i, j) < cutoff) {
        result.partner[j] = static_cast<int>(i);
        result.data_covered[i] = true;
      }
    }
  } else {
    // rows = center (padded), cols = data
    for (std::size_t i = 0; i < q; ++i) {
      const std::size_t j = assignment.row_to_col[i];
      if (cost.tag(i, j) == CostTag::RealReal && cost.cost(i, j) < cutoff) {
        result.partner[i] = static_cast<int>(j);
        result.data_covered[j] = true;
      }
    }
  }
  return result;
}

inline double frechet_objective(const std::vector<Point>& center,
                                const std::vector<PointPattern>& data,
                                const MetricParams& params) {
  PointPattern center_pattern{std::vector<Point>(center)};
  double total = 0.0;
  for (const PointPattern& pat : data) {
    const double cost = tt_power_cost(center_pattern, pat, params);
    total += squared_tt(cost, params.order);
  }
  return total;
}

struct AlternatingRun {
  std::vector<Point> center;
  double objective = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

// Alternating local search: match, move points to the centroid of their
// below-cutoff partners, drop points that are matched in fewer than half of
// the patterns, and when position updates stall try inserting one point at
// the medoid of the uncovered data points. Every update is accepted only if
// it does not increase the objective, so the trace is monotone for any
// order p.
inline AlternatingRun alternate(std::vector<Point> center,
                                const std::vector<PointPattern>& data,
                                const MetricParams& params, int max_iter) {
  constexpr double kImprovementTol = 1e-8;
  AlternatingRun run;
  double objective = frechet_objective(center, data, params);
  run.trace.push_back(objective);
  const std::size_t m = data.size();

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Matching> matchings;
    matchings.reserve(m);
    for (const PointPattern& pat : data) {
      matchings.push_back(match_pattern(center, pat, params));
    }

    // Position update: each center point moves to the Euclidean centroid of
    // the data points it is actively matched to.
    std::vector<Point> moved = center;
    std::vector<int> active(center.size(), 0);
    for (std::size_t c = 0; c < center.size(); ++c) {
      double sx = 0.0, sy = 0.0;
      int count = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const int partner = matchings[j].partner[c];
        if (partner >= 0) {
          sx += data[j][partner].x;
          sy += data[j][partner].y;
          ++count;
        }
      }
      active[c] = count;
      if (count > 0) moved[c] = {sx / count, sy / count};
    }

    bool changed = false;
    if (moved != center) {
      const double candidate = frechet_objective(moved, data, params);
      if (candidate <= objective) {
        center = std::move(moved);
        if (candidate < objective) changed = true;
        objective = candidate;
      }
    }

    // Deletion: drop the least-supported point if it is active in fewer
    // than half of the patterns and dropping does not hurt.
    if (!center.empty()) {
      std::size_t worst = 0;
      for (std::size_t c = 1; c < center.size(); ++c) {
        if (active[c] < active[worst]) worst = c;
      }
      if (2 * static_cast<std::size_t>(active[worst]) < m) {
        std::vector<Point> smaller = center;
        smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(worst));
        const double candidate = frechet_objective(smaller, data, params);
        if (candidate <= objective) {
          center = std::move(smaller);
          if (candidate < objective) changed = true;
          objective = candidate;
        }
      }
    }

    const double before = run.trace.back();
    run.trace.push_back(objective);
    if (changed && before - objective >= kImprovementTol) continue;

    // Stalled: try one insertion at the medoid of the uncovered data points.
    std::vector<Point> uncovered;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < data[j].size(); ++i) {
        if (!matchings[j].data_covered[i]) uncovered.push_back(data[j][i]);
      }
    }
    bool inserted = false;
    if (!uncovered.empty()) {
      std::size_t best = 0;
      double best_sum = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < uncovered.size(); ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < uncovered.size(); ++b) {
          s += squared_distance(uncovered[a], uncovered[b]);
        }
        if (s < best_sum) {
          best_sum = s;
          best = a;
        }
      }
      std::vector<Point> grown = center;
      grown.push_back(uncovered[best]);
      const double candidate = frechet_objective(grown, data, params);
      if (candidate < objective - 1e-12) {
        center = std::move(grown);
        objective = candidate;
        run.trace.push_back(objective);
        inserted = true;
      }
    }
    if (!inserted) {
      run.converged = true;
      break;
    }
  }

  run.center = std::move(center);
  run.objective = objective;
  return run;
}

}  // namespace detail

/// Local minimizer of the Frechet functional sum_j d_TT(y_j, z)^2 over
/// integer-cardinality patterns z, by an alternating heuristic with
/// restarts. Each restart starts from a uniformly chosen data pattern; the
/// lowest objective wins, ties broken by restart index. Deterministic for a
/// fixed seed.
inline BarycenterResult frechet_mean(const std::vector<PointPattern>& patterns,
                                     const MetricParams& params, int restarts,
                                     std::uint64_t seed, int max_iter = 100) {
  if (patterns.empty()) throw invalid_input("frechet_mean needs >= 1 pattern");
  if (restarts < 1) throw invalid_input("frechet_mean needs >= 1 restart");
  if (params.kind != MetricKind::TT) {
    throw invalid_input("frechet_mean is defined for the TT metric");
  }
  params.validate();

  BarycenterResult best;
  if (patterns.size() == 1) {
    best.pattern = patterns[0];
    best.objective = 0.0;
    best.restarts_used = 1;
    best.converged = true;
    best.objective_trace = {0.0};
    return best;
  }

  // Canonical pattern order: the result depends on the multiset of
  // patterns, not on how the caller happened to arrange them.
  std::vector<PointPattern> sorted = patterns;
  std::sort(sorted.begin(), sorted.end(), detail::pattern_less);

  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const std::size_t pick = rng.below(sorted.size());
    detail::AlternatingRun run = detail::alternate(
        sorted[pick].points(), sorted, params, max_iter);
    if (!have || run.objective < best.objective) {
      have = true;
      best.pattern = PointPattern(run.center);
      best.objective = run.objective;
      best.converged = run.converged;
      best.objective_trace = std::move(run.trace);
    }
  }
  best.restarts_used = restarts;
  return best;
}

struct FrechetGroupSummary {
  double variance = 0.0;        ///< V_i, mean squared distance to the group mean
  double sigma_sq = 0.0;        ///< variance of those squared distances
  double lambda = 0.0;          ///< n_i / n
  BarycenterResult barycenter;
};

struct FrechetStatistics {
  StatisticValue u_n;
  StatisticValue f_n;
  StatisticValue t_l;
  StatisticValue t_f;
  StatisticValue t;
  std::vector<FrechetGroupSummary> groups;
  double pooled_variance = 0.0;  ///< V_p against the pooled barycenter
};

/// The pooled barycenter does not depend on the group labels, so permutation
/// tests compute it once and pass it back in.
inline BarycenterResult pooled_barycenter(const std::vector<PointPattern>& all,
                                          const MetricParams& params,
                                          int restarts, std::uint64_t seed) {
  return frechet_mean(all, params, restarts, derive_seed(seed, 0x706f6f6cULL));
}

template <class Map = IdentityMap>
FrechetStatistics frechet_statistics_with_pooled(
    const std::vector<PointPattern>& all, const GroupLayout& layout,
    const MetricParams& params, int restarts, std::uint64_t seed,
    const BarycenterResult& pooled, Map map = {}) {
  layout.require_k_at_least(2);
  if (all.size() != layout.n()) {
    throw invalid_input("pattern count does not match layout");
  }
  const int k = layout.k();
  const double n = static_cast<double>(layout.n());

  FrechetStatistics out;
  out.groups.resize(k);

  double v_pooled = 0.0;
  for (const PointPattern& pat : all) {
    const double d = tt_distance(pat, pooled.pattern, params);
    v_pooled += d * d;
  }
  v_pooled /= n;
  out.pooled_variance = v_pooled;

  bool invalid = false;
  for (int g = 0; g < k; ++g) {
    const auto& mem = layout.members(g);
    std::vector<PointPattern> group;
    group.reserve(mem.size());
    for (std::size_t slot : mem) group.push_back(all[map(slot)]);
    FrechetGroupSummary& s = out.groups[g];
    s.barycenter = frechet_mean(group, params, restarts,
                                derive_seed(seed, 1 + static_cast<std::uint64_t>(g)));
    double v = 0.0, v4 = 0.0;
    for (const PointPattern& pat : group) {
      const double d2 = [&] {
        const double d = tt_distance(pat, s.barycenter.pattern, params);
        return d * d;
      }();
      v += d2;
      v4 += d2 * d2;
    }
    const double ni = static_cast<double>(mem.size());
    s.variance = v / ni;
    s.sigma_sq = v4 / ni - s.variance * s.variance;
    s.lambda = ni / n;
    if (!(s.sigma_sq > 0.0)) invalid = true;
  }

  double u_n = 0.0;
  double f_n = v_pooled;
  double sum_lambda_over_sigma = 0.0;
  double sum_lambda_sq_sigma = 0.0;
  for (int g = 0; g < k; ++g) {
    const auto& sg = out.groups[g];
    f_n -= sg.lambda * sg.variance;
    if (sg.sigma_sq > 0.0) {
      sum_lambda_over_sigma += sg.lambda / sg.sigma_sq;
      sum_lambda_sq_sigma += sg.lambda * sg.lambda * sg.sigma_sq;
      for (int h = g + 1; h < k; ++h) {
        const auto& sh = out.groups[h];
        if (sh.sigma_sq > 0.0) {
          const double diff = sg.variance - sh.variance;
          u_n += sg.lambda * sh.lambda / (sg.sigma_sq * sh.sigma_sq) * diff * diff;
        }
      }
    }
  }

  auto fill = [&](StatisticValue& s, const char* name, double value) {
    s.name = name;
    s.components = {{"U_n", u_n},
                    {"F_n", f_n},
                    {"V_p", v_pooled},
                    {"n", n},
                    {"sum_lambda_over_sigma", sum_lambda_over_sigma},
                    {"sum_lambda_sq_sigma", sum_lambda_sq_sigma}};
    if (invalid) {
      s.flag = StatFlag::Invalid;
      s.value = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.flag = StatFlag::Ok;
      s.value = value;
    }
  };

  const double t_l = invalid ? 0.0 : n * u_n / sum_lambda_over_sigma;
  const double t_f = invalid ? 0.0 : n * f_n * f_n / sum_lambda_sq_sigma;
  fill(out.u_n, "frechet_un", u_n);
  fill(out.f_n, "frechet_fn", f_n);
  fill(out.t_l, "frechet_tl", t_l);
  fill(out.t_f, "frechet_tf", t_f);
  fill(out.t, "frechet_t", t_l + t_f);
  return out;
}

/// Frechet group statistics: U_n and F_n compare group Frechet variances and
/// means-of-squares, T_L and T_F are their studentized versions, T is the
/// sum. Flagged invalid if any within-group variance of squared distances
/// vanishes.
inline FrechetStatistics frechet_statistics(
    const std::vector<std::vector<PointPattern>>& groups,
    const MetricParams& params, int restarts, std::uint64_t seed) {
  std::vector<PointPattern> all;
  std::vector<int> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const PointPattern& p : groups[g]) {
      all.push_back(p);
      labels.push_back(static_cast<int>(g));
    }
  }
  if (all.empty()) throw invalid_input("frechet_statistics needs observations");
  GroupLayout layout(labels);
  const BarycenterResult pooled = pooled_barycenter(all, params, restarts, seed);
  return frechet_statistics_with_pooled(all, layout, params, restarts, seed,
                                        pooled);
}

}  // namespace ppanova
