// Acceptance suite: one numbered check per release criterion, each printing
// a single PASS/FAIL line with its measurements. Run everything or a single
// criterion with --criterion N. Exit code 0 iff every executed criterion
// passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "ppanova/chi2.hpp"
#include "ppanova/classic_anova.hpp"
#include "ppanova/dist_stats.hpp"
#include "ppanova/frechet.hpp"
#include "ppanova/numeric.hpp"
#include "ppanova/parallel.hpp"
#include "ppanova/permutation.hpp"
#include "ppanova/rng.hpp"
#include "ppanova/simulate.hpp"
#include "ppanova/study.hpp"
#include "ppanova/tt_metric.hpp"

using namespace ppanova;

namespace {

unsigned g_threads = 0;

unsigned threads() { return g_threads == 0 ? default_threads() : g_threads; }

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED: " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

PointPattern random_pattern(Rng& rng, std::size_t max_points) {
  PointPattern p;
  const std::size_t n = rng.below(max_points + 1);
  for (std::size_t i = 0; i < n; ++i) p.add({rng.uniform(), rng.uniform()});
  return p;
}

const MetricParams kTT{0.25, 2.0, MetricKind::TT};
const MetricParams kRTT{0.25, 2.0, MetricKind::RTT};

// 1. Assignment-based TT distance equals direct minimization.
Check criterion1() {
  Check c;
  Rng rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    PointPattern a, b;
    const std::size_t m = rng.below(5);
    const std::size_t n = rng.below(5);
    for (std::size_t i = 0; i < m; ++i) a.add({rng.uniform(), rng.uniform()});
    for (std::size_t i = 0; i < n; ++i) b.add({rng.uniform(), rng.uniform()});
    const double fast = tt_distance(a, b, kTT);
    const double slow = oracles::tt_bruteforce(a, b, kTT);
    worst = std::max(worst, std::abs(fast - slow));
  }
  c.require(worst <= 1e-10, "max |assignment - bruteforce| = " + fmt(worst));
  c.note("max deviation " + fmt(worst) + " over 500 pairs");
  return c;
}

// 2. Metric axioms for TT and RTT on random triples.
Check criterion2() {
  Check c;
  Rng rng(102);
  double worst_triangle = -1e9;
  for (int rep = 0; rep < 1000; ++rep) {
    const PointPattern a = random_pattern(rng, 15);
    const PointPattern b = random_pattern(rng, 15);
    const PointPattern ccc = random_pattern(rng, 15);
    for (const MetricParams& mp : {kTT, kRTT}) {
      auto dist = [&](const PointPattern& u, const PointPattern& v) {
        return mp.kind == MetricKind::TT ? tt_distance(u, v, mp)
                                         : rtt_distance(u, v, mp);
      };
      if (dist(a, a) != 0.0) c.require(false, "identity violated");
      const double ab = dist(a, b);
      if (ab != dist(b, a)) c.require(false, "symmetry violated");
      const double slack = ab - dist(a, ccc) - dist(ccc, b);
      worst_triangle = std::max(worst_triangle, slack);
      if (slack > 1e-9) c.require(false, "triangle violated by " + fmt(slack));
    }
  }
  c.note("worst triangle slack " + fmt(worst_triangle));
  return c;
}

// 3. Table-style spot check of the mean pairwise TT distance. The stated
// band [0.50, 0.53] matches the source table, which reports the mean on the
// half-distance scale; the literal mean of d_TT is about twice that, so this
// criterion documents the discrepancy rather than hiding it.
Check criterion3() {
  Check c;
  Rng rng(103);
  std::vector<PointPattern> pats;
  for (int i = 0; i < 200; ++i) pats.push_back(sample_csr(35.0, Window{}, rng));
  const DistanceMatrix d = distance_matrix(pats, kTT, threads());
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < pats.size(); ++i) {
    for (std::size_t j = i + 1; j < pats.size(); ++j) {
      sum += d.at(i, j);
      count += 1.0;
    }
  }
  const double mean = sum / count;
  c.note("mean d_TT = " + fmt(mean) + ", half-scale mean = " + fmt(mean / 2.0));
  c.require(mean >= 0.50 && mean <= 0.53,
            "mean d_TT " + fmt(mean) + " outside [0.50, 0.53]");
  return c;
}

// 4. Euclidean reductions and the quadratic-form identities.
Check criterion4() {
  Check c;
  Rng rng(104);
  double worst_a = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(3));
    std::vector<double> x;
    std::vector<int> labels;
    for (int g = 0; g < k; ++g) {
      const std::size_t m = 2 + rng.below(6);
      for (std::size_t i = 0; i < m; ++i) {
        x.push_back(rng.normal(0.3 * g, 1.0 + 0.2 * g));
        labels.push_back(g);
      }
    }
    const GroupLayout layout(labels);
    const DistanceMatrix d = oracles::scalar_distance_matrix(x);
    const double fa = anderson_f(d, layout).value;
    const double f = one_way_f(x, layout).value;
    worst_a = std::max(worst_a, std::abs(fa - f));
  }
  c.require(worst_a <= 1e-10, "anderson vs classic F deviation " + fmt(worst_a));

  double worst_b = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const std::size_t per = 3 + rng.below(5);
    std::vector<int> labels;
    for (int g = 0; g < k; ++g) labels.insert(labels.end(), per, g);
    const GroupLayout layout(labels);
    DistanceMatrix d(layout.n(), kTT);
    for (std::size_t i = 0; i < layout.n(); ++i) {
      for (std::size_t j = i + 1; j < layout.n(); ++j) {
        d.set(i, j, rng.uniform(0.05, 1.0));
      }
    }
    const double general = levene_l(d, layout).value;
    const double balanced = oracles::levene_balanced_form(d, layout);
    worst_b = std::max(worst_b, std::abs(general - balanced) /
                                    std::max(1.0, std::abs(balanced)));
  }
  c.require(worst_b <= 1e-12, "balanced-form deviation " + fmt(worst_b));

  double worst_c = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(5));
    std::vector<double> u(k);
    std::vector<double> sizes(k);
    double n = 0.0;
    for (int g = 0; g < k; ++g) {
      u[g] = rng.normal(0.0, 2.0);
      sizes[g] = 1.0 + static_cast<double>(rng.below(9));
      n += sizes[g];
    }
    double lhs = 0.0, weighted = 0.0;
    for (int g = 0; g < k; ++g) {
      lhs += sizes[g] * u[g] * u[g];
      weighted += sizes[g] * u[g];
    }
    lhs -= weighted * weighted / n;
    double rhs = 0.0;
    for (int g = 0; g < k; ++g) {
      for (int h = g + 1; h < k; ++h) {
        rhs += sizes[g] * sizes[h] * (u[g] - u[h]) * (u[g] - u[h]);
      }
    }
    rhs /= n;
    worst_c = std::max(worst_c, std::abs(lhs - rhs));

    // balanced special case with the unweighted mean
    const double nn = sizes[0];
    double lhs_bal = 0.0, mean = 0.0;
    for (int g = 0; g < k; ++g) mean += u[g];
    mean /= k;
    for (int g = 0; g < k; ++g) {
      for (int h = g + 1; h < k; ++h) {
        lhs_bal += nn * nn * (u[g] - u[h]) * (u[g] - u[h]);
      }
    }
    lhs_bal /= nn * k;
    double rhs_bal = 0.0;
    for (int g = 0; g < k; ++g) rhs_bal += nn * (u[g] - mean) * (u[g] - mean);
    worst_c = std::max(worst_c, std::abs(lhs_bal - rhs_bal));
  }
  c.require(worst_c <= 1e-9, "quadratic identity deviation " + fmt(worst_c));
  c.note("deviations: reduction " + fmt(worst_a) + ", balanced form " +
         fmt(worst_b) + ", identities " + fmt(worst_c));
  return c;
}

// 5. Null distribution of the normalized Levene statistic.
Check criterion5() {
  Check c;
  QqConfig cfg;
  cfg.model = parse_model_spec("csr");
  cfg.n_per_group = 50;
  cfg.replicates = 500;
  cfg.statistic = "levene_ltilde";
  cfg.metric = kTT;
  cfg.seed = 105;
  cfg.threads = threads();
  const QqResult csr = run_qq(cfg);
  c.note("CSR n=50 KS = " + fmt(csr.ks) + " (" + std::to_string(csr.invalid) +
         " invalid)");
  c.require(csr.ks < 0.08, "CSR KS " + fmt(csr.ks) + " >= 0.08");

  QqConfig hard = cfg;
  hard.model = parse_model_spec("strauss:gamma=0");
  hard.n_per_group = 20;
  hard.seed = 106;
  const QqResult strauss = run_qq(hard);
  c.note("hard-core n=20 KS = " + fmt(strauss.ks));
  c.require(strauss.ks < 0.10, "hard-core KS " + fmt(strauss.ks) + " >= 0.10");
  return c;
}

// 6. Honest p-values under the null.
Check criterion6() {
  Check c;
  StudyConfig cfg;
  cfg.group_a = parse_model_spec("csr");
  cfg.group_b = parse_model_spec("csr");
  cfg.n_per_group = 10;
  cfg.replicates = 400;
  cfg.permutations = 99;
  cfg.alpha = 0.05;
  cfg.metric = kTT;
  cfg.seed = 107;
  cfg.threads = threads();
  cfg.statistics = {"anderson", "levene_l", "levene_ltilde"};
  const StudyResult r = run_study(cfg);
  const double bound = 0.074;
  for (std::size_t j = 0; j < r.statistics.size(); ++j) {
    const double frac = r.rejections[j] / 400.0;
    c.note(r.statistics[j] + " " + fmt(frac));
    c.require(frac <= bound,
              r.statistics[j] + " rejection fraction " + fmt(frac) + " > 0.074");
  }
  return c;
}

// 7. Power against interaction differences at reduced scale.
Check criterion7() {
  Check c;
  StudyConfig cfg;
  cfg.n_per_group = 20;
  cfg.replicates = 100;
  cfg.permutations = 199;
  cfg.alpha = 0.05;
  cfg.metric = kTT;
  cfg.threads = threads();
  cfg.statistics = {"anderson", "levene_l"};

  cfg.group_a = parse_model_spec("strauss:gamma=1");
  cfg.group_b = parse_model_spec("strauss:gamma=0");
  cfg.seed = 108;
  const StudyResult hard = run_study(cfg);
  c.note("gamma 1 vs 0: anderson " + std::to_string(hard.rejections[0]) +
         ", levene " + std::to_string(hard.rejections[1]));
  c.require(hard.rejections[1] >= 95,
            "levene_l power vs hard core " + std::to_string(hard.rejections[1]));
  c.require(hard.rejections[0] >= 85,
            "anderson power vs hard core " + std::to_string(hard.rejections[0]));

  cfg.group_b = parse_model_spec("strauss:gamma=0.8");
  cfg.seed = 109;
  cfg.statistics = {"levene_l"};
  const StudyResult soft = run_study(cfg);
  c.note("gamma 1 vs 0.8: levene " + std::to_string(soft.rejections[0]));
  c.require(soft.rejections[0] >= 10 && soft.rejections[0] <= 35,
            "levene_l vs gamma 0.8 outside [10, 35]: " +
                std::to_string(soft.rejections[0]));

  cfg.group_b = parse_model_spec("strauss:gamma=1");
  cfg.seed = 110;
  cfg.statistics = {"anderson"};
  const StudyResult null_case = run_study(cfg);
  c.note("gamma 1 vs 1: anderson " + std::to_string(null_case.rejections[0]));
  c.require(null_case.rejections[0] <= 12,
            "anderson null rejections " + std::to_string(null_case.rejections[0]));
  return c;
}

// 8. Power against inhomogeneity and size under the null.
Check criterion8() {
  Check c;
  StudyConfig cfg;
  cfg.n_per_group = 20;
  cfg.replicates = 100;
  cfg.permutations = 999;
  cfg.alpha = 0.05;
  cfg.metric = kTT;
  cfg.threads = threads();

  cfg.group_a = parse_model_spec("scenario1");
  cfg.group_b = parse_model_spec("csr");
  cfg.seed = 111;
  cfg.statistics = {"anderson", "levene_l"};
  const StudyResult power = run_study(cfg);
  c.note("scenario1 vs csr: anderson " + std::to_string(power.rejections[0]) +
         ", levene " + std::to_string(power.rejections[1]));
  c.require(power.rejections[0] >= 95,
            "anderson power " + std::to_string(power.rejections[0]) + " < 95");
  c.require(power.rejections[1] >= 80,
            "levene_l power " + std::to_string(power.rejections[1]) + " < 80");

  cfg.group_a = parse_model_spec("csr");
  cfg.seed = 112;
  cfg.statistics = {"anderson", "anderson_bf", "levene_l", "levene_ltilde"};
  const StudyResult null_case = run_study(cfg);
  for (std::size_t j = 0; j < null_case.statistics.size(); ++j) {
    c.note(null_case.statistics[j] + " null " +
           std::to_string(null_case.rejections[j]));
    c.require(null_case.rejections[j] <= 12,
              null_case.statistics[j] + " null rejections " +
                  std::to_string(null_case.rejections[j]) + " > 12");
  }
  return c;
}

// 9. Barycenter heuristic checks.
Check criterion9() {
  Check c;
  Rng rng(113);

  for (int rep = 0; rep < 8; ++rep) {
    std::vector<PointPattern> pats;
    for (int i = 0; i < 6; ++i) pats.push_back(sample_csr(8.0, Window{}, rng));
    const std::uint64_t seed = 1000 + rep;
    const BarycenterResult one = frechet_mean(pats, kTT, 1, seed);
    const BarycenterResult five = frechet_mean(pats, kTT, 5, seed);
    c.require(five.objective <= one.objective + 1e-12, "restart dominance");
    for (std::size_t i = 1; i < five.objective_trace.size(); ++i) {
      c.require(five.objective_trace[i] <= five.objective_trace[i - 1] + 1e-12,
                "objective trace not monotone");
    }
  }

  const MetricParams wide{100.0, 2.0, MetricKind::TT};
  double worst_centroid = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<PointPattern> singles;
    double cx = 0.0, cy = 0.0;
    const int m = 5 + static_cast<int>(rng.below(5));
    for (int i = 0; i < m; ++i) {
      PointPattern p;
      const Point q{rng.uniform(), rng.uniform()};
      p.add(q);
      singles.push_back(p);
      cx += q.x;
      cy += q.y;
    }
    cx /= m;
    cy /= m;
    const BarycenterResult r = frechet_mean(singles, wide, 3, 2000 + rep);
    c.require(r.pattern.size() == 1, "singleton barycenter cardinality");
    if (r.pattern.size() == 1) {
      worst_centroid = std::max(
          worst_centroid, std::abs(r.pattern[0].x - cx) + std::abs(r.pattern[0].y - cy));
    }
  }
  c.require(worst_centroid <= 1e-8, "centroid deviation " + fmt(worst_centroid));

  double worst_fn = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<PointPattern> g1, g2;
    std::vector<double> values;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      const double x = rng.uniform(0.0, 1.0);
      PointPattern p;
      p.add({x, 0.0});
      g1.push_back(p);
      values.push_back(x);
      labels.push_back(0);
    }
    for (int i = 0; i < 8; ++i) {
      const double x = rng.uniform(0.2, 1.8);
      PointPattern p;
      p.add({x, 0.0});
      g2.push_back(p);
      values.push_back(x);
      labels.push_back(1);
    }
    const FrechetStatistics st =
        frechet_statistics({g1, g2}, wide, 3, 3000 + rep);
    const StatisticValue f = one_way_f(values, GroupLayout(labels));
    const double expected =
        (f.components.at("TSS") - f.components.at("RSS")) / 14.0;
    worst_fn = std::max(worst_fn, std::abs(st.f_n.value - expected));
    c.require(st.f_n.value >= -1e-8, "F_n negative: " + fmt(st.f_n.value));
  }
  c.require(worst_fn <= 1e-8, "F_n reduction deviation " + fmt(worst_fn));
  c.note("centroid dev " + fmt(worst_centroid) + ", F_n dev " + fmt(worst_fn));
  return c;
}

// 10. Strauss activity calibration.
Check criterion10() {
  Check c;
  for (const double gamma : {0.0, 0.5, 1.0}) {
    Rng rng(114 + static_cast<int>(10 * gamma));
    const CalibrationResult cal =
        calibrate_strauss_beta(gamma, 0.1, 35.0, rng, Window{}, threads());
    if (gamma == 1.0) {
      c.require(std::abs(cal.beta - 35.0) <= 0.02 * 35.0,
                "gamma=1 beta " + fmt(cal.beta) + " not within 2% of 35");
    }
    if (gamma == 0.0) {
      c.require(cal.beta > 35.0, "gamma=0 beta should exceed 35");
    }
    const StraussModel model{cal.beta, gamma, 0.1};
    std::vector<double> counts(5000);
    parallel_for(5000, threads(), [&](std::int64_t i) {
      Rng chain(derive_seed(555 + static_cast<std::uint64_t>(100 * gamma), i));
      counts[i] = static_cast<double>(
          sample_strauss(model, Window{}, kStraussDefaultProposals, chain).size());
    });
    double mean = 0.0;
    for (double v : counts) mean += v;
    mean /= 5000.0;
    c.note("gamma " + fmt(gamma) + ": beta " + fmt(cal.beta) + ", validation mean " +
           fmt(mean));
    c.require(std::abs(mean - 35.0) <= 1.0,
              "validation mean " + fmt(mean) + " outside 35 +- 1");
  }
  return c;
}

// 11. Chi-squared tail function.
Check criterion11() {
  Check c;
  double worst = 0.0;
  for (double x = 0.0; x <= 50.0; x += 0.5) {
    worst = std::max(worst, std::abs(chi2_pvalue(x, 2) - std::exp(-x / 2.0)));
  }
  c.require(worst <= 1e-12, "df=2 closed form deviation " + fmt(worst));
  const double p = chi2_pvalue(3.841, 1);
  c.require(std::abs(p - 0.05) <= 5e-4, "df=1 at 3.841 gives " + fmt(p));
  c.note("df=2 deviation " + fmt(worst) + ", chi2_1(3.841) tail " + fmt(p));
  return c;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      g_threads = static_cast<unsigned>(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--threads T]\n");
      return 1;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "tt-distance-oracle-equivalence", criterion1},
      {2, "metric-axioms", criterion2},
      {3, "mean-pairwise-distance-spot-check", criterion3},
      {4, "euclidean-reductions-and-identities", criterion4},
      {5, "null-distribution-of-normalized-levene", criterion5},
      {6, "honest-p-values", criterion6},
      {7, "interaction-power", criterion7},
      {8, "inhomogeneity-power", criterion8},
      {9, "barycenter-heuristic", criterion9},
      {10, "strauss-calibration", criterion10},
      {11, "chi-squared-tail", criterion11},
  };

  bool all_pass = true;
  for (const auto& crit : criteria) {
    if (only != 0 && crit.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    const Check result = crit.run();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s  %2d  %s (%.1fs)%s%s\n", result.pass ? "PASS" : "FAIL",
                crit.id, crit.name, secs, result.detail.empty() ? "" : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 1;
}
