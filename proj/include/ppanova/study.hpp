#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppanova/chi2.hpp"
#include "ppanova/dist_stats.hpp"
#include "ppanova/errors.hpp"
#include "ppanova/frechet.hpp"
#include "ppanova/numeric.hpp"
#include "ppanova/parallel.hpp"
#include "ppanova/permutation.hpp"
#include "ppanova/rng.hpp"
#include "ppanova/simulate.hpp"
#include "ppanova/tt_metric.hpp"

namespace ppanova {

enum class ModelFamily { Csr, GaussianMixture, ExponentialTilt, Strauss };

/// A named point-process law. Strauss models may leave the activity open
/// (resolved by calibration against the target intensity).
struct ModelSpec {
  ModelFamily family = ModelFamily::Csr;
  std::string name = "csr";
  double lambda = 35.0;  // CSR intensity, or Strauss target intensity
  GaussianMixtureModel mixture;
  ExponentialTiltModel tilt;
  StraussModel strauss;
  bool strauss_beta_set = false;
  long strauss_proposals = kStraussDefaultProposals;
};

namespace study_detail {

inline std::vector<Point> scenario_means(int count) {
  std::vector<Point> means{{0.3, 0.3}, {0.7, 0.5}, {0.4, 0.8}};
  if (count == 4) means.push_back({0.75, 0.15});
  return means;
}

inline std::map<std::string, double> parse_kv(const std::string& text,
                                              const std::string& context) {
  std::map<std::string, double> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string item = text.substr(pos, next - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw invalid_input("bad model parameter '" + item + "' in " + context);
    }
    try {
      kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw invalid_input("bad model parameter value in " + context);
    }
    pos = next + 1;
  }
  return kv;
}

}  // namespace study_detail

/// Parses a model from a compact spec string:
///   "csr" | "csr:lambda=35"
///   "scenario0" .. "scenario6"   (the simulation-study intensities)
///   "mixture:sd=0.1,mass=35"     (means of scenario 1-3)
///   "exptilt:rate=1,mass=35"
///   "strauss:gamma=0.5[,R=0.1][,lambda=35][,beta=...]"
inline ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  spec.name = text;
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto kv = study_detail::parse_kv(rest, text);
  auto get = [&](const char* key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };

  if (head == "csr" || head == "scenario0") {
    spec.family = ModelFamily::Csr;
    spec.lambda = get("lambda", 35.0);
  } else if (head == "scenario1" || head == "scenario2" || head == "scenario3") {
    spec.family = ModelFamily::GaussianMixture;
    spec.mixture.means = study_detail::scenario_means(head == "scenario3" ? 4 : 3);
    spec.mixture.sd = head == "scenario1" ? 0.075 : 0.1;
    spec.mixture.total_mass = get("mass", 35.0);
  } else if (head == "scenario4" || head == "scenario5" || head == "scenario6") {
    spec.family = ModelFamily::ExponentialTilt;
    spec.tilt.rate = head == "scenario4" ? 2.0 : (head == "scenario5" ? 1.0 : 0.02);
    spec.tilt.total_mass = get("mass", 35.0);
  } else if (head == "mixture") {
    spec.family = ModelFamily::GaussianMixture;
    spec.mixture.means = study_detail::scenario_means(
        static_cast<int>(get("means", 3.0)));
    spec.mixture.sd = get("sd", 0.1);
    spec.mixture.total_mass = get("mass", 35.0);
  } else if (head == "exptilt") {
    spec.family = ModelFamily::ExponentialTilt;
    spec.tilt.rate = get("rate", 1.0);
    spec.tilt.total_mass = get("mass", 35.0);
  } else if (head == "strauss") {
    spec.family = ModelFamily::Strauss;
    spec.strauss.gamma = get("gamma", 1.0);
    spec.strauss.range = get("R", 0.1);
    spec.lambda = get("lambda", 35.0);
    if (kv.count("beta")) {
      spec.strauss.beta = kv.at("beta");
      spec.strauss_beta_set = true;
    } else {
      spec.strauss.beta = spec.lambda;
    }
    if (kv.count("proposals")) {
      spec.strauss_proposals = static_cast<long>(kv.at("proposals"));
    }
  } else {
    throw invalid_input("unknown model '" + text + "'");
  }
  return spec;
}

/// Calibrates the Strauss activity when needed; other families pass through.
inline ModelSpec resolve_model(const ModelSpec& spec, const Window& window,
                               std::uint64_t seed, unsigned threads) {
  if (spec.family != ModelFamily::Strauss || spec.strauss_beta_set) return spec;
  ModelSpec out = spec;
  Rng rng(derive_seed(seed, 0xCA11B1A7Eull));
  const CalibrationResult cal = calibrate_strauss_beta(
      spec.strauss.gamma, spec.strauss.range, spec.lambda, rng, window, threads,
      2000, spec.strauss_proposals);
  out.strauss.beta = cal.beta;
  out.strauss_beta_set = true;
  return out;
}

inline PointPattern sample_model(const ModelSpec& spec, const Window& window,
                                 Rng& rng) {
  switch (spec.family) {
    case ModelFamily::Csr:
      return sample_csr(spec.lambda, window, rng);
    case ModelFamily::GaussianMixture:
      return sample_gaussian_mixture(spec.mixture, rng);
    case ModelFamily::ExponentialTilt:
      return sample_exponential_tilt(spec.tilt, window, rng);
    case ModelFamily::Strauss:
      return sample_strauss(spec.strauss, window, spec.strauss_proposals, rng);
  }
  throw invalid_input("unknown model family");
}

inline bool is_frechet_statistic(const std::string& name) {
  return name == "frechet_tf" || name == "frechet_tl" || name == "frechet_t";
}

inline bool is_distance_statistic(const std::string& name) {
  return name == "anderson" || name == "anderson_bf" || name == "levene_l" ||
         name == "levene_ltilde";
}

/// Builds the joint distance-statistic evaluator used by permutation tests.
inline MultiStatFn make_distance_evaluator(const DistanceMatrix& d,
                                           const GroupLayout& layout,
                                           std::vector<std::string> names) {
  return [&d, &layout, names = std::move(names)](
             const std::vector<std::size_t>& perm, std::uint64_t) {
    auto map = [&perm](std::size_t s) { return perm[s]; };
    std::vector<StatisticValue> out;
    out.reserve(names.size());
    for (const auto& name : names) {
      if (name == "anderson") {
        out.push_back(anderson_f(d, layout, map));
      } else if (name == "anderson_bf") {
        out.push_back(anderson_bf(d, layout, map));
      } else if (name == "levene_l") {
        out.push_back(levene_l(d, layout, map));
      } else if (name == "levene_ltilde") {
        out.push_back(levene_ltilde(d, layout, map).first);
      } else {
        throw invalid_input("unknown distance statistic '" + name + "'");
      }
    }
    return out;
  };
}

inline MultiStatFn make_frechet_evaluator(const std::vector<PointPattern>& all,
                                          const GroupLayout& layout,
                                          const MetricParams& metric,
                                          int restarts,
                                          const BarycenterResult& pooled,
                                          std::vector<std::string> names) {
  return [&all, &layout, metric, restarts, &pooled, names = std::move(names)](
             const std::vector<std::size_t>& perm, std::uint64_t rseed) {
    auto map = [&perm](std::size_t s) { return perm[s]; };
    const FrechetStatistics st = frechet_statistics_with_pooled(
        all, layout, metric, restarts, rseed, pooled, map);
    std::vector<StatisticValue> out;
    out.reserve(names.size());
    for (const auto& name : names) {
      if (name == "frechet_tf") {
        out.push_back(st.t_f);
      } else if (name == "frechet_tl") {
        out.push_back(st.t_l);
      } else if (name == "frechet_t") {
        out.push_back(st.t);
      } else {
        throw invalid_input("unknown Frechet statistic '" + name + "'");
      }
    }
    return out;
  };
}

struct StudyConfig {
  ModelSpec group_a;
  ModelSpec group_b;
  std::size_t n_per_group = 20;
  int replicates = 100;
  int permutations = 999;          ///< M for distance statistics
  int frechet_permutations = 99;   ///< M when barycenters are recomputed
  double alpha = 0.05;
  MetricParams metric{};
  bool adaptive_cutoff = false;
  int restarts = 5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Window window{};
  std::vector<std::string> statistics{"anderson", "levene_l"};
};

struct StudyResult {
  std::vector<std::string> statistics;
  std::vector<int> rejections;               // per statistic
  std::vector<std::vector<double>> p_values; // [statistic][replicate]
  int replicates = 0;
  double cutoff_used = 0.0;  // mean over replicates when adaptive
};

/// Simulation study: `replicates` data sets of two groups, one permutation
/// test per statistic each, rejection counted at p <= alpha. Replicates run
/// in parallel on their own seed streams; output order is by replicate
/// index.
inline StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) {
    throw invalid_input("alpha must be in (0, 1)");
  }
  const ModelSpec a =
      resolve_model(cfg.group_a, cfg.window, derive_seed(cfg.seed, 101), cfg.threads);
  const ModelSpec b =
      resolve_model(cfg.group_b, cfg.window, derive_seed(cfg.seed, 202), cfg.threads);

  std::vector<std::string> dist_names, frechet_names;
  for (const auto& s : cfg.statistics) {
    if (is_distance_statistic(s)) {
      dist_names.push_back(s);
    } else if (is_frechet_statistic(s)) {
      frechet_names.push_back(s);
    } else {
      throw invalid_input("unknown study statistic '" + s + "'");
    }
  }

  const std::size_t nn = cfg.n_per_group;
  const std::size_t n_obs = 2 * nn;
  std::vector<int> labels(n_obs, 0);
  for (std::size_t i = nn; i < n_obs; ++i) labels[i] = 1;
  const GroupLayout layout(labels);

  struct ReplicateOut {
    std::vector<double> p;  // ordered as dist_names then frechet_names
    double cutoff = 0.0;
  };
  std::vector<ReplicateOut> reps(cfg.replicates);

  parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, 1000 + rep);
    Rng rng(derive_seed(rep_seed, 0));
    std::vector<PointPattern> pats;
    pats.reserve(n_obs);
    for (std::size_t i = 0; i < nn; ++i) pats.push_back(sample_model(a, cfg.window, rng));
    for (std::size_t i = 0; i < nn; ++i) pats.push_back(sample_model(b, cfg.window, rng));

    MetricParams metric = cfg.metric;
    if (cfg.adaptive_cutoff) {
      double mean_card = 0.0;
      for (const auto& p : pats) mean_card += static_cast<double>(p.size());
      mean_card /= static_cast<double>(pats.size());
      metric.penalty = 0.25 * 35.0 / mean_card;
    }
    reps[rep].cutoff = metric.penalty;

    ReplicateOut& out = reps[rep];
    if (!dist_names.empty()) {
      const DistanceMatrix d = distance_matrix(pats, metric);
      const auto results = permutation_test_multi(
          make_distance_evaluator(d, layout, dist_names), n_obs,
          cfg.permutations, derive_seed(rep_seed, 1));
      for (const auto& r : results) out.p.push_back(r.p_value);
    }
    if (!frechet_names.empty()) {
      MetricParams tt = metric;
      tt.kind = MetricKind::TT;
      const BarycenterResult pooled =
          pooled_barycenter(pats, tt, cfg.restarts, derive_seed(rep_seed, 2));
      const auto results = permutation_test_multi(
          make_frechet_evaluator(pats, layout, tt, cfg.restarts, pooled,
                                 frechet_names),
          n_obs, cfg.frechet_permutations, derive_seed(rep_seed, 3));
      for (const auto& r : results) out.p.push_back(r.p_value);
    }
  });

  StudyResult result;
  result.statistics = dist_names;
  result.statistics.insert(result.statistics.end(), frechet_names.begin(),
                           frechet_names.end());
  result.replicates = cfg.replicates;
  result.rejections.assign(result.statistics.size(), 0);
  result.p_values.assign(result.statistics.size(), {});
  double cutoff_sum = 0.0;
  for (const auto& rep : reps) {
    cutoff_sum += rep.cutoff;
    for (std::size_t j = 0; j < result.statistics.size(); ++j) {
      result.p_values[j].push_back(rep.p[j]);
      if (rep.p[j] <= cfg.alpha) ++result.rejections[j];
    }
  }
  result.cutoff_used = cfg.replicates > 0 ? cutoff_sum / cfg.replicates : 0.0;
  return result;
}

struct QqConfig {
  ModelSpec model;
  std::size_t n_per_group = 50;
  int replicates = 500;
  std::string statistic = "levene_ltilde";  // or "frechet_tl"
  MetricParams metric{};
  int restarts = 5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Window window{};
};

struct QqResult {
  std::vector<double> values;      ///< (k-1) * statistic per replicate
  std::vector<StatFlag> flags;
  double ks = 0.0;                 ///< KS distance of the valid values to chi2_1
  int invalid = 0;
};

/// Draws `replicates` null statistic values (two groups from the same
/// model) for QQ plotting against the chi-squared limit with k-1 = 1
/// degrees of freedom.
inline QqResult run_qq(const QqConfig& cfg) {
  const ModelSpec model =
      resolve_model(cfg.model, cfg.window, derive_seed(cfg.seed, 303), cfg.threads);
  const std::size_t nn = cfg.n_per_group;
  const std::size_t n_obs = 2 * nn;
  std::vector<int> labels(n_obs, 0);
  for (std::size_t i = nn; i < n_obs; ++i) labels[i] = 1;
  const GroupLayout layout(labels);

  QqResult out;
  out.values.assign(cfg.replicates, 0.0);
  out.flags.assign(cfg.replicates, StatFlag::Ok);

  parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, 5000 + rep);
    Rng rng(derive_seed(rep_seed, 0));
    std::vector<PointPattern> pats;
    pats.reserve(n_obs);
    for (std::size_t i = 0; i < n_obs; ++i) {
      pats.push_back(sample_model(model, cfg.window, rng));
    }
    StatisticValue s;
    if (cfg.statistic == "levene_ltilde") {
      const DistanceMatrix d = distance_matrix(pats, cfg.metric);
      s = levene_ltilde(d, layout).first;
    } else if (cfg.statistic == "frechet_tl") {
      MetricParams tt = cfg.metric;
      tt.kind = MetricKind::TT;
      const BarycenterResult pooled =
          pooled_barycenter(pats, tt, cfg.restarts, derive_seed(rep_seed, 2));
      s = frechet_statistics_with_pooled(pats, layout, tt, cfg.restarts,
                                         derive_seed(rep_seed, 3), pooled)
              .t_l;
    } else {
      throw invalid_input("qq supports levene_ltilde and frechet_tl");
    }
    // (k-1) * L~ for the distance statistic; T_L is already on the chi2 scale.
    const double scale = cfg.statistic == "levene_ltilde"
                             ? static_cast<double>(layout.k() - 1)
                             : 1.0;
    out.values[rep] = scale * s.value;
    out.flags[rep] = s.flag;
  });

  std::vector<double> valid;
  for (int i = 0; i < cfg.replicates; ++i) {
    if (out.flags[i] == StatFlag::Ok) {
      valid.push_back(out.values[i]);
    } else {
      ++out.invalid;
    }
  }
  out.ks = ks_distance(valid, [](double x) { return chi2_cdf(x, 1); });
  return out;
}

}  // namespace ppanova
