// Command-line interface: distance computation, hypothesis tests, point
// process simulation, power studies, null-distribution samples and MDS.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
// degeneracy.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppanova/chi2.hpp"
#include "ppanova/classic_anova.hpp"
#include "ppanova/dist_stats.hpp"
#include "ppanova/errors.hpp"
#include "ppanova/frechet.hpp"
#include "ppanova/io.hpp"
#include "ppanova/mds.hpp"
#include "ppanova/permutation.hpp"
#include "ppanova/simulate.hpp"
#include "ppanova/study.hpp"
#include "ppanova/tt_metric.hpp"

namespace {

using nlohmann::json;
using namespace ppanova;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency

  unsigned resolved_threads() const {
    return threads == 0 ? default_threads() : threads;
  }
};

struct MetricOpts {
  double penalty = 0.25;
  double order = 2.0;
  std::string kind = "tt";
  bool adaptive_cutoff = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-C,--penalty", penalty, "metric penalty C")
        ->check(CLI::PositiveNumber);
    cmd->add_option("-p,--order", order, "metric order p (>= 1)");
    cmd->add_option("--metric", kind, "tt or rtt")
        ->check(CLI::IsMember({"tt", "rtt"}));
    cmd->add_flag("--adaptive-cutoff", adaptive_cutoff,
                  "replace C by 0.25*35/mean cardinality of the input");
  }

  MetricParams resolve(const PatternSet* patterns) const {
    MetricParams m;
    m.penalty = penalty;
    m.order = order;
    m.kind = kind == "rtt" ? MetricKind::RTT : MetricKind::TT;
    if (adaptive_cutoff) {
      if (patterns == nullptr) {
        throw usage_error("--adaptive-cutoff needs pattern input");
      }
      m.penalty = 0.25 * 35.0 / patterns->mean_cardinality();
    }
    m.validate();
    return m;
  }
};

void write_text(const std::string& path, const std::string& text) {
  auto out = io_detail::open_output(path);
  out << text;
}

void emit(const std::optional<std::string>& out_path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path) {
    write_text(*out_path, text);
  } else {
    std::cout << text;
  }
}

// ---------- dist ----------

struct DistArgs {
  std::string patterns_file;
  std::optional<std::string> manifest;
  std::string out;
  MetricOpts metric;
};

void run_dist(const DistArgs& args, const GlobalOpts& global) {
  const PatternSet set = read_patterns(args.patterns_file, args.manifest);
  if (set.size() < 2) throw invalid_input("need at least 2 patterns");
  const MetricParams metric = args.metric.resolve(&set);
  const DistanceMatrix d =
      distance_matrix(set.patterns, metric, global.resolved_threads());
  write_distance_matrix_csv(args.out, set.ids, d);

  json meta;
  meta["penalty"] = metric.penalty;
  meta["order"] = metric.order;
  meta["kind"] = metric.kind == MetricKind::TT ? "tt" : "rtt";
  meta["adaptive_cutoff"] = args.metric.adaptive_cutoff;
  meta["mean_cardinality"] = set.mean_cardinality();
  meta["patterns"] = set.size();
  write_text(args.out + ".meta.json", meta.dump(2) + "\n");
  std::cout << meta.dump(2) << "\n";
}

// ---------- test ----------

struct TestArgs {
  std::optional<std::string> matrix_file;
  std::optional<std::string> patterns_file;
  std::optional<std::string> manifest;
  std::string labels_file;
  std::string statistic;
  std::string mode = "perm";
  int permutations = -1;  // -1 = statistic-specific default
  int restarts = 5;
  MetricOpts metric;
  std::optional<std::string> out;
};

json estimates_json(const NullEstimates& est) {
  json j;
  j["gamma_sq_hat"] = est.gamma_sq_hat;
  j["sigma_sq_hat"] = est.sigma_sq_hat;
  j["gamma_negative"] = est.gamma_negative;
  return j;
}

void run_test(const TestArgs& args, const GlobalOpts& global) {
  const bool frechet = is_frechet_statistic(args.statistic);
  const bool two_way = args.statistic == "two_way";

  if (args.mode == "chi2" && args.statistic != "levene_ltilde" &&
      args.statistic != "frechet_tl") {
    throw usage_error("chi2 mode is only available for levene_ltilde and frechet_tl");
  }
  if (frechet && !args.patterns_file) {
    throw usage_error("Frechet statistics need --patterns input");
  }
  if (args.matrix_file && args.patterns_file) {
    throw usage_error("give either --matrix or --patterns, not both");
  }
  if (!args.matrix_file && !args.patterns_file) {
    throw usage_error("need --matrix or --patterns input");
  }

  PatternSet set;
  std::vector<std::string> ids;
  DistanceMatrix d;
  MetricParams metric{};
  if (args.patterns_file) {
    set = read_patterns(*args.patterns_file, args.manifest);
    if (set.size() < 2) throw invalid_input("need at least 2 patterns");
    ids = set.ids;
    metric = args.metric.resolve(&set);
    if (!frechet) {
      d = distance_matrix(set.patterns, metric, global.resolved_threads());
    }
  } else {
    NamedDistanceMatrix named = read_distance_matrix_csv(*args.matrix_file);
    ids = std::move(named.ids);
    d = std::move(named.matrix);
  }

  const LabelSet labels = read_labels_csv(args.labels_file, ids);
  const int default_m = frechet ? 99 : 999;
  const int M = args.permutations > 0 ? args.permutations : default_m;

  json result;
  result["seed"] = global.seed;
  result["mode"] = args.mode;

  if (two_way) {
    if (!labels.two_way) {
      throw invalid_input("two_way needs 'pattern_id,factorA,factorB' labels");
    }
    std::vector<std::string> fa, fb;
    for (const auto& f : labels.factors) {
      fa.push_back(f[0]);
      fb.push_back(f[1]);
    }
    const TwoWayLayout layout(encode_levels(fa), encode_levels(fb));
    MultiStatFn stat = [&](const std::vector<std::size_t>& perm, std::uint64_t) {
      auto map = [&perm](std::size_t s) { return perm[s]; };
      const TwoWayLeveneResult r = two_way_levene(d, layout, map);
      return std::vector<StatisticValue>{r.overall, r.factor_a, r.factor_b,
                                         r.interaction};
    };
    const auto results =
        permutation_test_multi(stat, layout.n(), M, global.seed,
                               global.resolved_threads());
    result["results"] = json::array();
    for (const auto& r : results) result["results"].push_back(to_json(r));
    emit(args.out, result);
    return;
  }

  if (labels.two_way) {
    throw invalid_input("one-way statistic with two-factor labels");
  }
  std::vector<std::string> groups;
  for (const auto& f : labels.factors) groups.push_back(f[0]);
  const GroupLayout layout(encode_levels(groups));

  if (args.mode == "chi2") {
    const int df = layout.k() - 1;
    if (args.statistic == "levene_ltilde") {
      const auto [s, est] = levene_ltilde(d, layout);
      if (s.flag == StatFlag::Invalid) {
        throw degenerate_error(
            "covariance estimate non-positive; fall back to a permutation "
            "test of levene_l");
      }
      const double chi2_stat = df * s.value;
      result["statistic"] = to_json(s);
      result["df"] = df;
      result["chi2_stat"] = chi2_stat;
      result["p_value"] = s.flag == StatFlag::Ok ? chi2_pvalue(chi2_stat, df) : 1.0;
      result["null_estimates"] = estimates_json(est);
    } else {  // frechet_tl
      const BarycenterResult pooled = pooled_barycenter(
          set.patterns, metric, args.restarts, global.seed);
      const FrechetStatistics st = frechet_statistics_with_pooled(
          set.patterns, layout, metric, args.restarts, global.seed, pooled);
      if (st.t_l.flag == StatFlag::Invalid) {
        throw degenerate_error("a group variance of squared distances is zero");
      }
      result["statistic"] = to_json(st.t_l);
      result["df"] = df;
      result["p_value"] = chi2_pvalue(st.t_l.value, df);
    }
    emit(args.out, result);
    return;
  }

  if (args.mode != "perm") throw usage_error("mode must be perm or chi2");

  std::vector<PermutationTestResult> results;
  if (frechet) {
    MetricParams tt = metric;
    tt.kind = MetricKind::TT;
    const BarycenterResult pooled =
        pooled_barycenter(set.patterns, tt, args.restarts, derive_seed(global.seed, 9));
    results = permutation_test_multi(
        make_frechet_evaluator(set.patterns, layout, tt, args.restarts, pooled,
                               {args.statistic}),
        layout.n(), M, global.seed, global.resolved_threads());
  } else {
    const std::string name = args.statistic == "anderson_f" ? "anderson"
                                                            : args.statistic;
    if (!is_distance_statistic(name)) {
      throw usage_error("unknown statistic '" + args.statistic + "'");
    }
    results = permutation_test_multi(make_distance_evaluator(d, layout, {name}),
                                     layout.n(), M, global.seed,
                                     global.resolved_threads());
  }
  result["results"] = json::array();
  for (const auto& r : results) result["results"].push_back(to_json(r));
  if (args.statistic == "levene_ltilde") {
    result["null_estimates"] = estimates_json(levene_ltilde(d, layout).second);
  }
  emit(args.out, result);
}

// ---------- simulate ----------

struct SimulateArgs {
  std::string model = "csr";
  int count = 1;
  std::string out;
  std::optional<std::string> manifest_out;
};

void run_simulate(const SimulateArgs& args, const GlobalOpts& global) {
  if (args.count < 0) throw usage_error("count must be >= 0");
  const Window window{};
  const ModelSpec spec = resolve_model(parse_model_spec(args.model), window,
                                       derive_seed(global.seed, 7),
                                       global.resolved_threads());
  PatternSet set;
  set.ids.resize(args.count);
  set.patterns.resize(args.count);
  parallel_for(args.count, global.resolved_threads(), [&](std::int64_t i) {
    Rng rng(derive_seed(global.seed, 100 + static_cast<std::uint64_t>(i)));
    set.ids[i] = "p" + std::to_string(i + 1);
    set.patterns[i] = sample_model(spec, window, rng);
  });
  write_pattern_csv(args.out, set);
  if (args.manifest_out) write_manifest(*args.manifest_out, set);

  json meta;
  meta["model"] = spec.name;
  meta["count"] = args.count;
  meta["seed"] = global.seed;
  if (spec.family == ModelFamily::Strauss) meta["beta"] = spec.strauss.beta;
  std::cout << meta.dump(2) << "\n";
}

// ---------- study ----------

struct StudyArgs {
  std::string scenario_a;
  std::vector<std::string> scenario_b;
  std::size_t n_per_group = 20;
  int replicates = 100;
  int permutations = 999;
  int frechet_permutations = 99;
  double alpha = 0.05;
  int restarts = 5;
  std::string stats = "anderson,levene_l";
  MetricOpts metric;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string item = text.substr(pos, next - pos);
    if (!item.empty()) out.push_back(item);
    pos = next + 1;
  }
  return out;
}

void run_study_cmd(const StudyArgs& args, const GlobalOpts& global) {
  if (args.scenario_b.empty()) throw usage_error("need at least one --scenario-b");
  StudyConfig cfg;
  cfg.group_a = parse_model_spec(args.scenario_a);
  cfg.n_per_group = args.n_per_group;
  cfg.replicates = args.replicates;
  cfg.permutations = args.permutations;
  cfg.frechet_permutations = args.frechet_permutations;
  cfg.alpha = args.alpha;
  cfg.restarts = args.restarts;
  cfg.statistics = split_list(args.stats);
  cfg.metric.penalty = args.metric.penalty;
  cfg.metric.order = args.metric.order;
  cfg.adaptive_cutoff = args.metric.adaptive_cutoff;
  cfg.threads = global.resolved_threads();

  std::vector<StudyResult> columns;
  for (std::size_t c = 0; c < args.scenario_b.size(); ++c) {
    cfg.group_b = parse_model_spec(args.scenario_b[c]);
    cfg.seed = derive_seed(global.seed, 40 + c);
    columns.push_back(run_study(cfg));
  }

  std::ostringstream csv;
  csv << "statistic";
  for (const auto& name : args.scenario_b) csv << ',' << name;
  csv << '\n';
  for (std::size_t j = 0; j < columns[0].statistics.size(); ++j) {
    csv << columns[0].statistics[j];
    for (const auto& col : columns) csv << ',' << col.rejections[j];
    csv << '\n';
  }
  write_text(args.out, csv.str());

  json meta;
  meta["scenario_a"] = args.scenario_a;
  meta["scenario_b"] = args.scenario_b;
  meta["replicates"] = args.replicates;
  meta["alpha"] = args.alpha;
  meta["n_per_group"] = args.n_per_group;
  meta["seed"] = global.seed;
  meta["statistics"] = columns[0].statistics;
  json counts = json::object();
  for (std::size_t j = 0; j < columns[0].statistics.size(); ++j) {
    json row = json::array();
    for (const auto& col : columns) row.push_back(col.rejections[j]);
    counts[columns[0].statistics[j]] = row;
  }
  meta["rejections"] = counts;
  std::cout << meta.dump(2) << "\n";
}

// ---------- qq ----------

struct QqArgs {
  std::string model = "csr";
  std::size_t n_per_group = 50;
  std::string statistic = "levene_ltilde";
  int replicates = 500;
  int restarts = 5;
  MetricOpts metric;
  std::string out;
};

void run_qq_cmd(const QqArgs& args, const GlobalOpts& global) {
  QqConfig cfg;
  cfg.model = parse_model_spec(args.model);
  cfg.n_per_group = args.n_per_group;
  cfg.statistic = args.statistic;
  cfg.replicates = args.replicates;
  cfg.restarts = args.restarts;
  cfg.metric.penalty = args.metric.penalty;
  cfg.metric.order = args.metric.order;
  cfg.seed = global.seed;
  cfg.threads = global.resolved_threads();
  const QqResult r = run_qq(cfg);

  // Rank each valid value among the valid ones to pair it with the
  // theoretical quantile at (rank - 0.5) / n_valid.
  std::vector<double> valid;
  for (int i = 0; i < args.replicates; ++i) {
    if (r.flags[i] == StatFlag::Ok) valid.push_back(r.values[i]);
  }
  std::vector<double> sorted = valid;
  std::sort(sorted.begin(), sorted.end());

  std::ostringstream csv;
  csv << "replicate,value,flag,chi2_df1_quantile\n";
  for (int i = 0; i < args.replicates; ++i) {
    csv << i << ',' << io_detail::format_double(r.values[i]) << ','
        << to_string(r.flags[i]);
    if (r.flags[i] == StatFlag::Ok) {
      const auto rank = std::lower_bound(sorted.begin(), sorted.end(),
                                         r.values[i]) -
                        sorted.begin() + 1;
      const double q = chi2_quantile(
          (static_cast<double>(rank) - 0.5) / static_cast<double>(sorted.size()), 1);
      csv << ',' << io_detail::format_double(q);
    } else {
      csv << ',';
    }
    csv << '\n';
  }
  write_text(args.out, csv.str());

  json meta;
  meta["model"] = args.model;
  meta["statistic"] = args.statistic;
  meta["replicates"] = args.replicates;
  meta["n_per_group"] = args.n_per_group;
  meta["ks_chi2_df1"] = r.ks;
  meta["invalid"] = r.invalid;
  meta["seed"] = global.seed;
  std::cout << meta.dump(2) << "\n";
}

// ---------- mds ----------

struct MdsArgs {
  std::string matrix_file;
  std::size_t dims = 2;
  std::string out;
  std::optional<std::string> eigen_out;
};

void run_mds(const MdsArgs& args) {
  const NamedDistanceMatrix named = read_distance_matrix_csv(args.matrix_file);
  const Embedding e = classical_mds(named.matrix, args.dims);

  std::ostringstream csv;
  csv << "pattern_id";
  for (std::size_t c = 0; c < e.dims; ++c) csv << ",dim" << (c + 1);
  csv << '\n';
  for (std::size_t i = 0; i < e.n; ++i) {
    csv << named.ids[i];
    for (std::size_t c = 0; c < e.dims; ++c) {
      csv << ',' << io_detail::format_double(e.coordinates[i * e.dims + c]);
    }
    csv << '\n';
  }
  write_text(args.out, csv.str());

  json meta;
  meta["eigenvalues"] = e.eigenvalues;
  meta["negative_mass"] = e.negative_mass_fraction;
  if (args.eigen_out) write_text(*args.eigen_out, meta.dump(2) + "\n");
  std::cout << meta.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANOVA-type group-difference tests for spatial point patterns"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file");

  GlobalOpts global;
  app.add_option("--seed", global.seed, "RNG seed (default 1)");
  app.add_option("--threads", global.threads, "worker threads (0 = all cores)");

  DistArgs dist;
  auto* cmd_dist = app.add_subcommand("dist", "pairwise distance matrix");
  cmd_dist->add_option("--patterns", dist.patterns_file, "pattern CSV/JSON")
      ->required();
  cmd_dist->add_option("--manifest", dist.manifest, "pattern id manifest");
  cmd_dist->add_option("--out", dist.out, "output matrix CSV")->required();
  dist.metric.add_to(cmd_dist);

  TestArgs test;
  auto* cmd_test = app.add_subcommand("test", "group-difference test");
  cmd_test->add_option("--matrix", test.matrix_file, "distance matrix CSV");
  cmd_test->add_option("--patterns", test.patterns_file, "pattern CSV/JSON");
  cmd_test->add_option("--manifest", test.manifest, "pattern id manifest");
  cmd_test->add_option("--labels", test.labels_file, "labels CSV")->required();
  cmd_test
      ->add_option("--statistic", test.statistic,
                   "anderson|anderson_bf|levene_l|levene_ltilde|frechet_tf|"
                   "frechet_tl|frechet_t|two_way")
      ->required();
  cmd_test->add_option("--mode", test.mode, "perm or chi2")
      ->check(CLI::IsMember({"perm", "chi2"}));
  cmd_test->add_option("-M,--permutations", test.permutations,
                       "permutation count (default 999, Frechet 99)");
  cmd_test->add_option("--restarts", test.restarts, "barycenter restarts");
  cmd_test->add_option("--out", test.out, "output JSON (default stdout)");
  test.metric.add_to(cmd_test);

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "sample point patterns");
  cmd_sim->add_option("--model", sim.model,
                      "csr | scenario0..scenario6 | mixture:... | exptilt:... "
                      "| strauss:gamma=...")
      ->required();
  cmd_sim->add_option("--count", sim.count, "number of patterns");
  cmd_sim->add_option("--out", sim.out, "output pattern CSV")->required();
  cmd_sim->add_option("--manifest-out", sim.manifest_out, "write id manifest");

  StudyArgs study;
  auto* cmd_study = app.add_subcommand("study", "rejection-count study");
  cmd_study->add_option("--scenario-a", study.scenario_a, "group A model")
      ->required();
  cmd_study
      ->add_option("--scenario-b", study.scenario_b,
                   "group B model (repeatable: one output column each)")
      ->required();
  cmd_study->add_option("--n-per-group", study.n_per_group, "patterns per group");
  cmd_study->add_option("--replicates", study.replicates, "data sets per column");
  cmd_study->add_option("-M,--permutations", study.permutations,
                        "M for distance statistics");
  cmd_study->add_option("--frechet-M", study.frechet_permutations,
                        "M for Frechet statistics");
  cmd_study->add_option("--alpha", study.alpha, "significance level");
  cmd_study->add_option("--restarts", study.restarts, "barycenter restarts");
  cmd_study->add_option("--stats", study.stats, "comma list of statistics");
  cmd_study->add_option("--out", study.out, "output rejection-count CSV")
      ->required();
  study.metric.add_to(cmd_study);

  QqArgs qq;
  auto* cmd_qq = app.add_subcommand("qq", "null statistic samples for QQ plots");
  cmd_qq->add_option("--model", qq.model, "null model for both groups");
  cmd_qq->add_option("--n-per-group", qq.n_per_group, "patterns per group");
  cmd_qq->add_option("--statistic", qq.statistic, "levene_ltilde or frechet_tl")
      ->check(CLI::IsMember({"levene_ltilde", "frechet_tl"}));
  cmd_qq->add_option("--replicates", qq.replicates, "sample size");
  cmd_qq->add_option("--restarts", qq.restarts, "barycenter restarts");
  cmd_qq->add_option("--out", qq.out, "output samples CSV")->required();
  qq.metric.add_to(cmd_qq);

  MdsArgs mds;
  auto* cmd_mds = app.add_subcommand("mds", "classical multidimensional scaling");
  cmd_mds->add_option("--matrix", mds.matrix_file, "distance matrix CSV")
      ->required();
  cmd_mds->add_option("--dims", mds.dims, "embedding dimensions");
  cmd_mds->add_option("--out", mds.out, "output coordinates CSV")->required();
  cmd_mds->add_option("--eigen-out", mds.eigen_out, "eigenvalue JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (cmd_dist->parsed()) run_dist(dist, global);
    if (cmd_test->parsed()) run_test(test, global);
    if (cmd_sim->parsed()) run_simulate(sim, global);
    if (cmd_study->parsed()) run_study_cmd(study, global);
    if (cmd_qq->parsed()) run_qq_cmd(qq, global);
    if (cmd_mds->parsed()) run_mds(mds);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const degenerate_error& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return 3;
  } catch (const parse_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const calibration_error& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
