// Drives the installed binary end to end through temp files.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ppanova_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string(PPANOVA_CLI_PATH) + " " + args + " > " + stdout_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("simulate is deterministic and respects count 0") {
  TempDir tmp;
  REQUIRE(run("--seed 9 simulate --model csr --count 4 --out " + tmp.file("a.csv") +
              " --manifest-out " + tmp.file("a.manifest")) == 0);
  REQUIRE(run("--seed 9 simulate --model csr --count 4 --out " + tmp.file("b.csv")) == 0);
  REQUIRE(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));

  REQUIRE(run("simulate --model csr --count 0 --out " + tmp.file("empty.csv")) == 0);
  REQUIRE(slurp(tmp.file("empty.csv")) == "pattern_id,x,y\n");
}

TEST_CASE("dist test mds pipeline") {
  TempDir tmp;
  REQUIRE(run("--seed 4 simulate --model csr --count 12 --out " + tmp.file("p.csv") +
              " --manifest-out " + tmp.file("p.manifest")) == 0);
  REQUIRE(run("dist --patterns " + tmp.file("p.csv") + " --manifest " +
              tmp.file("p.manifest") + " --out " + tmp.file("d.csv")) == 0);
  REQUIRE(fs::exists(tmp.file("d.csv")));
  REQUIRE(fs::exists(tmp.file("d.csv") + ".meta.json"));

  std::string labels = "pattern_id,group\n";
  for (int i = 1; i <= 12; ++i) {
    labels += "p" + std::to_string(i) + "," + (i <= 6 ? "g1" : "g2") + "\n";
  }
  write(tmp.file("labels.csv"), labels);

  REQUIRE(run("--seed 2 test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") +
              " --statistic levene_l -M 99 --out " + tmp.file("r.json")) == 0);
  const json r = json::parse(slurp(tmp.file("r.json")));
  REQUIRE(r["results"].size() == 1);
  REQUIRE(r["results"][0]["p_value"].get<double>() > 0.0);
  REQUIRE(r["results"][0]["permutations"] == 99);

  // seeded rerun gives identical bytes
  REQUIRE(run("--seed 2 test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") +
              " --statistic levene_l -M 99 --out " + tmp.file("r2.json")) == 0);
  REQUIRE(slurp(tmp.file("r.json")) == slurp(tmp.file("r2.json")));

  REQUIRE(run("mds --matrix " + tmp.file("d.csv") + " --dims 2 --out " +
              tmp.file("coords.csv") + " --eigen-out " + tmp.file("eig.json")) == 0);
  const json eig = json::parse(slurp(tmp.file("eig.json")));
  REQUIRE(eig["eigenvalues"].size() == 2);
  const std::string coords = slurp(tmp.file("coords.csv"));
  REQUIRE(coords.substr(0, 22) == "pattern_id,dim1,dim2\n");
}

TEST_CASE("chi2 mode and two-way") {
  TempDir tmp;
  REQUIRE(run("--seed 6 simulate --model csr --count 16 --out " + tmp.file("p.csv")) == 0);
  REQUIRE(run("dist --patterns " + tmp.file("p.csv") + " --out " + tmp.file("d.csv")) == 0);

  std::string labels = "pattern_id,group\n";
  for (int i = 1; i <= 16; ++i) {
    labels += "p" + std::to_string(i) + "," + (i <= 8 ? "g1" : "g2") + "\n";
  }
  write(tmp.file("labels.csv"), labels);
  REQUIRE(run("test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") +
              " --statistic levene_ltilde --mode chi2 --out " + tmp.file("c.json")) == 0);
  const json c = json::parse(slurp(tmp.file("c.json")));
  REQUIRE(c["df"] == 1);
  REQUIRE(c["p_value"].get<double>() >= 0.0);
  REQUIRE(c["null_estimates"]["gamma_sq_hat"].get<double>() > 0.0);

  // chi2 is not defined for anderson
  REQUIRE(run("test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") + " --statistic anderson --mode chi2") == 1);

  std::string twoway = "pattern_id,factorA,factorB\n";
  for (int i = 1; i <= 16; ++i) {
    const int a = (i - 1) % 2;
    const int b = ((i - 1) / 2) % 2;
    twoway += "p" + std::to_string(i) + ",a" + std::to_string(a) + ",b" +
              std::to_string(b) + "\n";
  }
  write(tmp.file("twoway.csv"), twoway);
  REQUIRE(run("--seed 3 test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("twoway.csv") +
              " --statistic two_way -M 49 --out " + tmp.file("tw.json")) == 0);
  const json tw = json::parse(slurp(tmp.file("tw.json")));
  REQUIRE(tw["results"].size() == 4);
}

TEST_CASE("degenerate observed data exits with code 3") {
  TempDir tmp;
  // two identical patterns, one per group: all distances zero
  write(tmp.file("p.csv"),
        "pattern_id,x,y\na,0.5,0.5\nb,0.5,0.5\na,0.25,0.75\nb,0.25,0.75\n");
  write(tmp.file("labels.csv"), "pattern_id,group\na,g1\nb,g2\n");
  REQUIRE(run("dist --patterns " + tmp.file("p.csv") + " --out " + tmp.file("d.csv")) == 0);
  // anderson on identical patterns: degenerate flag but still testable
  REQUIRE(run("--seed 5 test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") + " --statistic anderson -M 9 --out " +
              tmp.file("deg.json")) == 0);
  const json deg = json::parse(slurp(tmp.file("deg.json")));
  REQUIRE(deg["results"][0]["observed_flag"] == "degenerate");
  REQUIRE(deg["results"][0]["p_value"] == 1.0);

  // chi2 on the same degenerate data cannot produce a statistic
  REQUIRE(run("test --matrix " + tmp.file("d.csv") + " --labels " +
              tmp.file("labels.csv") + " --statistic levene_ltilde --mode chi2") == 2);
}

TEST_CASE("usage and data errors") {
  TempDir tmp;
  REQUIRE(run("test --labels nowhere.csv --statistic anderson") == 1);  // no input
  REQUIRE(run("dist --patterns " + tmp.file("missing.csv") + " --out " +
              tmp.file("d.csv")) == 2);
  write(tmp.file("bad.csv"), "pattern_id,x,y\na,oops,1\n");
  REQUIRE(run("dist --patterns " + tmp.file("bad.csv") + " --out " +
              tmp.file("d.csv")) == 2);
  REQUIRE(run("frobnicate") == 1);
}

TEST_CASE("adaptive cutoff uses the mean cardinality") {
  TempDir tmp;
  // 54 patterns with 8385 points in total: mean 155.28, cutoff 0.0564
  std::ostringstream csv;
  csv << "pattern_id,x,y\n";
  int made = 0;
  for (int p = 0; p < 54; ++p) {
    const int pts = p < 39 ? 155 : 156;
    for (int i = 0; i < pts; ++i) {
      csv << "p" << p << "," << (0.001 * ((made * 7919) % 997)) << ","
          << (0.001 * ((made * 104729) % 997)) << "\n";
      ++made;
    }
  }
  REQUIRE(made == 8385);
  write(tmp.file("bubbles.csv"), csv.str());
  REQUIRE(run("dist --patterns " + tmp.file("bubbles.csv") +
              " --adaptive-cutoff --metric rtt --out " + tmp.file("d.csv")) == 0);
  const json meta = json::parse(slurp(tmp.file("d.csv") + ".meta.json"));
  REQUIRE(meta["adaptive_cutoff"] == true);
  REQUIRE(meta["penalty"].get<double>() == Catch::Approx(0.0564).margin(1e-4));
  REQUIRE(meta["mean_cardinality"].get<double>() ==
          Catch::Approx(8385.0 / 54.0).margin(1e-9));
}

TEST_CASE("qq and study smoke") {
  TempDir tmp;
  REQUIRE(run("--seed 12 qq --model csr --n-per-group 8 --replicates 40 --out " +
              tmp.file("qq.csv"), tmp.file("qq.json")) == 0);
  const json qq = json::parse(slurp(tmp.file("qq.json")));
  REQUIRE(qq["ks_chi2_df1"].get<double>() >= 0.0);
  const std::string qq_csv = slurp(tmp.file("qq.csv"));
  REQUIRE(qq_csv.substr(0, 38) == "replicate,value,flag,chi2_df1_quantile");

  REQUIRE(run("--seed 13 study --scenario-a csr --scenario-b csr --scenario-b "
              "scenario4 --n-per-group 6 --replicates 4 -M 19 --stats "
              "anderson,levene_l --out " + tmp.file("study.csv"),
              tmp.file("study.json")) == 0);
  const json st = json::parse(slurp(tmp.file("study.json")));
  REQUIRE(st["rejections"]["anderson"].size() == 2);
  const std::string csv = slurp(tmp.file("study.csv"));
  REQUIRE(csv.find("statistic,csr,scenario4") == 0);
}
