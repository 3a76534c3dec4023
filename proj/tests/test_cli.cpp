#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
  const char *tmp = std::getenv("TMPDIR");
  const fs::path dir = fs::path(tmp ? tmp : "/tmp") / ("cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string &args) {
  const std::string cmd =
      std::string("\"") + LESIONEVAL_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path &p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Small cohort: lesions big enough to survive the size filter in every region.
const char *kSpec = R"({"dims":[40,40,40],"lesions":[1,2],"radius":[6,8]})";

fs::path synth_cohort(const std::string &name, int cases, const std::string &teams,
                      const char *spec = kSpec, int seed = 7) {
  const fs::path dir = scratch(name);
  spit(dir / "spec.json", spec);
  const auto cmd = "synth --spec \"" + (dir / "spec.json").string() + "\" --cases " +
                   std::to_string(cases) + " --seed " + std::to_string(seed) + " " +
                   teams + " --out \"" + (dir / "cohort").string() + "\"";
  REQUIRE(run(cmd) == 0);
  return dir / "cohort";
}

std::map<std::string, double> metric_values(const fs::path &csv, const std::string &team,
                                            const std::string &metric) {
  std::map<std::string, double> out;
  for (const auto &r : csv_rows(csv))
    if (r[0] == team && r.size() > 4 && r[3] == metric)
      out[r[1] + "/" + r[2]] = std::stod(r[4]);
  return out;
}

} // namespace

TEST_CASE("synth is deterministic per seed") {
  const auto a = synth_cohort("synth_a", 2, "--team \"noisy=dilate:1;fp:2\"");
  const auto b = synth_cohort("synth_b", 2, "--team \"noisy=dilate:1;fp:2\"");
  for (const auto &entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file())
      continue;
    const auto rel = fs::relative(entry.path(), a);
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(b / rel));
  }
  const auto c = synth_cohort("synth_c", 2, "--team \"noisy=dilate:1;fp:2\"", kSpec, 8);
  CHECK(slurp(a / "case-000" / "gt.nii.gz") != slurp(c / "case-000" / "gt.nii.gz"));
}

TEST_CASE("evaluate: perfect and empty predictions, worker independence") {
  const char *spec = R"({"dims":[40,40,40],"lesions":[1,1],"radius":[6,8]})";
  const auto cohort = synth_cohort("eval", 4, "--team perfect= --team miss=drop:0", spec);
  const auto manifest = (cohort / "manifest.json").string();
  const auto out1 = cohort.parent_path() / "out1";
  const auto out8 = cohort.parent_path() / "out8";
  REQUIRE(run("evaluate -m \"" + manifest + "\" -j 1 --format both -o \"" +
              out1.string() + "\"") == 0);
  REQUIRE(run("evaluate -m \"" + manifest + "\" -j 8 --format both -o \"" +
              out8.string() + "\"") == 0);
  CHECK(slurp(out1 / "metrics.csv") == slurp(out8 / "metrics.csv"));
  CHECK(slurp(out1 / "metrics.json") == slurp(out8 / "metrics.json"));

  const auto perfect = metric_values(out1 / "metrics.csv", "perfect", "lesionwise_dice");
  CHECK(perfect.size() == 12);
  for (const auto &[k, v] : perfect)
    CHECK(v == 1.0);
  for (const auto &[k, v] : metric_values(out1 / "metrics.csv", "perfect", "lesionwise_hd95"))
    CHECK(v == 0.0);
  const auto miss = metric_values(out1 / "metrics.csv", "miss", "lesionwise_dice");
  CHECK(miss.size() == 12);
  for (const auto &[k, v] : miss)
    CHECK(v == 0.0);
  for (const auto &[k, v] : metric_values(out1 / "metrics.csv", "miss", "lesionwise_hd95"))
    CHECK(v == 374.0);

  // CSV and JSON carry the same numbers.
  const auto doc = json::parse(slurp(out1 / "metrics.json"));
  std::size_t compared = 0;
  for (const auto &r : csv_rows(out1 / "metrics.csv")) {
    if (r[3] == "error" || r[4] == "NA")
      continue;
    for (const auto &rec : doc["records"])
      if (rec["team"] == r[0] && rec["case"] == r[1] && rec["region"] == r[2]) {
        const double a = std::stod(r[4]);
        const double b = rec[r[3]].get<double>();
        CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)));
        ++compared;
      }
  }
  CHECK(compared == 2 * 4 * 3 * 6);
}

TEST_CASE("evaluate: missing predictions") {
  const auto cohort = synth_cohort("missing", 2, "--team perfect=");
  auto manifest = json::parse(slurp(cohort / "manifest.json"));
  manifest["cases"][1]["predictions"]["perfect"] = "nowhere/pred.nii.gz";
  const auto path = cohort / "manifest_missing.json";
  spit(path, manifest.dump());
  const auto out = cohort.parent_path() / "out";
  CHECK(run("evaluate -m \"" + path.string() + "\" -o \"" + out.string() + "\"") == 2);
  bool error_row = false;
  for (const auto &r : csv_rows(out / "metrics.csv"))
    error_row = error_row || (r[1] == "case-001" && r[3] == "error");
  CHECK(error_row);

  CHECK(run("evaluate --skip-missing -m \"" + path.string() + "\" -o \"" + out.string() +
            "\"") == 3);
  const auto hd = metric_values(out / "metrics.csv", "perfect", "lesionwise_hd95");
  CHECK(hd.at("case-001/WT") == 374.0);
  CHECK(hd.at("case-000/WT") == 0.0);
}

TEST_CASE("rank: worked example from aggregates") {
  const auto dir = scratch("rank");
  spit(dir / "agg.csv", "team,ET_DSC,TC_DSC,WT_DSC,ET_HD95,TC_HD95,WT_HD95\n"
                        "alpha,0.90,0.90,0.90,10,10,10\n"
                        "beta,0.70,0.85,0.70,30,15,40\n"
                        "gamma,0.80,0.80,0.80,20,20,20\n"
                        "delta,0.60,0.60,0.60,50,50,35\n");
  REQUIRE(run("rank --aggregates \"" + (dir / "agg.csv").string() + "\" -o \"" +
              (dir / "out").string() + "\"") == 0);
  bool found = false;
  for (const auto &r : csv_rows(dir / "out" / "leaderboard.csv"))
    if (r[1] == "beta") {
      found = true;
      CHECK(r[2] == "2.8333");
      CHECK(r[0] == "3");
    }
  CHECK(found);
  const auto lb = json::parse(slurp(dir / "out" / "leaderboard.json"));
  CHECK(lb.dump().find("beta") != std::string::npos);

  spit(dir / "one.csv", "team,ET_DSC,TC_DSC,WT_DSC,ET_HD95,TC_HD95,WT_HD95\n"
                        "solo,0.5,0.5,0.5,50,50,50\n");
  REQUIRE(run("rank --aggregates \"" + (dir / "one.csv").string() + "\" -o \"" +
              (dir / "one").string() + "\"") == 0);
  CHECK(csv_rows(dir / "one" / "leaderboard.csv").at(0).at(2) == "1.0000");
}

TEST_CASE("rank from metrics, coverage errors and config precedence") {
  const auto cohort = synth_cohort("rank_metrics", 3, "--team a= --team b=erode:1 --team c=drop:0");
  const auto manifest = (cohort / "manifest.json").string();
  const auto out = cohort.parent_path() / "out";
  REQUIRE(run("evaluate -m \"" + manifest + "\" --format both -o \"" + out.string() + "\"") ==
          0);
  REQUIRE(run("rank \"" + (out / "metrics.csv").string() + "\" -o \"" +
              (out / "r").string() + "\"") == 0);
  const auto lb = csv_rows(out / "r" / "leaderboard.csv");
  REQUIRE(lb.size() == 3);
  CHECK(lb[0][1] == "a");
  CHECK(lb[2][1] == "c");
  REQUIRE(run("rank \"" + (out / "metrics.json").string() + "\" -o \"" +
              (out / "rj").string() + "\"") == 0);
  CHECK(slurp(out / "r" / "leaderboard.csv") == slurp(out / "rj" / "leaderboard.csv"));

  // Drop one team's rows for one case: ranking refuses incomplete coverage.
  std::string trimmed;
  std::istringstream in(slurp(out / "metrics.csv"));
  for (std::string line; std::getline(in, line);)
    if (line.rfind("b,case-002,", 0) != 0)
      trimmed += line + "\n";
  spit(out / "gap.csv", trimmed);
  CHECK(run("rank \"" + (out / "gap.csv").string() + "\" -o \"" + (out / "g").string() +
            "\"") == 2);

  // Config file sets the penalty; a flag overrides it.
  spit(out / "eval.toml", "# penalties\nhd_penalty = 100\nmin-lesion-voxels = 50\n");
  const auto cfg = (out / "eval.toml").string();
  REQUIRE(run("evaluate -m \"" + manifest + "\" --config \"" + cfg + "\" -o \"" +
              (out / "c1").string() + "\"") == 0);
  REQUIRE(run("evaluate -m \"" + manifest + "\" --config \"" + cfg +
              "\" --hd-penalty 200 -o \"" + (out / "c2").string() + "\"") == 0);
  const auto hd1 = metric_values(out / "c1" / "metrics.csv", "c", "lesionwise_hd95");
  const auto hd2 = metric_values(out / "c2" / "metrics.csv", "c", "lesionwise_hd95");
  // Team c only misses lesions, so its HD95 scales with the penalty.
  bool penalised = false;
  for (const auto &[k, v] : hd1) {
    CHECK(hd2.at(k) == 2.0 * v);
    penalised = penalised || v > 0.0;
  }
  CHECK(penalised);

  spit(out / "bad.toml", "no_such_key = 1\n");
  CHECK(run("evaluate -m \"" + manifest + "\" --config \"" +
            (out / "bad.toml").string() + "\" -o \"" + (out / "c3").string() + "\"") == 2);
  CHECK(run("evaluate -m \"" + manifest + "\" --hd-percentile 2 -o \"" +
            (out / "c4").string() + "\"") == 2);
}

TEST_CASE("abutment and stats commands") {
  const auto cohort = synth_cohort("abut", 4, "--team a=dilate:1 --team b=erode:1");
  const auto manifest = (cohort / "manifest.json").string();
  const auto out = cohort.parent_path() / "out";
  REQUIRE(run("abutment -m \"" + manifest + "\" --channel brain -o \"" + out.string() +
              "\"") == 0);
  const auto rows = csv_rows(out / "abutment.csv");
  CHECK(rows.size() == 4);
  const auto doc = json::parse(slurp(out / "abutment.json"));
  CHECK(doc.contains("summary"));
  CHECK(run("abutment -m \"" + manifest + "\" --channel t1c -o \"" + out.string() + "\"") ==
        2);

  REQUIRE(run("evaluate -m \"" + manifest + "\" -o \"" + out.string() + "\"") == 0);
  REQUIRE(run("stats \"" + (out / "metrics.csv").string() + "\" --window 2 -o \"" +
              out.string() + "\"") == 0);
  const auto summary = csv_rows(out / "summary.csv");
  CHECK(summary.size() > 0);
  CHECK(fs::exists(out / "curves.csv"));
  const auto dist = json::parse(slurp(out / "distribution.json"));
  CHECK(dist["quartile_method"] == "linear-inclusive");
  CHECK(run("stats \"" + (out / "metrics.csv").string() + "\" --window 99 -o \"" +
            out.string() + "\"") == 2);
}
