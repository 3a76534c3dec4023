/**
 * @file lesioneval_cli.cpp
 * @brief Command-line front end over the C API.
 *
 * Subcommands: evaluate, rank, abutment, stats, synth. Settings are layered
 * as built-in defaults, then manifest overrides, then the --config file, then
 * command-line flags.
 */
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "lesioneval/lesioneval.h"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

class CliError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void check(le_status status, const std::string &context) {
  if (status != LE_OK)
    throw CliError(context + ": " + le_status_string(status) + ": " + le_last_error());
}

struct VolumeDeleter {
  void operator()(le_volume *v) const { le_volume_destroy(v); }
};
struct ConfigDeleter {
  void operator()(le_config *c) const { le_config_destroy(c); }
};
struct ResultDeleter {
  void operator()(le_case_result *r) const { le_case_result_destroy(r); }
};
struct RankingDeleter {
  void operator()(le_ranking *r) const { le_ranking_destroy(r); }
};
struct PhantomDeleter {
  void operator()(le_phantom *p) const { le_phantom_destroy(p); }
};
using VolumePtr = std::unique_ptr<le_volume, VolumeDeleter>;
using ConfigPtr = std::unique_ptr<le_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<le_case_result, ResultDeleter>;
using RankingPtr = std::unique_ptr<le_ranking, RankingDeleter>;
using PhantomPtr = std::unique_ptr<le_phantom, PhantomDeleter>;

std::string take_string(char *s) {
  std::string out = s ? s : "";
  le_string_free(s);
  return out;
}

const char *kRegionNames[3] = {"ET", "TC", "WT"};

le_region region_from_name(const std::string &name) {
  for (int r = 0; r < 3; ++r)
    if (name == kRegionNames[r])
      return static_cast<le_region>(r);
  throw CliError("unknown region '" + name + "'");
}

// Shortest round-trip representation, identical to the JSON serializer's.
std::string fmt_full(double v) {
  if (!std::isfinite(v))
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

double parse_double(const std::string &s, const std::string &what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw CliError("invalid number '" + s + "' for " + what);
  }
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    out.push_back(item);
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw CliError("cannot write " + path.string());
  out << text;
  if (!out)
    throw CliError("write failed for " + path.string());
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CliError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- settings ---------------------------------------------------------------

struct Settings {
  std::optional<std::array<std::int32_t, 3>> label_map;
  std::optional<std::size_t> min_lesion_voxels;
  std::optional<double> hd_penalty;
  std::optional<double> dice_penalty;
  std::optional<double> hd_percentile;
  std::optional<bool> exclude_filtered_from_global;
  std::optional<bool> roi_restricted;
  std::optional<std::string> lesion_parent;
  std::optional<std::string> rank_mode;
  std::optional<int> adjacency;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<bool> skip_missing;

  void merge(const Settings &o) {
    auto take = [](auto &dst, const auto &src) {
      if (src)
        dst = src;
    };
    take(label_map, o.label_map);
    take(min_lesion_voxels, o.min_lesion_voxels);
    take(hd_penalty, o.hd_penalty);
    take(dice_penalty, o.dice_penalty);
    take(hd_percentile, o.hd_percentile);
    take(exclude_filtered_from_global, o.exclude_filtered_from_global);
    take(roi_restricted, o.roi_restricted);
    take(lesion_parent, o.lesion_parent);
    take(rank_mode, o.rank_mode);
    take(adjacency, o.adjacency);
    take(jobs, o.jobs);
    take(seed, o.seed);
    take(format, o.format);
    take(skip_missing, o.skip_missing);
  }
};

std::array<std::int32_t, 3> parse_label_map(const std::string &text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3)
    throw CliError("label map must be E,N,S, got '" + text + "'");
  std::array<std::int32_t, 3> out{};
  for (int i = 0; i < 3; ++i)
    out[i] = static_cast<std::int32_t>(parse_double(parts[i], "label map"));
  return out;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

// Keys shared by the manifest "config" object and the --config file.
Settings settings_from_json(const json &obj, const std::string &origin) {
  Settings s;
  try {
    for (const auto &item : obj.items()) {
      const std::string key = normalize_key(item.key());
      const json &v = item.value();
      if (key == "label_map") {
        if (v.is_string())
          s.label_map = parse_label_map(v.get<std::string>());
        else
          s.label_map = v.get<std::array<std::int32_t, 3>>();
      } else if (key == "min_lesion_voxels") {
        s.min_lesion_voxels = v.get<std::size_t>();
      } else if (key == "hd_penalty") {
        s.hd_penalty = v.get<double>();
      } else if (key == "dice_penalty") {
        s.dice_penalty = v.get<double>();
      } else if (key == "hd_percentile") {
        s.hd_percentile = v.get<double>();
      } else if (key == "exclude_filtered_from_global") {
        s.exclude_filtered_from_global = v.get<bool>();
      } else if (key == "roi_restricted") {
        s.roi_restricted = v.get<bool>();
      } else if (key == "lesion_parent") {
        s.lesion_parent = v.get<std::string>();
      } else if (key == "rank_mode") {
        s.rank_mode = v.get<std::string>();
      } else if (key == "adjacency") {
        s.adjacency = v.get<int>();
      } else if (key == "jobs") {
        s.jobs = v.get<std::size_t>();
      } else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "format") {
        s.format = v.get<std::string>();
      } else if (key == "skip_missing") {
        s.skip_missing = v.get<bool>();
      } else {
        throw CliError(origin + ": unknown setting '" + item.key() + "'");
      }
    }
  } catch (const json::exception &e) {
    throw CliError(origin + ": " + e.what());
  }
  return s;
}

// TOML-style "key = value" lines. Values are JSON scalars or arrays; bare
// words are read as strings. Tables are not supported.
Settings load_config_file(const fs::path &path) {
  std::istringstream in(read_text(path));
  json obj = json::object();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"')
        quoted = !quoted;
      else if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos)
      continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (line[first] == '[')
      throw CliError(where + ": tables are not supported");
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliError(where + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw CliError(where + ": expected key = value");
    json parsed = json::parse(value, nullptr, false);
    obj[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  return settings_from_json(obj, path.string());
}

struct SharedFlags {
  std::string config;
  std::string label_map;
  std::size_t min_lesion_voxels = 0;
  double hd_penalty = 0.0;
  double dice_penalty = 0.0;
  double hd_percentile = 0.0;
  bool include_filtered = false;
  bool roi_restricted = false;
  std::string lesion_parent;
  std::string rank_mode;
  int adjacency = 0;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format;
  bool skip_missing = false;
  std::map<std::string, CLI::Option *> opts;

  void attach(CLI::App *app) {
    opts["config"] = app->add_option("--config", config, "Key = value settings file");
    opts["label_map"] =
        app->add_option("--label-map", label_map, "Label codes E,N,S (default 3,1,2)");
    opts["min_lesion_voxels"] = app->add_option(
        "--min-lesion-voxels", min_lesion_voxels, "Smallest retained lesion (default 50)");
    opts["hd_penalty"] =
        app->add_option("--hd-penalty", hd_penalty, "HD95 for FN/FP lesions in mm (default 374)");
    opts["dice_penalty"] =
        app->add_option("--dice-penalty", dice_penalty, "Dice for FN/FP lesions (default 0)");
    opts["hd_percentile"] = app->add_option("--hd-percentile", hd_percentile,
                                            "Hausdorff percentile in (0,1] (default 0.95)");
    opts["include_filtered"] =
        app->add_flag("--include-filtered-in-global", include_filtered,
                      "Keep sub-threshold lesions in the global ground truth");
    opts["roi_restricted"] = app->add_flag(
        "--roi-restricted", roi_restricted,
        "Restrict per-lesion metrics to the dilated lesion neighbourhood");
    opts["lesion_parent"] =
        app->add_option("--lesion-parent", lesion_parent, "Lesion grouping: region or wt")
            ->check(CLI::IsMember({"region", "wt"}));
    opts["rank_mode"] =
        app->add_option("--rank-mode", rank_mode, "aggregate or per-case")
            ->check(CLI::IsMember({"aggregate", "per-case"}));
    opts["adjacency"] = app->add_option("--adjacency", adjacency, "6 or 26 (abutment)")
                            ->check(CLI::IsMember({6, 26}));
    opts["jobs"] = app->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)");
    opts["seed"] = app->add_option("--seed", seed, "Random seed");
    opts["out"] = app->add_option("--out,-o", out, "Output directory");
    opts["format"] = app->add_option("--format", format, "csv, json or both")
                         ->check(CLI::IsMember({"csv", "json", "both"}));
    opts["skip_missing"] = app->add_flag(
        "--skip-missing", skip_missing, "Score missing predictions as all background");
  }

  bool given(const char *name) const { return opts.at(name)->count() > 0; }

  Settings as_settings() const {
    Settings s;
    if (given("label_map"))
      s.label_map = parse_label_map(label_map);
    if (given("min_lesion_voxels"))
      s.min_lesion_voxels = min_lesion_voxels;
    if (given("hd_penalty"))
      s.hd_penalty = hd_penalty;
    if (given("dice_penalty"))
      s.dice_penalty = dice_penalty;
    if (given("hd_percentile"))
      s.hd_percentile = hd_percentile;
    if (given("include_filtered"))
      s.exclude_filtered_from_global = false;
    if (given("roi_restricted"))
      s.roi_restricted = true;
    if (given("lesion_parent"))
      s.lesion_parent = lesion_parent;
    if (given("rank_mode"))
      s.rank_mode = rank_mode;
    if (given("adjacency"))
      s.adjacency = adjacency;
    if (given("jobs"))
      s.jobs = jobs;
    if (given("seed"))
      s.seed = seed;
    if (given("format"))
      s.format = format;
    if (given("skip_missing"))
      s.skip_missing = true;
    return s;
  }

  /// base (e.g. manifest) <- config file <- flags
  Settings resolve(const Settings &base = {}) const {
    Settings s = base;
    if (!config.empty())
      s.merge(load_config_file(config));
    s.merge(as_settings());
    return s;
  }
};

ConfigPtr make_config(const Settings &s) {
  le_config *raw = nullptr;
  check(le_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (s.label_map)
    check(le_config_set_label_map(cfg.get(), (*s.label_map)[0], (*s.label_map)[1],
                                  (*s.label_map)[2]),
          "label map");
  if (s.min_lesion_voxels)
    check(le_config_set_min_lesion_voxels(cfg.get(), *s.min_lesion_voxels),
          "min lesion voxels");
  if (s.hd_penalty)
    check(le_config_set_hd_penalty(cfg.get(), *s.hd_penalty), "hd penalty");
  if (s.dice_penalty)
    check(le_config_set_dice_penalty(cfg.get(), *s.dice_penalty), "dice penalty");
  if (s.hd_percentile)
    check(le_config_set_hd_percentile(cfg.get(), *s.hd_percentile), "hd percentile");
  if (s.exclude_filtered_from_global)
    check(le_config_set_exclude_filtered_from_global(cfg.get(),
                                                     *s.exclude_filtered_from_global),
          "exclude filtered");
  if (s.roi_restricted)
    check(le_config_set_roi_restricted(cfg.get(), *s.roi_restricted), "roi restricted");
  if (s.lesion_parent) {
    if (*s.lesion_parent != "region" && *s.lesion_parent != "wt")
      throw CliError("lesion_parent must be region or wt");
    check(le_config_set_lesion_parent(cfg.get(), *s.lesion_parent == "wt"
                                                     ? LE_PARENT_WT
                                                     : LE_PARENT_REGION),
          "lesion parent");
  }
  return cfg;
}

struct Outputs {
  bool csv = true;
  bool json = true;
};

Outputs outputs_for(const Settings &s) {
  const std::string f = s.format.value_or("both");
  if (f != "csv" && f != "json" && f != "both")
    throw CliError("format must be csv, json or both");
  return {f != "json", f != "csv"};
}

std::size_t worker_count(const Settings &s, std::size_t tasks) {
  std::size_t n = s.jobs.value_or(1);
  if (n == 0)
    n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, tasks));
}

/// Runs body(i) for i in [0, n) on a bounded pool. Exceptions are rethrown
/// after all workers stop.
template <typename F> void parallel_for(std::size_t n, std::size_t workers, F &&body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(run);
    for (auto &t : pool)
      t.join();
  }
  if (failure)
    std::rethrow_exception(failure);
}

fs::path prepare_out_dir(const std::string &dir) {
  fs::path out(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw CliError("cannot create " + out.string() + ": " + ec.message());
  return out;
}

// ---- manifest ---------------------------------------------------------------

struct CaseEntry {
  std::string id;
  fs::path gt;
  std::map<std::string, fs::path> predictions;
  std::map<std::string, fs::path> channels;
};

struct Manifest {
  std::vector<CaseEntry> cases;
  std::vector<std::string> teams; // sorted
  Settings settings;
};

void require_name(const std::string &name, const std::string &what) {
  if (name.empty() || name.find_first_of(",\"\n\r") != std::string::npos)
    throw CliError(what + " '" + name + "' must be non-empty without commas or quotes");
}

Manifest load_manifest(const fs::path &path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception &e) {
    throw CliError(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const json &v) {
    fs::path p(v.get<std::string>());
    return p.is_absolute() ? p : base / p;
  };
  Manifest m;
  std::set<std::string> ids, teams;
  try {
    if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array())
      throw CliError(path.string() + ": manifest needs a \"cases\" array");
    for (const auto &item : j.items()) {
      const auto &k = item.key();
      if (k != "cases" && k != "teams" && k != "label_map" && k != "config")
        throw CliError(path.string() + ": unknown manifest key '" + k + "'");
    }
    if (j.contains("config"))
      m.settings = settings_from_json(j["config"], path.string() + " config");
    if (j.contains("label_map"))
      m.settings.merge(settings_from_json({{"label_map", j["label_map"]}}, path.string()));
    if (j.contains("teams"))
      for (const auto &t : j["teams"]) {
        require_name(t.get<std::string>(), "team");
        teams.insert(t.get<std::string>());
      }
    for (const auto &c : j["cases"]) {
      CaseEntry e;
      e.id = c.at("id").get<std::string>();
      require_name(e.id, "case id");
      if (!ids.insert(e.id).second)
        throw CliError(path.string() + ": duplicate case id '" + e.id + "'");
      e.gt = resolve(c.at("gt"));
      if (c.contains("predictions"))
        for (const auto &p : c["predictions"].items()) {
          require_name(p.key(), "team");
          teams.insert(p.key());
          e.predictions[p.key()] = resolve(p.value());
        }
      if (c.contains("channel"))
        e.channels["default"] = resolve(c["channel"]);
      if (c.contains("channels")) {
        if (c["channels"].is_object()) {
          for (const auto &ch : c["channels"].items())
            e.channels[ch.key()] = resolve(ch.value());
        } else {
          throw CliError(path.string() + ": \"channels\" must map names to paths");
        }
      }
      m.cases.push_back(std::move(e));
    }
  } catch (const json::exception &e) {
    throw CliError(path.string() + ": " + e.what());
  }
  m.teams.assign(teams.begin(), teams.end());
  return m;
}

std::string status_name(le_status s) {
  std::string name = le_status_string(s);
  std::replace(name.begin(), name.end(), ' ', '_');
  return name;
}

// ---- evaluate ---------------------------------------------------------------

const char *kCsvHeader = "team,case,region,metric,value,tp,fn,fp\n";

struct RegionOutcome {
  le_region_metrics metrics{};
  std::vector<le_lesion_metrics> lesions;
  std::vector<std::pair<std::uint32_t, std::size_t>> excluded;
};

struct TeamCaseOutcome {
  bool ok = false;
  bool missing = false;
  std::string error_code;
  std::string error;
  std::array<RegionOutcome, 3> regions;
};

TeamCaseOutcome collect(const le_case_result *r) {
  TeamCaseOutcome o;
  o.ok = true;
  for (int k = 0; k < 3; ++k) {
    auto &reg = o.regions[k];
    const auto region = static_cast<le_region>(k);
    check(le_case_result_region(r, region, &reg.metrics), "result");
    for (std::size_t i = 0; i < reg.metrics.lesion_count; ++i) {
      le_lesion_metrics lm{};
      check(le_case_result_lesion(r, region, i, &lm), "result");
      reg.lesions.push_back(lm);
    }
    for (std::size_t i = 0; i < reg.metrics.excluded_count; ++i) {
      std::uint32_t id = 0;
      std::size_t voxels = 0;
      check(le_case_result_excluded(r, region, i, &id, &voxels), "result");
      reg.excluded.emplace_back(id, voxels);
    }
  }
  return o;
}

TeamCaseOutcome failure(le_status s, const std::string &what) {
  TeamCaseOutcome o;
  o.error_code = status_name(s);
  o.error = what + ": " + le_last_error();
  return o;
}

int cmd_evaluate(const std::string &manifest_path, const SharedFlags &flags) {
  const Manifest manifest = load_manifest(manifest_path);
  const Settings settings = flags.resolve(manifest.settings);
  const ConfigPtr cfg = make_config(settings);
  const Outputs outputs = outputs_for(settings);
  const bool skip_missing = settings.skip_missing.value_or(false);
  const auto &teams = manifest.teams;
  const auto &cases = manifest.cases;

  std::vector<std::vector<TeamCaseOutcome>> grid(cases.size(),
                                                 std::vector<TeamCaseOutcome>(teams.size()));
  parallel_for(cases.size(), worker_count(settings, cases.size()), [&](std::size_t ci) {
    const CaseEntry &c = cases[ci];
    auto &row = grid[ci];
    le_volume *gt_raw = nullptr;
    const le_status gs = le_volume_load_labels(c.gt.string().c_str(), &gt_raw);
    if (gs != LE_OK) {
      const auto f = failure(gs, "ground truth " + c.gt.string());
      std::fill(row.begin(), row.end(), f);
      return;
    }
    VolumePtr gt(gt_raw);
    for (std::size_t ti = 0; ti < teams.size(); ++ti) {
      const auto it = c.predictions.find(teams[ti]);
      const bool absent = it == c.predictions.end() || !fs::exists(it->second);
      VolumePtr pred;
      if (absent) {
        if (!skip_missing) {
          row[ti].error_code = "missing_prediction";
          row[ti].error = it == c.predictions.end()
                              ? "no prediction listed"
                              : "prediction not found: " + it->second.string();
          continue;
        }
      } else {
        le_volume *p = nullptr;
        const le_status ps = le_volume_load_labels(it->second.string().c_str(), &p);
        if (ps != LE_OK) {
          row[ti] = failure(ps, "prediction " + it->second.string());
          continue;
        }
        pred.reset(p);
      }
      le_case_result *res = nullptr;
      const le_status es = le_evaluate_case(gt.get(), pred.get(), cfg.get(), &res);
      if (es != LE_OK) {
        row[ti] = failure(es, "evaluation");
        continue;
      }
      ResultPtr result(res);
      row[ti] = collect(result.get());
      row[ti].missing = absent;
    }
  });

  bool any_error = false, any_missing = false;
  std::string csv = kCsvHeader;
  ordered_json records = ordered_json::array();
  ordered_json errors = ordered_json::array();
  for (std::size_t ti = 0; ti < teams.size(); ++ti) {
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
      const auto &o = grid[ci][ti];
      const std::string prefix = teams[ti] + "," + cases[ci].id + ",";
      if (!o.ok) {
        any_error = true;
        csv += prefix + ",error," + csv_field(o.error_code) + ",,,\n";
        errors.push_back({{"team", teams[ti]},
                          {"case", cases[ci].id},
                          {"code", o.error_code},
                          {"message", o.error}});
        std::cerr << "error: " << teams[ti] << "/" << cases[ci].id << ": " << o.error
                  << "\n";
        continue;
      }
      any_missing = any_missing || o.missing;
      for (int k = 0; k < 3; ++k) {
        const auto &m = o.regions[k].metrics;
        const std::string counts = "," + std::to_string(m.tp) + "," +
                                   std::to_string(m.fn) + "," + std::to_string(m.fp) + "\n";
        auto row = [&](const char *metric, const std::string &value) {
          csv += prefix + kRegionNames[k] + "," + metric + "," + value + counts;
        };
        row("lesionwise_dice", fmt_full(m.lesionwise_dice));
        row("lesionwise_hd95", fmt_full(m.lesionwise_hd95));
        row("global_dice", fmt_full(m.global_dice));
        row("global_hd95", fmt_full(m.global_hd95));
        row("sensitivity", m.has_sensitivity ? fmt_full(m.sensitivity) : "NA");
        row("gt_volume_mm3", fmt_full(m.gt_volume_mm3));

        ordered_json lesions = ordered_json::array();
        for (const auto &l : o.regions[k].lesions)
          lesions.push_back({{"gt_lesion", l.gt_lesion},
                             {"dice", l.dice},
                             {"hd95", l.hd95},
                             {"gt_voxels", l.gt_voxels},
                             {"pred_voxels", l.pred_voxels},
                             {"detected", l.detected != 0}});
        ordered_json excluded = ordered_json::array();
        for (const auto &[id, voxels] : o.regions[k].excluded)
          excluded.push_back({{"gt_lesion", id}, {"voxels", voxels}});
        records.push_back(
            {{"team", teams[ti]},
             {"case", cases[ci].id},
             {"region", kRegionNames[k]},
             {"lesionwise_dice", m.lesionwise_dice},
             {"lesionwise_hd95", m.lesionwise_hd95},
             {"global_dice", m.global_dice},
             {"global_hd95", m.global_hd95},
             {"sensitivity",
              m.has_sensitivity ? ordered_json(m.sensitivity) : ordered_json(nullptr)},
             {"gt_volume_mm3", m.gt_volume_mm3},
             {"tp", m.tp},
             {"fn", m.fn},
             {"fp", m.fp},
             {"ignored_components", m.ignored},
             {"gt_region_voxels", m.gt_region_voxels},
             {"gt_voxels", m.gt_voxels},
             {"pred_voxels", m.pred_voxels},
             {"missing_prediction", o.missing},
             {"lesions", lesions},
             {"excluded_lesions", excluded}});
      }
    }
  }

  const fs::path out = prepare_out_dir(flags.out);
  if (outputs.csv)
    write_text(out / "metrics.csv", csv);
  if (outputs.json) {
    char *cfg_json = nullptr;
    check(le_config_describe_json(cfg.get(), &cfg_json), "config");
    ordered_json doc = {
        {"version", le_version()},
        {"config", json::parse(take_string(cfg_json))},
        {"conventions",
         {{"empty_pair_dice", 1.0},
          {"empty_pair_hd95", 0.0},
          {"sensitivity_absent", "ground truth empty, prediction non-empty"},
          {"missing_prediction", skip_missing ? "scored as all background" : "error"}}},
        {"teams", teams},
        {"records", records},
        {"errors", errors}};
    ordered_json case_ids = ordered_json::array();
    for (const auto &c : cases)
      case_ids.push_back(c.id);
    doc["cases"] = case_ids;
    write_text(out / "metrics.json", doc.dump(2) + "\n");
  }
  if (any_error)
    return kExitInput;
  return any_missing ? kExitPartial : kExitOk;
}

// ---- metrics file reading ---------------------------------------------------

struct MetricRow {
  std::string team;
  std::string case_id;
  std::string region;
  std::map<std::string, std::optional<double>> values;
};

/// Reads evaluate output (CSV or JSON) keyed by (team, case, region).
std::vector<MetricRow> read_metrics(const std::vector<std::string> &paths) {
  std::map<std::tuple<std::string, std::string, std::string>, MetricRow> rows;
  auto slot = [&](const std::string &t, const std::string &c,
                  const std::string &r) -> MetricRow & {
    region_from_name(r);
    auto &row = rows[{t, c, r}];
    row.team = t;
    row.case_id = c;
    row.region = r;
    return row;
  };
  for (const auto &p : paths) {
    const std::string text = read_text(p);
    if (fs::path(p).extension() == ".json") {
      try {
        const json doc = json::parse(text);
        for (const auto &rec : doc.at("records")) {
          auto &row = slot(rec.at("team"), rec.at("case"), rec.at("region"));
          for (const char *key : {"lesionwise_dice", "lesionwise_hd95", "global_dice",
                                  "global_hd95", "sensitivity", "gt_volume_mm3"}) {
            if (!rec.contains(key) || rec[key].is_null())
              row.values[key] = std::nullopt;
            else
              row.values[key] = rec[key].get<double>();
          }
        }
      } catch (const json::exception &e) {
        throw CliError(p + ": " + e.what());
      }
      continue;
    }
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line + "\n" != kCsvHeader)
      throw CliError(p + ": expected header " + std::string(kCsvHeader, strlen(kCsvHeader) - 1));
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty())
        continue;
      const auto f = split_csv_line(line);
      if (f.size() != 8)
        throw CliError(p + ":" + std::to_string(lineno) + ": expected 8 fields");
      if (f[3] == "error")
        continue;
      auto &row = slot(f[0], f[1], f[2]);
      row.values[f[3]] = f[4] == "NA" ? std::nullopt
                                      : std::optional(parse_double(f[4], p + ":" +
                                                                             std::to_string(lineno)));
    }
  }
  std::vector<MetricRow> out;
  for (auto &[key, row] : rows)
    out.push_back(std::move(row));
  return out;
}

std::vector<le_team_record> to_team_records(const std::vector<MetricRow> &rows) {
  std::vector<le_team_record> recs;
  for (const auto &r : rows) {
    const auto d = r.values.find("lesionwise_dice");
    const auto h = r.values.find("lesionwise_hd95");
    if (d == r.values.end() || h == r.values.end() || !d->second || !h->second)
      continue;
    recs.push_back({r.team.c_str(), r.case_id.c_str(), region_from_name(r.region),
                    *d->second, *h->second});
  }
  return recs;
}

// ---- rank -------------------------------------------------------------------

RankingPtr ranking_from_aggregate_file(const std::string &path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line))
    throw CliError(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() != 1 + LE_RANK_COLUMNS || header[0] != "team")
    throw CliError(path + ": expected header team,ET_DSC,TC_DSC,WT_DSC,ET_HD95,TC_HD95,WT_HD95");
  std::array<std::size_t, LE_RANK_COLUMNS> column_of{};
  for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c) {
    const auto it = std::find(header.begin() + 1, header.end(), le_rank_column_name(c));
    if (it == header.end())
      throw CliError(path + ": missing column " + le_rank_column_name(c));
    column_of[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> teams;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw CliError(path + ": ragged row '" + line + "'");
    teams.push_back(f[0]);
    for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c)
      values.push_back(parse_double(f[column_of[c]], path));
  }
  std::vector<const char *> names;
  for (const auto &t : teams)
    names.push_back(t.c_str());
  le_ranking *raw = nullptr;
  check(le_ranking_from_aggregates(names.data(), values.data(), teams.size(), &raw),
        "ranking");
  return RankingPtr(raw);
}

int cmd_rank(const std::vector<std::string> &metric_files, const std::string &aggregates,
             const SharedFlags &flags) {
  const Settings settings = flags.resolve();
  const Outputs outputs = outputs_for(settings);
  const std::string mode_name = settings.rank_mode.value_or("aggregate");
  if (mode_name != "aggregate" && mode_name != "per-case")
    throw CliError("rank_mode must be aggregate or per-case");
  if (metric_files.empty() == aggregates.empty())
    throw CliError("give either metrics files or --aggregates");

  RankingPtr ranking;
  std::string mode_label = mode_name;
  if (!aggregates.empty()) {
    ranking = ranking_from_aggregate_file(aggregates);
    mode_label = "aggregate";
  } else {
    const auto rows = read_metrics(metric_files);
    const auto recs = to_team_records(rows);
    le_ranking *raw = nullptr;
    check(le_ranking_build(recs.data(), recs.size(),
                           mode_name == "per-case" ? LE_RANK_PER_CASE : LE_RANK_AGGREGATE,
                           &raw),
          "ranking");
    ranking.reset(raw);
  }

  std::string csv = "position,team,score,tied";
  for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c)
    csv += std::string(",") + le_rank_column_name(c);
  for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c)
    csv += std::string(",rank_") + le_rank_column_name(c);
  csv += "\n";
  ordered_json board = ordered_json::array();
  const std::size_t n = le_ranking_team_count(ranking.get());
  for (std::size_t i = 0; i < n; ++i) {
    le_standing s{};
    check(le_ranking_standing(ranking.get(), i, &s), "ranking");
    csv += std::to_string(i + 1) + "," + s.team + "," + fmt_fixed(s.score, 4) + "," +
           (s.tied ? "true" : "false");
    ordered_json aggs = ordered_json::object(), ranks = ordered_json::object();
    for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c) {
      csv += "," + fmt_fixed(s.aggregates[c], 4);
      aggs[le_rank_column_name(c)] = std::stod(fmt_fixed(s.aggregates[c], 4));
    }
    for (std::size_t c = 0; c < LE_RANK_COLUMNS; ++c) {
      csv += "," + fmt_fixed(s.ranks[c], 4);
      ranks[le_rank_column_name(c)] = std::stod(fmt_fixed(s.ranks[c], 4));
    }
    csv += "\n";
    board.push_back({{"position", i + 1},
                     {"team", s.team},
                     {"score", fmt_fixed(s.score, 4)},
                     {"tied", s.tied != 0},
                     {"aggregates", aggs},
                     {"ranks", ranks}});
    std::cout << i + 1 << "\t" << s.team << "\t" << fmt_fixed(s.score, 2)
              << (s.tied ? "\t(tied)" : "") << "\n";
  }
  const fs::path out = prepare_out_dir(flags.out);
  if (outputs.csv)
    write_text(out / "leaderboard.csv", csv);
  if (outputs.json) {
    ordered_json doc = {{"rank_mode", mode_label},
                        {"precision", 4},
                        {"tie_order", "team name"},
                        {"leaderboard", board}};
    write_text(out / "leaderboard.json", doc.dump(2) + "\n");
  }
  return kExitOk;
}

// ---- abutment ---------------------------------------------------------------

int cmd_abutment(const std::string &manifest_path, const std::vector<std::string> &channels,
                 bool channel_union, const SharedFlags &flags) {
  const Manifest manifest = load_manifest(manifest_path);
  const Settings settings = flags.resolve(manifest.settings);
  const ConfigPtr cfg = make_config(settings);
  const Outputs outputs = outputs_for(settings);
  const int adjacency = settings.adjacency.value_or(6);
  if (adjacency != 6 && adjacency != 26)
    throw CliError("adjacency must be 6 or 26");
  if (channels.empty())
    throw CliError("--channel is required");
  if (channels.size() > 1 && !channel_union)
    throw CliError("several --channel values need --channel-union");
  const auto &cases = manifest.cases;

  struct Outcome {
    bool ok = false;
    std::string error;
    le_abutment report{};
  };
  std::vector<Outcome> results(cases.size());
  parallel_for(cases.size(), worker_count(settings, cases.size()), [&](std::size_t ci) {
    const CaseEntry &c = cases[ci];
    Outcome &o = results[ci];
    le_volume *raw = nullptr;
    if (le_volume_load_labels(c.gt.string().c_str(), &raw) != LE_OK) {
      o.error = std::string("ground truth: ") + le_last_error();
      return;
    }
    VolumePtr tumor(raw);
    std::vector<VolumePtr> loaded;
    for (const auto &name : channels) {
      const auto it = c.channels.find(name);
      if (it == c.channels.end() || !fs::exists(it->second)) {
        o.error = "missing channel '" + name + "'";
        return;
      }
      if (le_volume_load_intensity(it->second.string().c_str(), &raw) != LE_OK) {
        o.error = "channel '" + name + "': " + le_last_error();
        return;
      }
      loaded.emplace_back(raw);
    }
    std::vector<const le_volume *> ptrs;
    for (const auto &v : loaded)
      ptrs.push_back(v.get());
    if (le_count_abutting(tumor.get(), ptrs.data(), ptrs.size(), cfg.get(), adjacency,
                          &o.report) != LE_OK) {
      o.error = le_last_error();
      return;
    }
    o.ok = true;
  });

  bool any_error = false;
  std::vector<le_abutment> good;
  std::string csv = "case,abutting_voxels,abutting_enhancing,abutting_nonenhancing,"
                    "abutting_snfh,wt_voxels,wt_volume_mm3,error\n";
  ordered_json rows = ordered_json::array();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto &o = results[ci];
    if (!o.ok) {
      any_error = true;
      csv += cases[ci].id + ",,,,,,," + csv_field(o.error) + "\n";
      rows.push_back({{"case", cases[ci].id}, {"error", o.error}});
      std::cerr << "error: " << cases[ci].id << ": " << o.error << "\n";
      continue;
    }
    const auto &r = o.report;
    good.push_back(r);
    csv += cases[ci].id + "," + std::to_string(r.abutting_voxels) + "," +
           std::to_string(r.abutting_enhancing) + "," +
           std::to_string(r.abutting_nonenhancing) + "," + std::to_string(r.abutting_snfh) +
           "," + std::to_string(r.wt_voxels) + "," + fmt_full(r.wt_volume_mm3) + ",\n";
    rows.push_back({{"case", cases[ci].id},
                    {"abutting_voxels", r.abutting_voxels},
                    {"abutting_enhancing", r.abutting_enhancing},
                    {"abutting_nonenhancing", r.abutting_nonenhancing},
                    {"abutting_snfh", r.abutting_snfh},
                    {"wt_voxels", r.wt_voxels},
                    {"wt_volume_mm3", r.wt_volume_mm3}});
  }

  ordered_json summary = nullptr;
  if (!good.empty()) {
    le_abutment_summary s{};
    check(le_abutment_summarize(good.data(), good.size(), &s), "summary");
    summary = {{"cases", s.cases},
               {"cases_with_abutment", s.cases_with_abutment},
               {"fraction", s.fraction},
               {"mean", s.has_mean ? ordered_json(s.mean) : ordered_json(nullptr)},
               {"median", s.has_mean ? ordered_json(s.median) : ordered_json(nullptr)}};
    std::cout << "cases with abutment: " << s.cases_with_abutment << "/" << s.cases << " ("
              << fmt_fixed(100.0 * s.fraction, 1) << "%)\n";
  }
  auto correlation = [&](int log_volume) -> ordered_json {
    le_correlation c{};
    const le_status st = le_abutment_correlate(good.data(), good.size(), log_volume, &c);
    if (st != LE_OK)
      return {{"error", le_last_error()}};
    return {{"r", c.r}, {"r_squared", c.r_squared}, {"p_value", c.p_value}, {"n", c.n}};
  };

  const fs::path out = prepare_out_dir(flags.out);
  if (outputs.csv)
    write_text(out / "abutment.csv", csv);
  if (outputs.json) {
    ordered_json doc = {{"adjacency", adjacency},
                        {"channels", channels},
                        {"brain_mask", "nonzero voxels of the union of the channels"},
                        {"cases", rows},
                        {"summary", summary},
                        {"correlation",
                         {{"abutting_vs_wt_voxels", correlation(0)},
                          {"abutting_vs_log10_wt_volume", correlation(1)}}}};
    write_text(out / "abutment.json", doc.dump(2) + "\n");
  }
  return any_error ? kExitInput : kExitOk;
}

// ---- stats ------------------------------------------------------------------

ordered_json summary_json(const le_summary &s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"std", s.has_std ? ordered_json(s.std) : ordered_json(nullptr)},
          {"median", s.median},
          {"q1", s.q1},
          {"q3", s.q3},
          {"min", s.min},
          {"max", s.max}};
}

int cmd_stats(const std::vector<std::string> &metric_files, std::size_t window_flag,
              const SharedFlags &flags) {
  const Settings settings = flags.resolve();
  const Outputs outputs = outputs_for(settings);
  const auto rows = read_metrics(metric_files);
  const std::vector<std::string> metrics = {"lesionwise_dice", "lesionwise_hd95",
                                            "global_dice", "global_hd95", "sensitivity"};
  const std::vector<std::string> curve_metrics = {"global_dice", "global_hd95",
                                                  "sensitivity"};

  // (team, region) -> rows in case order
  std::map<std::pair<std::string, std::string>, std::vector<const MetricRow *>> groups;
  for (const auto &r : rows)
    groups[{r.team, r.region}].push_back(&r);

  std::string summary_csv = "team,region,metric,n,mean,std,median,q1,q3,min,max\n";
  std::string curves_csv = "team,region,metric,window,point,volume_mm3,value\n";
  ordered_json summaries = ordered_json::array();
  ordered_json curves = ordered_json::array();
  ordered_json correlations = ordered_json::array();
  for (const auto &[key, members] : groups) {
    const auto &[team, region] = key;
    for (const auto &metric : metrics) {
      std::vector<double> values, volumes;
      for (const MetricRow *r : members) {
        const auto it = r->values.find(metric);
        if (it == r->values.end() || !it->second)
          continue;
        values.push_back(*it->second);
        const auto v = r->values.find("gt_volume_mm3");
        volumes.push_back(v != r->values.end() && v->second ? *v->second : NAN);
      }
      if (values.empty())
        continue;
      le_summary s{};
      check(le_summarize(values.data(), values.size(), &s), "summary");
      summary_csv += team + "," + region + "," + metric + "," + std::to_string(s.n) + "," +
                     fmt_full(s.mean) + "," + (s.has_std ? fmt_full(s.std) : "NA") + "," +
                     fmt_full(s.median) + "," + fmt_full(s.q1) + "," + fmt_full(s.q3) + "," +
                     fmt_full(s.min) + "," + fmt_full(s.max) + "\n";
      summaries.push_back(
          {{"team", team}, {"region", region}, {"metric", metric}, {"summary", summary_json(s)}});

      if (std::find(curve_metrics.begin(), curve_metrics.end(), metric) == curve_metrics.end())
        continue;
      if (std::any_of(volumes.begin(), volumes.end(), [](double v) { return std::isnan(v); }))
        continue;
      if (window_flag > values.size())
        throw CliError("window " + std::to_string(window_flag) + " exceeds the " +
                       std::to_string(values.size()) + " values of " + team + "/" + region +
                       "/" + metric);
      const std::size_t window = window_flag ? window_flag : le_default_window(values.size());
      std::vector<double> xs(values.size() - window + 1), ys(xs.size());
      check(le_sliding_window(volumes.data(), values.data(), values.size(), window, xs.data(),
                              ys.data()),
            "sliding window");
      ordered_json points = ordered_json::array();
      for (std::size_t k = 0; k < xs.size(); ++k) {
        curves_csv += team + "," + region + "," + metric + "," + std::to_string(window) + "," +
                      std::to_string(k) + "," + fmt_full(xs[k]) + "," + fmt_full(ys[k]) + "\n";
        points.push_back({xs[k], ys[k]});
      }
      curves.push_back({{"team", team},
                        {"region", region},
                        {"metric", metric},
                        {"window", window},
                        {"points", points}});
      le_correlation c{};
      ordered_json corr = {{"team", team}, {"region", region}, {"metric", metric}};
      if (le_pearson(volumes.data(), values.data(), values.size(), &c) == LE_OK) {
        corr["r"] = c.r;
        corr["r_squared"] = c.r_squared;
        corr["p_value"] = c.p_value;
        corr["n"] = c.n;
      } else {
        corr["error"] = le_last_error();
      }
      correlations.push_back(corr);
    }
  }

  const auto recs = to_team_records(rows);
  char *dist_raw = nullptr;
  check(le_distribution_export_json(recs.data(), recs.size(), &dist_raw), "distribution");
  const json distribution = json::parse(take_string(dist_raw));

  const fs::path out = prepare_out_dir(flags.out);
  if (outputs.csv) {
    write_text(out / "summary.csv", summary_csv);
    write_text(out / "curves.csv", curves_csv);
  }
  if (outputs.json) {
    ordered_json meta = {{"quartile_method", le_quartile_method()},
                         {"std_denominator", "n-1"},
                         {"curve_x", "gt_volume_mm3"},
                         {"correlation_subset", "all cases with a defined value"}};
    write_text(out / "stats.json", ordered_json({{"metadata", meta},
                                                 {"summaries", summaries},
                                                 {"curves", curves},
                                                 {"volume_correlations", correlations}})
                                           .dump(2) +
                                       "\n");
    write_text(out / "distribution.json",
               ordered_json({{"quartile_method", le_quartile_method()},
                             {"groups", distribution}})
                       .dump(2) +
                   "\n");
  }
  return kExitOk;
}

// ---- synth ------------------------------------------------------------------

struct TeamRecipe {
  std::string name;
  std::vector<std::string> steps;
};

TeamRecipe parse_team(const std::string &text) {
  const auto eq = text.find('=');
  TeamRecipe t;
  t.name = text.substr(0, eq);
  require_name(t.name, "team");
  if (eq != std::string::npos)
    for (const auto &s : split(text.substr(eq + 1), ';'))
      if (!s.empty())
        t.steps.push_back(s);
  return t;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int cmd_synth(const std::string &spec_path, std::size_t n_cases,
              const std::vector<std::string> &team_args, bool plain,
              const SharedFlags &flags) {
  const Settings settings = flags.resolve();
  const std::uint64_t seed = settings.seed.value_or(0);
  json spec = json::object();
  if (!spec_path.empty()) {
    try {
      spec = json::parse(read_text(spec_path));
    } catch (const json::exception &e) {
      throw CliError(spec_path + ": " + e.what());
    }
  }
  if (!spec.is_object())
    throw CliError("phantom spec must be a JSON object");
  std::vector<TeamRecipe> teams;
  std::set<std::string> names;
  for (const auto &t : team_args) {
    teams.push_back(parse_team(t));
    if (!names.insert(teams.back().name).second)
      throw CliError("duplicate team '" + teams.back().name + "'");
  }

  const fs::path out = prepare_out_dir(flags.out);
  const std::string ext = plain ? ".nii" : ".nii.gz";
  ordered_json manifest_cases = ordered_json::array();
  ordered_json provenance_cases = ordered_json::array();
  for (std::size_t k = 0; k < n_cases; ++k) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "case-%03zu", k);
    const std::string id = id_buf;
    json case_spec = spec;
    const std::uint64_t case_seed = mix_seed(seed, k);
    case_spec["seed"] = case_seed;
    le_phantom *raw = nullptr;
    check(le_phantom_generate(case_spec.dump().c_str(), &raw), id);
    PhantomPtr phantom(raw);

    fs::create_directories(out / id);
    le_volume *v = nullptr;
    check(le_phantom_labels(phantom.get(), &v), id);
    VolumePtr labels(v);
    check(le_volume_write(labels.get(), (out / id / ("gt" + ext)).string().c_str()), id);
    check(le_phantom_brain(phantom.get(), &v), id);
    VolumePtr brain(v);
    check(le_volume_write(brain.get(), (out / id / ("brain" + ext)).string().c_str()), id);

    ordered_json preds = ordered_json::object();
    ordered_json team_prov = ordered_json::object();
    for (std::size_t t = 0; t < teams.size(); ++t) {
      std::vector<const char *> steps;
      for (const auto &s : teams[t].steps)
        steps.push_back(s.c_str());
      char *prov = nullptr;
      check(le_phantom_perturb(phantom.get(), steps.data(), steps.size(),
                               mix_seed(case_seed, t + 1), &v, &prov),
            id + "/" + teams[t].name);
      VolumePtr pred(v);
      team_prov[teams[t].name] = json::parse(take_string(prov));
      const std::string file = "pred_" + teams[t].name + ext;
      check(le_volume_write(pred.get(), (out / id / file).string().c_str()),
            id + "/" + teams[t].name);
      preds[teams[t].name] = id + "/" + file;
    }
    char *desc = nullptr;
    check(le_phantom_describe_json(phantom.get(), &desc), id);
    provenance_cases.push_back(
        {{"case", id}, {"phantom", json::parse(take_string(desc))}, {"teams", team_prov}});
    manifest_cases.push_back({{"id", id},
                              {"gt", id + "/gt" + ext},
                              {"predictions", preds},
                              {"channels", {{"brain", id + "/brain" + ext}}}});
  }
  ordered_json team_list = ordered_json::array();
  ordered_json recipes = ordered_json::object();
  for (const auto &t : teams) {
    team_list.push_back(t.name);
    recipes[t.name] = t.steps;
  }
  ordered_json manifest = {{"teams", team_list}, {"cases", manifest_cases}};
  if (spec.contains("label_map"))
    manifest["label_map"] = spec["label_map"];
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  write_text(out / "provenance.json", ordered_json({{"seed", seed},
                                                    {"spec", spec},
                                                    {"team_steps", recipes},
                                                    {"cases", provenance_cases}})
                                              .dump(2) +
                                          "\n");
  std::cout << "wrote " << n_cases << " case(s) to " << out.string() << "\n";
  return kExitOk;
}

void print_warning(const char *message, void *) {
  std::cerr << "warning: " << message << "\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Lesion-wise evaluation of brain tumor segmentations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(le_version()));

  SharedFlags ev_flags, rank_flags, abut_flags, stats_flags, synth_flags;

  std::string ev_manifest;
  auto *evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--manifest,-m", ev_manifest, "Cohort manifest (JSON)")->required();
  ev_flags.attach(evaluate);

  std::vector<std::string> rank_inputs;
  std::string rank_aggregates;
  auto *rank = app.add_subcommand("rank", "Rank teams from evaluate output");
  rank->add_option("metrics", rank_inputs, "metrics.csv or metrics.json files");
  rank->add_option("--aggregates", rank_aggregates,
                   "CSV of per-team aggregates (team plus the six metric columns)");
  rank_flags.attach(rank);

  std::string abut_manifest;
  std::vector<std::string> abut_channels;
  bool channel_union = false;
  auto *abutment = app.add_subcommand("abutment", "Count tumor voxels at the brain edge");
  abutment->add_option("--manifest,-m", abut_manifest, "Cohort manifest (JSON)")->required();
  abutment->add_option("--channel", abut_channels,
                       "Manifest channel defining the brain extent (repeatable)")
      ->required();
  abutment->add_flag("--channel-union", channel_union,
                     "Use the union of several channels as the brain mask");
  abut_flags.attach(abutment);

  std::vector<std::string> stats_inputs;
  std::size_t window = 0;
  auto *stats = app.add_subcommand("stats", "Summary statistics and plot data");
  stats->add_option("metrics", stats_inputs, "metrics.csv or metrics.json files")->required();
  stats->add_option("--window", window, "Sliding window size (default ceil(n/10))")
      ->check(CLI::PositiveNumber);
  stats_flags.attach(stats);

  std::string synth_spec;
  std::size_t synth_cases = 1;
  std::vector<std::string> synth_teams;
  bool synth_plain = false;
  auto *synth = app.add_subcommand("synth", "Generate seeded phantom cohorts");
  synth->add_option("--spec", synth_spec, "Phantom spec (JSON)");
  synth->add_option("--cases", synth_cases, "Number of cases");
  synth->add_option("--team", synth_teams,
                    "NAME=STEP;STEP... e.g. miss=drop:0 or noisy=dilate:1;fp:3");
  synth->add_flag("--plain", synth_plain, "Write uncompressed .nii files");
  synth_flags.attach(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  le_set_warning_callback(print_warning, nullptr);
  try {
    if (*evaluate)
      return cmd_evaluate(ev_manifest, ev_flags);
    if (*rank)
      return cmd_rank(rank_inputs, rank_aggregates, rank_flags);
    if (*abutment)
      return cmd_abutment(abut_manifest, abut_channels, channel_union, abut_flags);
    if (*stats)
      return cmd_stats(stats_inputs, window, stats_flags);
    if (*synth)
      return cmd_synth(synth_spec, synth_cases, synth_teams, synth_plain, synth_flags);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
