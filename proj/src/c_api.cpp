// extern "C" surface over the core library. Every entry point converts
// exceptions into le_status codes and records the message per thread.

#include "lesioneval/lesioneval.h"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <variant>
#include <vector>

#include "lesioneval/abutment.hpp"
#include "lesioneval/metrics.hpp"
#include "lesioneval/nifti.hpp"
#include "lesioneval/phantom.hpp"
#include "lesioneval/ranking.hpp"
#include "lesioneval/stats.hpp"

using namespace lesioneval;
using nlohmann::json;

struct le_volume {
  std::variant<LabelVolume, IntensityVolume> data;
};

struct le_config {
  LabelMap labels;
  EvalConfig eval;
};

struct le_case_result {
  CaseMetrics metrics;
};

struct le_ranking {
  RankingTable table;
};

struct le_phantom {
  PhantomSpec spec;
  Phantom phantom;
};

namespace {

thread_local std::string t_last_error;

le_status to_status(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return LE_ERR_INVALID_ARGUMENT;
  case ErrorCode::Io: return LE_ERR_IO;
  case ErrorCode::Format: return LE_ERR_FORMAT;
  case ErrorCode::UnsupportedShape: return LE_ERR_UNSUPPORTED_SHAPE;
  case ErrorCode::LabelDomain: return LE_ERR_LABEL_DOMAIN;
  case ErrorCode::Geometry: return LE_ERR_GEOMETRY;
  case ErrorCode::EmptyMask: return LE_ERR_EMPTY_MASK;
  case ErrorCode::Arity: return LE_ERR_ARITY;
  case ErrorCode::MissingTeam: return LE_ERR_MISSING_TEAM;
  case ErrorCode::Coverage: return LE_ERR_COVERAGE;
  case ErrorCode::Degenerate: return LE_ERR_DEGENERATE;
  case ErrorCode::Window: return LE_ERR_WINDOW;
  case ErrorCode::EmptyInput: return LE_ERR_EMPTY_INPUT;
  case ErrorCode::Placement: return LE_ERR_PLACEMENT;
  }
  return LE_ERR_INTERNAL;
}

le_status fail(le_status status, std::string message) {
  t_last_error = std::move(message);
  return status;
}

template <typename F> le_status guarded(F &&body) {
  try {
    body();
    return LE_OK;
  } catch (const Error &e) {
    return fail(to_status(e.code()), e.what());
  } catch (const json::exception &e) {
    return fail(LE_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc &) {
    return fail(LE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(LE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LE_ERR_INTERNAL, "unknown exception");
  }
}

#define LE_REQUIRE(cond, what)                                                 \
  do {                                                                         \
    if (!(cond))                                                               \
      return fail(LE_ERR_INVALID_ARGUMENT, what);                              \
  } while (0)

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const LabelVolume &labels_of(const le_volume *v) {
  if (const auto *l = std::get_if<LabelVolume>(&v->data))
    return *l;
  throw Error(ErrorCode::InvalidArgument, "expected a label volume");
}

const IntensityVolume &intensity_of(const le_volume *v) {
  if (const auto *l = std::get_if<IntensityVolume>(&v->data))
    return *l;
  throw Error(ErrorCode::InvalidArgument, "expected an intensity volume");
}

bool valid_region(le_region r) {
  return r == LE_REGION_ET || r == LE_REGION_TC || r == LE_REGION_WT;
}

std::vector<TeamCaseRecord> to_records(const le_team_record *records,
                                       std::size_t n) {
  std::vector<TeamCaseRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto &r = records[i];
    if (!r.team || !r.case_id || !valid_region(r.region))
      throw Error(ErrorCode::InvalidArgument,
                  "record " + std::to_string(i) + " is incomplete");
    out.push_back({r.team, r.case_id, static_cast<Region>(r.region),
                   r.lesionwise_dice, r.lesionwise_hd95});
  }
  return out;
}

le_correlation to_c(const Correlation &c) {
  return {c.r, c.r_squared, c.p_value, c.n};
}

AbutmentReport from_c(const le_abutment &a) {
  AbutmentReport r;
  r.abutting_voxels = a.abutting_voxels;
  r.abutting_enhancing = a.abutting_enhancing;
  r.abutting_nonenhancing = a.abutting_nonenhancing;
  r.abutting_snfh = a.abutting_snfh;
  r.wt_voxels = a.wt_voxels;
  r.wt_volume_mm3 = a.wt_volume_mm3;
  return r;
}

template <typename T, std::size_t N>
void read_array(const json &j, const char *key, std::array<T, N> &out) {
  if (!j.contains(key))
    return;
  const auto &a = j.at(key);
  if (!a.is_array() || a.size() != N)
    throw Error(ErrorCode::InvalidArgument,
                std::string("'") + key + "' must have " + std::to_string(N) +
                    " entries");
  for (std::size_t i = 0; i < N; ++i)
    out[i] = a[i].get<T>();
}

PhantomSpec parse_phantom_spec(const char *text) {
  PhantomSpec spec;
  const json j = (text && *text) ? json::parse(text) : json::object();
  if (!j.is_object())
    throw Error(ErrorCode::InvalidArgument, "phantom spec must be an object");
  static const char *known[] = {"dims",  "spacing", "lesions", "radius",
                                "composition", "calcified_probability",
                                "brain_center", "brain_semi_axes",
                                "label_map", "seed", "max_attempts"};
  for (const auto &item : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char *k) {
          return item.key() == k;
        }) == std::end(known))
      throw Error(ErrorCode::InvalidArgument,
                  "unknown phantom spec key '" + item.key() + "'");
  read_array(j, "dims", spec.geometry.dims);
  read_array(j, "spacing", spec.geometry.spacing);
  std::array<std::size_t, 2> lesions{spec.min_lesions, spec.max_lesions};
  read_array(j, "lesions", lesions);
  spec.min_lesions = lesions[0];
  spec.max_lesions = lesions[1];
  std::array<double, 2> radius{spec.min_radius, spec.max_radius};
  read_array(j, "radius", radius);
  spec.min_radius = radius[0];
  spec.max_radius = radius[1];
  read_array(j, "composition", spec.composition);
  if (j.contains("calcified_probability"))
    spec.calcified_probability = j.at("calcified_probability").get<double>();
  read_array(j, "brain_center", spec.brain_center);
  read_array(j, "brain_semi_axes", spec.brain_semi_axes);
  std::array<std::int32_t, 3> map{spec.labels.enhancing, spec.labels.nonenhancing,
                                  spec.labels.snfh};
  read_array(j, "label_map", map);
  spec.labels = {map[0], map[1], map[2]};
  if (j.contains("seed"))
    spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_attempts"))
    spec.max_attempts = j.at("max_attempts").get<std::size_t>();
  spec.validate();
  return spec;
}

template <typename F> le_status update_eval(le_config *cfg, F &&apply) {
  LE_REQUIRE(cfg, "null config");
  return guarded([&] {
    EvalConfig next = cfg->eval;
    apply(next);
    next.validate();
    cfg->eval = next;
  });
}

} // namespace

extern "C" {

LE_API const char *le_version(void) { return "0.1.0"; }

LE_API const char *le_status_string(le_status status) {
  switch (status) {
  case LE_OK: return "ok";
  case LE_ERR_INVALID_ARGUMENT: return "invalid argument";
  case LE_ERR_IO: return "i/o error";
  case LE_ERR_FORMAT: return "format error";
  case LE_ERR_UNSUPPORTED_SHAPE: return "unsupported shape";
  case LE_ERR_LABEL_DOMAIN: return "label domain error";
  case LE_ERR_GEOMETRY: return "geometry mismatch";
  case LE_ERR_EMPTY_MASK: return "empty mask";
  case LE_ERR_ARITY: return "wrong arity";
  case LE_ERR_MISSING_TEAM: return "missing team";
  case LE_ERR_COVERAGE: return "coverage error";
  case LE_ERR_DEGENERATE: return "degenerate input";
  case LE_ERR_WINDOW: return "window error";
  case LE_ERR_EMPTY_INPUT: return "empty input";
  case LE_ERR_PLACEMENT: return "placement failure";
  case LE_ERR_OUT_OF_RANGE: return "index out of range";
  case LE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

LE_API const char *le_last_error(void) { return t_last_error.c_str(); }

LE_API void le_string_free(char *s) { std::free(s); }

LE_API void le_set_warning_callback(le_warning_fn fn, void *user) {
  if (!fn) {
    set_warning_handler(nullptr);
    return;
  }
  set_warning_handler([fn, user](std::string_view msg) {
    const std::string copy(msg);
    fn(copy.c_str(), user);
  });
}

/* ---- configuration ---- */

LE_API le_status le_config_create(le_config **out) {
  LE_REQUIRE(out, "null output pointer");
  return guarded([&] { *out = new le_config(); });
}

LE_API void le_config_destroy(le_config *cfg) { delete cfg; }

LE_API le_status le_config_set_label_map(le_config *cfg, int32_t enhancing,
                                         int32_t nonenhancing, int32_t snfh) {
  LE_REQUIRE(cfg, "null config");
  return guarded([&] {
    const LabelMap map{enhancing, nonenhancing, snfh};
    map.validate();
    cfg->labels = map;
  });
}

LE_API le_status le_config_set_dice_penalty(le_config *cfg, double value) {
  return update_eval(cfg, [&](EvalConfig &c) { c.fp_fn_dice_penalty = value; });
}
LE_API le_status le_config_set_hd_penalty(le_config *cfg, double mm) {
  return update_eval(cfg, [&](EvalConfig &c) { c.fp_fn_hd_penalty = mm; });
}
LE_API le_status le_config_set_hd_percentile(le_config *cfg, double q) {
  return update_eval(cfg, [&](EvalConfig &c) { c.hd_percentile = q; });
}
LE_API le_status le_config_set_min_lesion_voxels(le_config *cfg, size_t n) {
  return update_eval(cfg, [&](EvalConfig &c) { c.min_lesion_voxels = n; });
}
LE_API le_status le_config_set_exclude_filtered_from_global(le_config *cfg, int on) {
  return update_eval(cfg,
                     [&](EvalConfig &c) { c.exclude_filtered_from_global = on != 0; });
}
LE_API le_status le_config_set_roi_restricted(le_config *cfg, int on) {
  return update_eval(cfg, [&](EvalConfig &c) { c.roi_restricted = on != 0; });
}
LE_API le_status le_config_set_lesion_parent(le_config *cfg, int p) {
  LE_REQUIRE(p == LE_PARENT_REGION || p == LE_PARENT_WT, "bad lesion parent");
  return update_eval(cfg, [&](EvalConfig &c) {
    c.lesion_parent =
        p == LE_PARENT_WT ? LesionParent::WholeTumor : LesionParent::Region;
  });
}

LE_API le_status le_config_describe_json(const le_config *cfg, char **out) {
  LE_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto &e = cfg->eval;
    json j = {
        {"label_map",
         {{"enhancing", cfg->labels.enhancing},
          {"nonenhancing", cfg->labels.nonenhancing},
          {"snfh", cfg->labels.snfh}}},
        {"fp_fn_dice_penalty", e.fp_fn_dice_penalty},
        {"fp_fn_hd_penalty", e.fp_fn_hd_penalty},
        {"min_lesion_voxels", e.min_lesion_voxels},
        {"hd_percentile", e.hd_percentile},
        {"exclude_filtered_from_global", e.exclude_filtered_from_global},
        {"roi_restricted", e.roi_restricted},
        {"lesion_parent",
         e.lesion_parent == LesionParent::WholeTumor ? "wt" : "region"},
        {"hd_direction_combination", "max"},
        {"hd_percentile_method", "linear"},
    };
    *out = dup_string(j.dump());
  });
}

/* ---- volumes ---- */

LE_API le_status le_volume_load_labels(const char *path, le_volume **out) {
  LE_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new le_volume{load_label_nifti(path)}; });
}

LE_API le_status le_volume_load_intensity(const char *path, le_volume **out) {
  LE_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new le_volume{load_intensity_nifti(path)}; });
}

LE_API le_status le_volume_create_labels(const size_t dims[3], const double spacing[3],
                                         const int32_t *data, le_volume **out) {
  LE_REQUIRE(dims && out, "null argument");
  return guarded([&] {
    Geometry g;
    for (int a = 0; a < 3; ++a) {
      g.dims[a] = dims[a];
      g.spacing[a] = spacing ? spacing[a] : 1.0;
    }
    g.validate();
    std::vector<std::int32_t> voxels(g.voxel_count(), 0);
    if (data)
      std::copy(data, data + voxels.size(), voxels.begin());
    for (auto v : voxels)
      if (v < 0)
        throw Error(ErrorCode::LabelDomain, "negative label code");
    *out = new le_volume{LabelVolume(g, std::move(voxels))};
  });
}

LE_API le_status le_volume_write(const le_volume *v, const char *path) {
  LE_REQUIRE(v && path, "null argument");
  return guarded([&] {
    std::visit([&](const auto &vol) { write_nifti(vol, path); }, v->data);
  });
}

LE_API void le_volume_destroy(le_volume *v) { delete v; }

LE_API le_volume_kind le_volume_get_kind(const le_volume *v) {
  return v && std::holds_alternative<IntensityVolume>(v->data)
             ? LE_VOLUME_INTENSITY
             : LE_VOLUME_LABELS;
}

LE_API le_status le_volume_geometry(const le_volume *v, size_t dims[3],
                                    double spacing[3]) {
  LE_REQUIRE(v, "null volume");
  const Geometry &g =
      std::visit([](const auto &vol) -> const Geometry & { return vol.geometry(); },
                 v->data);
  for (int a = 0; a < 3; ++a) {
    if (dims)
      dims[a] = g.dims[a];
    if (spacing)
      spacing[a] = g.spacing[a];
  }
  return LE_OK;
}

LE_API le_status le_volume_copy_labels(const le_volume *v, int32_t *out, size_t n) {
  LE_REQUIRE(v && out, "null argument");
  return guarded([&] {
    const auto &labels = labels_of(v);
    if (n < labels.size())
      throw Error(ErrorCode::InvalidArgument, "output buffer too small");
    std::copy(labels.data().begin(), labels.data().end(), out);
  });
}

/* ---- evaluation ---- */

LE_API le_status le_evaluate_case(const le_volume *gt, const le_volume *pred,
                                  const le_config *cfg, le_case_result **out) {
  LE_REQUIRE(gt && cfg && out, "null argument");
  return guarded([&] {
    const auto &g = labels_of(gt);
    CaseMetrics m = pred ? evaluate_case(g, labels_of(pred), cfg->labels, cfg->eval)
                         : evaluate_case_missing(g, cfg->labels, cfg->eval);
    *out = new le_case_result{std::move(m)};
  });
}

LE_API void le_case_result_destroy(le_case_result *r) { delete r; }

LE_API le_status le_case_result_region(const le_case_result *r, le_region region,
                                       le_region_metrics *out) {
  LE_REQUIRE(r && out && valid_region(region), "bad argument");
  const auto &m = r->metrics[static_cast<Region>(region)];
  out->lesionwise_dice = m.lesionwise_dice;
  out->lesionwise_hd95 = m.lesionwise_hd95;
  out->global_dice = m.global.dice;
  out->global_hd95 = m.global.hd;
  out->has_sensitivity = m.global.sensitivity.has_value();
  out->sensitivity = m.global.sensitivity.value_or(0.0);
  out->tp = m.tp;
  out->fn = m.fn;
  out->fp = m.fp;
  out->ignored = m.ignored;
  out->lesion_count = m.per_lesion.size();
  out->excluded_count = m.excluded_lesions.size();
  out->gt_region_voxels = m.gt_region_voxels;
  out->gt_voxels = m.gt_voxels;
  out->pred_voxels = m.pred_voxels;
  out->gt_volume_mm3 = m.gt_volume_mm3;
  return LE_OK;
}

LE_API le_status le_case_result_lesion(const le_case_result *r, le_region region,
                                       size_t index, le_lesion_metrics *out) {
  LE_REQUIRE(r && out && valid_region(region), "bad argument");
  const auto &lesions = r->metrics[static_cast<Region>(region)].per_lesion;
  if (index >= lesions.size())
    return fail(LE_ERR_OUT_OF_RANGE, "lesion index out of range");
  const auto &l = lesions[index];
  *out = {l.gt_lesion, l.dice, l.hd, l.gt_voxels, l.pred_voxels, l.detected};
  return LE_OK;
}

LE_API le_status le_case_result_excluded(const le_case_result *r, le_region region,
                                         size_t index, uint32_t *lesion_id,
                                         size_t *voxels) {
  LE_REQUIRE(r && valid_region(region), "bad argument");
  const auto &removed = r->metrics[static_cast<Region>(region)].excluded_lesions;
  if (index >= removed.size())
    return fail(LE_ERR_OUT_OF_RANGE, "excluded lesion index out of range");
  if (lesion_id)
    *lesion_id = removed[index].id;
  if (voxels)
    *voxels = removed[index].voxel_count;
  return LE_OK;
}

/* ---- ranking ---- */

LE_API const char *le_rank_column_name(size_t column) {
  static const std::array<std::string, kRankColumns> names = [] {
    std::array<std::string, kRankColumns> n;
    for (std::size_t c = 0; c < kRankColumns; ++c)
      n[c] = column_name(kColumns[c]);
    return n;
  }();
  return column < kRankColumns ? names[column].c_str() : nullptr;
}

LE_API le_status le_ranking_build(const le_team_record *records, size_t n,
                                  le_rank_mode mode, le_ranking **out) {
  LE_REQUIRE((records || n == 0) && out, "null argument");
  LE_REQUIRE(mode == LE_RANK_AGGREGATE || mode == LE_RANK_PER_CASE, "bad mode");
  return guarded([&] {
    const auto recs = to_records(records, n);
    *out = new le_ranking{build_ranking(
        recs, mode == LE_RANK_PER_CASE ? RankMode::PerCase : RankMode::Aggregate)};
  });
}

LE_API le_status le_ranking_from_aggregates(const char *const *teams,
                                            const double *aggregates,
                                            size_t n_teams, le_ranking **out) {
  LE_REQUIRE(teams && aggregates && out, "null argument");
  return guarded([&] {
    std::map<std::string, std::array<double, kRankColumns>> table;
    for (std::size_t t = 0; t < n_teams; ++t) {
      if (!teams[t])
        throw Error(ErrorCode::InvalidArgument, "null team name");
      std::array<double, kRankColumns> row;
      std::copy(aggregates + t * kRankColumns, aggregates + (t + 1) * kRankColumns,
                row.begin());
      if (!table.emplace(teams[t], row).second)
        throw Error(ErrorCode::InvalidArgument,
                    std::string("duplicate team '") + teams[t] + "'");
    }
    if (table.empty())
      throw Error(ErrorCode::EmptyInput, "no teams to rank");
    *out = new le_ranking{rank_aggregates(table)};
  });
}

LE_API void le_ranking_destroy(le_ranking *r) { delete r; }

LE_API size_t le_ranking_team_count(const le_ranking *r) {
  return r ? r->table.standings.size() : 0;
}

LE_API le_status le_ranking_standing(const le_ranking *r, size_t position,
                                     le_standing *out) {
  LE_REQUIRE(r && out, "null argument");
  if (position >= r->table.standings.size())
    return fail(LE_ERR_OUT_OF_RANGE, "standing position out of range");
  const auto &s = r->table.standings[position];
  out->team = s.team.c_str();
  std::copy(s.aggregates.begin(), s.aggregates.end(), out->aggregates);
  std::copy(s.ranks.begin(), s.ranks.end(), out->ranks);
  out->score = s.score;
  out->tied = s.tied;
  return LE_OK;
}

LE_API le_status le_rank_metric(const double *values, size_t n, le_metric metric,
                                double *ranks) {
  LE_REQUIRE((values && ranks) || n == 0, "null argument");
  LE_REQUIRE(metric == LE_METRIC_DICE || metric == LE_METRIC_HD95, "bad metric");
  return guarded([&] {
    const auto r = rank_metric(std::span(values, n),
                               metric == LE_METRIC_DICE ? Metric::Dice : Metric::HD95);
    std::copy(r.begin(), r.end(), ranks);
  });
}

LE_API le_status le_segmentation_score(const double *ranks, size_t n, double *out) {
  LE_REQUIRE((ranks || n == 0) && out, "null argument");
  return guarded([&] { *out = segmentation_score(std::span(ranks, n)); });
}

/* ---- statistics ---- */

LE_API le_status le_summarize(const double *values, size_t n, le_summary *out) {
  LE_REQUIRE((values || n == 0) && out, "null argument");
  return guarded([&] {
    const auto s = summarize(std::span(values, n));
    *out = {s.n,      s.mean, s.std.value_or(0.0), s.std.has_value(),
            s.median, s.q1,   s.q3,                s.min,
            s.max};
  });
}

LE_API const char *le_quartile_method(void) { return kQuartileMethod; }

LE_API size_t le_default_window(size_t n) { return default_window(n); }

LE_API le_status le_sliding_window(const double *volume, const double *metric,
                                   size_t n, size_t window, double *out_volume,
                                   double *out_metric) {
  LE_REQUIRE((volume && metric) || n == 0, "null input");
  LE_REQUIRE(out_volume && out_metric, "null output");
  return guarded([&] {
    std::vector<CurvePoint> pairs(n);
    for (std::size_t i = 0; i < n; ++i)
      pairs[i] = {volume[i], metric[i]};
    const auto curve = sliding_window_curve(std::move(pairs), window);
    for (std::size_t k = 0; k < curve.size(); ++k) {
      out_volume[k] = curve[k].volume;
      out_metric[k] = curve[k].metric;
    }
  });
}

LE_API le_status le_pearson(const double *x, const double *y, size_t n,
                            le_correlation *out) {
  LE_REQUIRE(x && y && out, "null argument");
  return guarded([&] { *out = to_c(pearson(std::span(x, n), std::span(y, n))); });
}

LE_API le_status le_distribution_export_json(const le_team_record *records,
                                             size_t n, char **out) {
  LE_REQUIRE((records || n == 0) && out, "null argument");
  return guarded([&] {
    const auto recs = to_records(records, n);
    json groups = json::array();
    for (const auto &[key, values] : distribution_export(recs)) {
      json cases = json::array();
      json vals = json::array();
      for (const auto &[case_id, v] : values) {
        cases.push_back(case_id);
        vals.push_back(v);
      }
      groups.push_back({{"team", key.team},
                        {"region", to_string(key.region)},
                        {"metric", key.metric == Metric::Dice ? "lesionwise_dice"
                                                              : "lesionwise_hd95"},
                        {"cases", cases},
                        {"values", vals}});
    }
    *out = dup_string(groups.dump());
  });
}

/* ---- abutment ---- */

LE_API le_status le_count_abutting(const le_volume *tumor,
                                   const le_volume *const *channels,
                                   size_t n_channels, const le_config *cfg,
                                   int adjacency, le_abutment *out) {
  LE_REQUIRE(tumor && channels && n_channels > 0 && cfg && out, "bad argument");
  LE_REQUIRE(adjacency == 6 || adjacency == 26, "adjacency must be 6 or 26");
  return guarded([&] {
    std::vector<IntensityVolume> vols;
    vols.reserve(n_channels);
    for (std::size_t i = 0; i < n_channels; ++i) {
      if (!channels[i])
        throw Error(ErrorCode::InvalidArgument, "null channel");
      vols.push_back(intensity_of(channels[i]));
    }
    const BinaryMask brain = derive_brain_mask(vols);
    const auto r = count_abutting(labels_of(tumor), brain, cfg->labels,
                                  adjacency == 26 ? Adjacency::Full26
                                                  : Adjacency::Face6);
    *out = {r.abutting_voxels, r.abutting_enhancing, r.abutting_nonenhancing,
            r.abutting_snfh,   r.wt_voxels,          r.wt_volume_mm3};
  });
}

LE_API le_status le_abutment_summarize(const le_abutment *reports, size_t n,
                                       le_abutment_summary *out) {
  LE_REQUIRE((reports || n == 0) && out, "null argument");
  return guarded([&] {
    std::vector<AbutmentReport> recs;
    for (std::size_t i = 0; i < n; ++i)
      recs.push_back(from_c(reports[i]));
    const auto s = cohort_abutment_summary(recs);
    *out = {s.cases,          s.cases_with_abutment,  s.fraction,
            s.mean.value_or(0), s.median.value_or(0), s.mean.has_value()};
  });
}

LE_API le_status le_abutment_correlate(const le_abutment *reports, size_t n,
                                       int log_volume, le_correlation *out) {
  LE_REQUIRE((reports || n == 0) && out, "null argument");
  return guarded([&] {
    std::vector<AbutmentReport> recs;
    for (std::size_t i = 0; i < n; ++i)
      recs.push_back(from_c(reports[i]));
    *out = to_c(log_volume ? correlate_abutment_log_volume(recs)
                           : correlate_abutment_volume(recs));
  });
}

/* ---- phantoms ---- */

LE_API le_status le_phantom_generate(const char *spec_json, le_phantom **out) {
  LE_REQUIRE(out, "null output pointer");
  return guarded([&] {
    PhantomSpec spec = parse_phantom_spec(spec_json);
    Phantom ph = generate_phantom(spec);
    *out = new le_phantom{std::move(spec), std::move(ph)};
  });
}

LE_API void le_phantom_destroy(le_phantom *p) { delete p; }

LE_API size_t le_phantom_lesion_count(const le_phantom *p) {
  return p ? p->phantom.lesions.size() : 0;
}

LE_API le_status le_phantom_labels(const le_phantom *p, le_volume **out) {
  LE_REQUIRE(p && out, "null argument");
  return guarded([&] { *out = new le_volume{p->phantom.labels}; });
}

LE_API le_status le_phantom_brain(const le_phantom *p, le_volume **out) {
  LE_REQUIRE(p && out, "null argument");
  return guarded([&] { *out = new le_volume{p->phantom.brain}; });
}

LE_API le_status le_phantom_describe_json(const le_phantom *p, char **out) {
  LE_REQUIRE(p && out, "null argument");
  return guarded([&] {
    json lesions = json::array();
    for (const auto &l : p->phantom.lesions)
      lesions.push_back(
          {{"center", l.center}, {"radius", l.radius}, {"calcified", l.calcified}});
    json j = {{"seed", p->spec.seed},
              {"dims", p->spec.geometry.dims},
              {"spacing", p->spec.geometry.spacing},
              {"lesions", lesions}};
    *out = dup_string(j.dump());
  });
}

LE_API le_status le_phantom_perturb(const le_phantom *p, const char *const *steps,
                                    size_t n_steps, uint64_t seed, le_volume **out,
                                    char **provenance_json) {
  LE_REQUIRE(p && out && (steps || n_steps == 0), "null argument");
  return guarded([&] {
    std::vector<Perturbation> parsed;
    for (std::size_t i = 0; i < n_steps; ++i) {
      if (!steps[i])
        throw Error(ErrorCode::InvalidArgument, "null perturbation");
      parsed.push_back(parse_perturbation(steps[i]));
    }
    std::vector<std::string> notes;
    auto volume = std::make_unique<le_volume>(
        le_volume{perturb(p->phantom, parsed, p->spec.labels, seed, &notes)});
    if (provenance_json)
      *provenance_json = dup_string(json({{"seed", seed}, {"steps", notes}}).dump());
    *out = volume.release();
  });
}

} // extern "C"
