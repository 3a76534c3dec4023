#include "lesioneval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lesioneval {

void EvalConfig::validate() const {
  if (!(fp_fn_dice_penalty >= 0.0 && fp_fn_dice_penalty <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "dice penalty must be in [0, 1]");
  if (!(fp_fn_hd_penalty >= 0.0) || !std::isfinite(fp_fn_hd_penalty))
    throw Error(ErrorCode::InvalidArgument, "hd penalty must be >= 0");
  if (!(hd_percentile > 0.0 && hd_percentile <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "hd percentile must be in (0, 1]");
  if (min_lesion_voxels < 1)
    throw Error(ErrorCode::InvalidArgument, "min lesion voxels must be >= 1");
}

double dice(const BinaryMask &a, const BinaryMask &b) {
  require_aligned(a.geometry(), b.geometry(), "dice");
  std::size_t na = 0, nb = 0, both = 0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const bool x = da[i] != 0;
    const bool y = db[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0)
    return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

LesionMatchTable match_lesions(const LesionField &gt, const LesionField &pred) {
  require_aligned(gt.geometry, pred.geometry, "match_lesions");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::pair<std::uint32_t, std::uint32_t> last{0, 0};
  for (std::size_t i = 0; i < gt.ids.size(); ++i) {
    const auto g = gt.ids[i];
    const auto p = pred.ids[i];
    if (g == 0 || p == 0)
      continue;
    if (last == std::pair{g, p})
      continue;
    last = {g, p};
    pairs.push_back(last);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<bool> touches_excluded(pred.lesion_count() + 1, false);
  if (!gt.excluded.empty())
    for (std::size_t i = 0; i < pred.ids.size(); ++i)
      if (gt.excluded[i] && pred.ids[i] != 0)
        touches_excluded[pred.ids[i]] = true;

  LesionMatchTable table;
  std::vector<bool> pred_used(pred.lesion_count() + 1, false);
  auto it = pairs.begin();
  for (const auto &lesion : gt.lesions) {
    LesionMatch match{lesion.id, {}};
    for (; it != pairs.end() && it->first == lesion.id; ++it) {
      match.pred_components.push_back(it->second);
      pred_used[it->second] = true;
    }
    if (match.pred_components.empty())
      table.fn.push_back(lesion.id);
    else
      table.tp.push_back(std::move(match));
  }
  for (const auto &comp : pred.lesions) {
    if (pred_used[comp.id])
      continue;
    if (touches_excluded[comp.id])
      table.ignored.push_back(comp.id);
    else
      table.fp.push_back(comp.id);
  }
  return table;
}

LesionMatchTable match_lesions(const LesionField &gt, const BinaryMask &pred) {
  require_aligned(gt.geometry, pred.geometry(), "match_lesions");
  return match_lesions(gt, identify_gt_lesions(pred));
}

namespace {

// Dice and percentile Hausdorff of one matched lesion, evaluated inside a crop
// that holds the lesion, its matched components and one voxel of margin.
LesionScore score_match(const LesionField &gt, const LesionField &pred,
                        const LesionMatch &match, std::vector<bool> &selected,
                        const EvalConfig &cfg) {
  const Geometry &g = gt.geometry;
  const LesionInfo &lesion = gt.lesion(match.gt_lesion);
  Box box = lesion.bbox;
  for (auto p : match.pred_components) {
    box.merge(pred.lesion(p).bbox);
    selected[p] = true;
  }
  box = box.padded(1, g.dims);

  Geometry local = g;
  local.dims = box.extent();
  BinaryMask gt_mask(local);
  BinaryMask pred_mask(local);
  std::size_t o = 0;
  for (std::size_t z = box.lo[2]; z <= box.hi[2]; ++z)
    for (std::size_t y = box.lo[1]; y <= box.hi[1]; ++y) {
      const std::size_t row = g.index(box.lo[0], y, z);
      for (std::size_t x = 0; x < local.dims[0]; ++x, ++o) {
        gt_mask[o] = gt.ids[row + x] == match.gt_lesion;
        pred_mask[o] = selected[pred.ids[row + x]];
      }
    }
  for (auto p : match.pred_components)
    selected[p] = false;

  if (cfg.roi_restricted) {
    const BinaryMask roi = dilate(gt_mask, 1);
    for (std::size_t i = 0; i < pred_mask.size(); ++i)
      pred_mask[i] &= roi[i];
  }

  LesionScore s;
  s.gt_lesion = match.gt_lesion;
  s.detected = true;
  s.gt_voxels = lesion.voxel_count;
  s.pred_voxels = voxel_count(pred_mask);
  s.dice = dice(gt_mask, pred_mask);
  s.hd = hausdorff_percentile(gt_mask, pred_mask, cfg.hd_percentile);
  return s;
}

} // namespace

LesionwiseScores score_lesions(const LesionField &gt, const LesionField &pred,
                               const EvalConfig &cfg) {
  cfg.validate();
  LesionwiseScores out;
  out.table = match_lesions(gt, pred);
  const auto &table = out.table;

  std::vector<LesionScore> scores;
  scores.reserve(gt.lesion_count());
  std::vector<bool> selected(pred.lesion_count() + 1, false);
  for (const auto &match : table.tp)
    scores.push_back(score_match(gt, pred, match, selected, cfg));
  for (auto id : table.fn) {
    LesionScore s;
    s.gt_lesion = id;
    s.gt_voxels = gt.lesion(id).voxel_count;
    s.dice = cfg.fp_fn_dice_penalty;
    s.hd = cfg.fp_fn_hd_penalty;
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end(),
            [](const LesionScore &a, const LesionScore &b) {
              return a.gt_lesion < b.gt_lesion;
            });

  const std::size_t denominator =
      table.tp_count() + table.fn_count() + table.fp_count();
  const auto fp = static_cast<double>(table.fp_count());
  if (denominator == 0) {
    out.dice.value = 1.0;
    out.hd.value = 0.0;
  } else {
    double dice_sum = fp * cfg.fp_fn_dice_penalty;
    double hd_sum = fp * cfg.fp_fn_hd_penalty;
    for (const auto &s : scores) {
      dice_sum += s.dice;
      hd_sum += s.hd;
    }
    out.dice.value = dice_sum / static_cast<double>(denominator);
    out.hd.value = hd_sum / static_cast<double>(denominator);
  }
  out.dice.per_lesion = scores;
  out.hd.per_lesion = std::move(scores);
  return out;
}

LesionwiseResult lesionwise_dice(const LesionField &gt, const BinaryMask &pred,
                                 const EvalConfig &cfg) {
  require_aligned(gt.geometry, pred.geometry(), "lesionwise_dice");
  return score_lesions(gt, identify_gt_lesions(pred), cfg).dice;
}

LesionwiseResult lesionwise_hd95(const LesionField &gt, const BinaryMask &pred,
                                 const EvalConfig &cfg) {
  require_aligned(gt.geometry, pred.geometry(), "lesionwise_hd95");
  return score_lesions(gt, identify_gt_lesions(pred), cfg).hd;
}

GlobalMetrics global_metrics(const BinaryMask &gt, const BinaryMask &pred,
                             const EvalConfig &cfg) {
  cfg.validate();
  require_aligned(gt.geometry(), pred.geometry(), "global_metrics");
  std::size_t ng = 0, np = 0, both = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool a = gt[i] != 0;
    const bool b = pred[i] != 0;
    ng += a;
    np += b;
    both += a && b;
  }
  GlobalMetrics m;
  m.dice = ng + np == 0 ? 1.0
                        : 2.0 * static_cast<double>(both) /
                              static_cast<double>(ng + np);
  if (ng > 0)
    m.sensitivity = static_cast<double>(both) / static_cast<double>(ng);
  else if (np == 0)
    m.sensitivity = 1.0;
  if (ng == 0 && np == 0)
    m.hd = 0.0;
  else if (ng == 0 || np == 0)
    m.hd = cfg.fp_fn_hd_penalty;
  else
    m.hd = hausdorff_percentile(gt, pred, cfg.hd_percentile);
  return m;
}

namespace {

CaseRegionMetrics score_region(Region region, const BinaryMask &gt_mask,
                               const BinaryMask &pred_mask,
                               const LesionField &gt_lesions,
                               const LesionField &pred_components,
                               const EvalConfig &cfg) {
  const LesionField retained =
      filter_small_lesions(gt_lesions, cfg.min_lesion_voxels);
  auto scores = score_lesions(retained, pred_components, cfg);

  CaseRegionMetrics m;
  m.region = region;
  m.lesionwise_dice = scores.dice.value;
  m.lesionwise_hd95 = scores.hd.value;
  m.per_lesion = std::move(scores.dice.per_lesion);
  m.tp = scores.table.tp_count();
  m.fn = scores.table.fn_count();
  m.fp = scores.table.fp_count();
  m.ignored = scores.table.ignored.size();
  m.gt_region_voxels = voxel_count(gt_mask);
  m.pred_voxels = voxel_count(pred_mask);
  m.gt_volume_mm3 = static_cast<double>(m.gt_region_voxels) *
                    gt_mask.geometry().voxel_volume();
  m.excluded_lesions = retained.removed;
  for (const auto &l : retained.lesions)
    m.gt_voxels += l.voxel_count;
  if (cfg.exclude_filtered_from_global && !retained.excluded.empty()) {
    // Removed lesions drop out of both masks.
    BinaryMask pred_kept = pred_mask;
    for (std::size_t i = 0; i < pred_kept.size(); ++i)
      if (retained.excluded[i])
        pred_kept[i] = 0;
    m.global = global_metrics(retained.mask(), pred_kept, cfg);
  } else {
    m.global = global_metrics(gt_mask, pred_mask, cfg);
  }
  return m;
}

CaseMetrics evaluate_masks(const std::array<BinaryMask, 3> &gt,
                           const std::array<BinaryMask, 3> &pred,
                           const EvalConfig &cfg) {
  const auto wt = static_cast<int>(Region::WT);
  const LesionField gt_wt = identify_gt_lesions(gt[wt]);
  const LesionField pred_wt = identify_gt_lesions(pred[wt]);

  CaseMetrics out;
  for (Region region : kAllRegions) {
    const auto r = static_cast<int>(region);
    LesionField gt_lesions, pred_components;
    if (region == Region::WT) {
      gt_lesions = gt_wt;
      pred_components = pred_wt;
    } else if (cfg.lesion_parent == LesionParent::WholeTumor) {
      gt_lesions = assign_by_parent(gt[r], gt_wt);
      pred_components = assign_by_parent(pred[r], pred_wt);
    } else {
      gt_lesions = identify_gt_lesions(gt[r]);
      pred_components = identify_gt_lesions(pred[r]);
    }
    out.regions[r] =
        score_region(region, gt[r], pred[r], gt_lesions, pred_components, cfg);
  }
  return out;
}

} // namespace

CaseMetrics evaluate_case(const LabelVolume &gt, const LabelVolume &pred,
                          const LabelMap &map, const EvalConfig &cfg) {
  cfg.validate();
  map.validate();
  require_aligned(gt.geometry(), pred.geometry(), "evaluate_case");
  return evaluate_masks(compose_all_regions(gt, map),
                        compose_all_regions(pred, map), cfg);
}

CaseMetrics evaluate_case_missing(const LabelVolume &gt, const LabelMap &map,
                                  const EvalConfig &cfg) {
  cfg.validate();
  map.validate();
  const BinaryMask empty(gt.geometry());
  return evaluate_masks(compose_all_regions(gt, map), {empty, empty, empty},
                        cfg);
}

} // namespace lesioneval
