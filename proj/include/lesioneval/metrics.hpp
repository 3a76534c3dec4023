/**
 * @file metrics.hpp
 * @brief Lesion-wise and global overlap/surface metrics for one case.
 *
 * A case is scored per region (ET, TC, WT). Ground-truth lesions are found by
 * dilate-then-label grouping and lesions below `min_lesion_voxels` are dropped.
 * Predicted voxels are grouped the same way. Each ground-truth lesion touched
 * by at least one predicted voxel is a true positive and is compared against
 * the union of the predicted components touching it; untouched lesions are
 * false negatives; predicted components touching no ground-truth lesion are
 * false positives. Components touching only lesions removed by the size
 * threshold are ignored. FN and FP entries score the configured penalties, and the
 * lesion-wise score is the sum over all entries divided by TP + FN + FP.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lesioneval/distance.hpp"
#include "lesioneval/lesion.hpp"
#include "lesioneval/volume.hpp"

namespace lesioneval {

enum class LesionParent {
  Region, ///< lesions recomputed on each region's own mask
  WholeTumor, ///< ET/TC voxels grouped by the WT lesion containing them
};

struct EvalConfig {
  double fp_fn_dice_penalty = 0.0;
  double fp_fn_hd_penalty = 374.0; // mm
  std::size_t min_lesion_voxels = 50;
  double hd_percentile = 0.95;
  bool exclude_filtered_from_global = true;
  bool roi_restricted = false;
  LesionParent lesion_parent = LesionParent::Region;

  void validate() const;
};

struct LesionMatch {
  std::uint32_t gt_lesion = 0;
  std::vector<std::uint32_t> pred_components; // ascending
};

struct LesionMatchTable {
  std::vector<LesionMatch> tp;
  std::vector<std::uint32_t> fn;
  std::vector<std::uint32_t> fp;
  std::vector<std::uint32_t> ignored; // touch only excluded gt voxels

  std::size_t tp_count() const { return tp.size(); }
  std::size_t fn_count() const { return fn.size(); }
  std::size_t fp_count() const { return fp.size(); }
};

struct LesionScore {
  std::uint32_t gt_lesion = 0;
  double dice = 0.0;
  double hd = 0.0;
  std::size_t gt_voxels = 0;
  std::size_t pred_voxels = 0;
  bool detected = false;
};

struct LesionwiseResult {
  double value = 0.0;
  std::vector<LesionScore> per_lesion;
};

struct GlobalMetrics {
  double dice = 0.0;
  double hd = 0.0;
  std::optional<double> sensitivity; // absent when gt is empty but pred is not
};

struct CaseRegionMetrics {
  Region region = Region::ET;
  double lesionwise_dice = 0.0;
  double lesionwise_hd95 = 0.0;
  std::vector<LesionScore> per_lesion;
  GlobalMetrics global;
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t ignored = 0; // predicted components touching only excluded lesions
  std::size_t gt_region_voxels = 0; // before small-lesion exclusion
  std::size_t gt_voxels = 0;        // retained lesion voxels
  std::size_t pred_voxels = 0;
  double gt_volume_mm3 = 0.0;       // of the full region mask
  std::vector<LesionInfo> excluded_lesions;
};

struct CaseMetrics {
  std::array<CaseRegionMetrics, 3> regions;
  const CaseRegionMetrics &operator[](Region r) const {
    return regions[static_cast<int>(r)];
  }
};

/// 2|A∩B| / (|A| + |B|); 1.0 when both are empty.
double dice(const BinaryMask &a, const BinaryMask &b);

/// Matches ground-truth lesions against predicted components. Voxels flagged
/// in gt.excluded count as ground truth for the FP test only.
LesionMatchTable match_lesions(const LesionField &gt, const LesionField &pred);

/// Componentises the prediction with identify_gt_lesions, then matches.
LesionMatchTable match_lesions(const LesionField &gt, const BinaryMask &pred);

/// Per-lesion Dice and percentile Hausdorff for one region, both aggregated.
struct LesionwiseScores {
  LesionMatchTable table;
  LesionwiseResult dice;
  LesionwiseResult hd;
};
LesionwiseScores score_lesions(const LesionField &gt, const LesionField &pred,
                               const EvalConfig &cfg);

LesionwiseResult lesionwise_dice(const LesionField &gt, const BinaryMask &pred,
                                 const EvalConfig &cfg);
LesionwiseResult lesionwise_hd95(const LesionField &gt, const BinaryMask &pred,
                                 const EvalConfig &cfg);

/// Whole-mask Dice, percentile Hausdorff and sensitivity. The Hausdorff term
/// is the penalty when exactly one mask is empty and 0 when both are.
GlobalMetrics global_metrics(const BinaryMask &gt, const BinaryMask &pred,
                             const EvalConfig &cfg);

/// Scores all three regions of a case.
CaseMetrics evaluate_case(const LabelVolume &gt, const LabelVolume &pred,
                          const LabelMap &map, const EvalConfig &cfg);

/// Scores a case whose prediction is missing, i.e. all background.
CaseMetrics evaluate_case_missing(const LabelVolume &gt, const LabelMap &map,
                                  const EvalConfig &cfg);

} // namespace lesioneval
