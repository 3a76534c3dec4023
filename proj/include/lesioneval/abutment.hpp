/**
 * @file abutment.hpp
 * @brief Tumor voxels touching the edge of the skull-stripped brain.
 */
#pragma once

#include <optional>
#include <span>
#include <string>

#include "lesioneval/stats.hpp"
#include "lesioneval/volume.hpp"

namespace lesioneval {

enum class Adjacency { Face6 = 6, Full26 = 26 };

struct AbutmentReport {
  std::string case_id;
  std::size_t abutting_voxels = 0;
  std::size_t abutting_enhancing = 0;
  std::size_t abutting_nonenhancing = 0;
  std::size_t abutting_snfh = 0;
  std::size_t wt_voxels = 0;
  double wt_volume_mm3 = 0.0;
};

/// A tumor voxel abuts the edge when any neighbour (6- or 26-adjacency) lies
/// outside the brain mask or outside the image.
AbutmentReport count_abutting(const LabelVolume &tumor, const BinaryMask &brain,
                              const LabelMap &map,
                              Adjacency adjacency = Adjacency::Face6);

struct AbutmentSummary {
  std::size_t cases = 0;
  std::size_t cases_with_abutment = 0;
  double fraction = 0.0;
  std::optional<double> mean;   // over abutting cases only
  std::optional<double> median; // over abutting cases only
};

AbutmentSummary cohort_abutment_summary(std::span<const AbutmentReport> reports);

/// Pearson correlation of abutting voxel counts against WT voxel counts.
Correlation correlate_abutment_volume(std::span<const AbutmentReport> reports);

/// Same with log10(WT volume in mm^3); cases with zero volume are skipped.
Correlation correlate_abutment_log_volume(std::span<const AbutmentReport> reports);

} // namespace lesioneval
