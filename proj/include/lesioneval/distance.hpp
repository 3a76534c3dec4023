/**
 * @file distance.hpp
 * @brief Surface extraction, exact Euclidean distance transform and
 *        percentile Hausdorff distance between binary masks.
 */
#pragma once

#include <vector>

#include "lesioneval/lesion.hpp"
#include "lesioneval/volume.hpp"

namespace lesioneval {

/// Set voxels with at least one 6-neighbour that is unset or out of bounds.
BinaryMask surface_voxels(const BinaryMask &mask);

/// Squared distance in mm^2 from every voxel centre to the nearest set voxel
/// of `features`, honouring anisotropic spacing. +inf everywhere if the mask
/// is empty.
std::vector<double> squared_distance_transform(const BinaryMask &features);

/// Linear interpolation between closest ranks (q in (0, 1]). The input is
/// reordered.
double percentile(std::vector<double> &values, double q);

/// Copies the voxels of `mask` inside `box` into a smaller mask with the same
/// spacing.
BinaryMask crop(const BinaryMask &mask, const Box &box);

/// Bounding box of the set voxels of either mask; false if both are empty.
bool union_bounding_box(const BinaryMask &a, const BinaryMask &b, Box &out);

/// max(P_q(d(S_a -> S_b)), P_q(d(S_b -> S_a))) over surface voxels S, with
/// distances between voxel centres in mm. Throws Error(EmptyMask) if either
/// mask is empty and Error(Geometry) if they are not aligned.
double hausdorff_percentile(const BinaryMask &a, const BinaryMask &b, double q);

inline double hd95(const BinaryMask &a, const BinaryMask &b) {
  return hausdorff_percentile(a, b, 0.95);
}

} // namespace lesioneval
