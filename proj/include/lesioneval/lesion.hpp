/**
 * @file lesion.hpp
 * @brief Dilation, 26-connected component labelling and lesion identification.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "lesioneval/volume.hpp"

namespace lesioneval {

/// Inclusive voxel-index bounding box.
struct Box {
  Index3 lo{};
  Index3 hi{};

  void expand(const Index3 &p);
  void merge(const Box &other);
  /// Grows by `margin` voxels on every side, clipped to `dims`.
  Box padded(std::size_t margin, const Index3 &dims) const;
  Index3 extent() const {
    return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  }

  friend bool operator==(const Box &, const Box &) = default;
};

struct LesionInfo {
  std::uint32_t id = 0;
  std::size_t voxel_count = 0;
  Box bbox;

  friend bool operator==(const LesionInfo &, const LesionInfo &) = default;
};

/// Per-voxel lesion ids (0 = none) with consecutive ids 1..L.
/// `lesions[k]` describes id k + 1.
struct LesionField {
  Geometry geometry;
  std::vector<std::uint32_t> ids;
  std::vector<LesionInfo> lesions;
  /// Lesions dropped by filter_small_lesions, with their pre-filter ids.
  std::vector<LesionInfo> removed;
  /// Per-voxel flag for voxels of removed lesions; empty if none were removed.
  std::vector<std::uint8_t> excluded;

  std::size_t lesion_count() const { return lesions.size(); }
  const LesionInfo &lesion(std::uint32_t id) const { return lesions[id - 1]; }
  /// Voxels carrying any retained lesion id.
  BinaryMask mask() const;

  friend bool operator==(const LesionField &, const LesionField &) = default;
};

/// Binary dilation with a (2r+1)^3 cube; voxels outside the grid are unset.
BinaryMask dilate(const BinaryMask &mask, std::size_t radius);

/// Labels 26-connected components. Ids follow the scan order of each
/// component's first voxel, i.e. lexicographic (z, y, x).
LesionField connected_components_26(const BinaryMask &mask);

/// Groups voxels into lesions: components of the radius-1 dilation,
/// restricted back to the original voxels and renumbered in scan order.
LesionField identify_gt_lesions(const BinaryMask &mask);

/// Groups the voxels of `mask` by the lesion of `parent` that contains them.
/// Voxels outside every parent lesion form no lesion and are dropped from the
/// result, so `mask` is expected to be a subset of parent's voxels.
LesionField assign_by_parent(const BinaryMask &mask, const LesionField &parent);

/// Drops lesions with fewer than `min_voxels` voxels and renumbers the rest.
/// The dropped voxels are flagged in `excluded`.
LesionField filter_small_lesions(const LesionField &field,
                                 std::size_t min_voxels);

} // namespace lesioneval
