/**
 * @file volume.hpp
 * @brief Geometry-aware 3D volumes, label maps and tumor region composition.
 *
 * Voxels are stored x-fastest: index = x + nx * (y + ny * z). Scanning the
 * linear index in ascending order therefore visits voxels in lexicographic
 * (z, y, x) order, which the lesion labelling relies on for deterministic ids.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lesioneval/error.hpp"

namespace lesioneval {

using Index3 = std::array<std::size_t, 3>;

struct Geometry {
  Index3 dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm

  /// Throws Error(InvalidArgument) unless all dims >= 1 and spacings > 0.
  void validate() const;

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }
  Index3 coords(std::size_t i) const {
    return {i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])};
  }

  bool aligned_with(const Geometry &other) const {
    return dims == other.dims && spacing == other.spacing;
  }

  friend bool operator==(const Geometry &, const Geometry &) = default;
};

/// Throws Error(Geometry) naming `what` if the two geometries differ.
void require_aligned(const Geometry &a, const Geometry &b, std::string_view what);

/// Dense 3D grid with geometry. Instantiated for labels, intensities and masks.
template <typename T> class Volume {
public:
  using value_type = T;

  Volume() = default;
  explicit Volume(const Geometry &geometry, T fill = T{})
      : geometry_(geometry) {
    geometry_.validate();
    data_.assign(geometry_.voxel_count(), fill);
  }
  Volume(const Geometry &geometry, std::vector<T> data)
      : geometry_(geometry), data_(std::move(data)) {
    geometry_.validate();
    if (data_.size() != geometry_.voxel_count())
      throw Error(ErrorCode::InvalidArgument,
                  "voxel buffer length does not match geometry");
  }

  const Geometry &geometry() const { return geometry_; }
  std::size_t size() const { return data_.size(); }

  T operator[](std::size_t i) const { return data_[i]; }
  T &operator[](std::size_t i) { return data_[i]; }
  T at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[geometry_.index(x, y, z)];
  }
  T &at(std::size_t x, std::size_t y, std::size_t z) {
    return data_[geometry_.index(x, y, z)];
  }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  friend bool operator==(const Volume &, const Volume &) = default;

private:
  Geometry geometry_;
  std::vector<T> data_;
};

using LabelVolume = Volume<std::int32_t>;
using IntensityVolume = Volume<float>;
using BinaryMask = Volume<std::uint8_t>;

std::size_t voxel_count(const BinaryMask &mask);

/// Compartment label codes. Defaults: enhancing 3, non-enhancing 1, SNFH 2.
struct LabelMap {
  std::int32_t enhancing = 3;
  std::int32_t nonenhancing = 1;
  std::int32_t snfh = 2;

  /// Codes must be distinct and nonzero.
  void validate() const;
  bool is_tumor(std::int32_t code) const {
    return code == enhancing || code == nonenhancing || code == snfh;
  }
};

enum class Region { ET = 0, TC = 1, WT = 2 };
inline constexpr std::array<Region, 3> kAllRegions{Region::ET, Region::TC,
                                                   Region::WT};
std::string_view to_string(Region region);
Region region_from_string(std::string_view name);

/// Region membership: ET = {enhancing}; TC adds nonenhancing; WT adds SNFH.
/// Codes outside the map count as background and are reported once per call.
BinaryMask compose_region(const LabelVolume &volume, const LabelMap &map,
                          Region region);

/// ET, TC and WT masks in one pass (indexed by Region), warning at most once.
std::array<BinaryMask, 3> compose_all_regions(const LabelVolume &volume,
                                              const LabelMap &map);

/// Brain extent of a skull-stripped image: voxels with nonzero intensity.
BinaryMask derive_brain_mask(const IntensityVolume &volume);

/// Union of the brain masks of several aligned channels.
BinaryMask derive_brain_mask(std::span<const IntensityVolume> channels);

} // namespace lesioneval
