#include "lesioneval/volume.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace lesioneval {

void Geometry::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (dims[i] < 1)
      throw Error(ErrorCode::InvalidArgument, "volume dims must be >= 1");
    if (!(spacing[i] > 0.0) || !std::isfinite(spacing[i]))
      throw Error(ErrorCode::InvalidArgument,
                  "voxel spacing must be positive and finite");
  }
}

void require_aligned(const Geometry &a, const Geometry &b,
                     std::string_view what) {
  if (a.aligned_with(b))
    return;
  std::ostringstream os;
  os << what << ": geometries differ (" << a.dims[0] << 'x' << a.dims[1] << 'x'
     << a.dims[2] << " vs " << b.dims[0] << 'x' << b.dims[1] << 'x'
     << b.dims[2] << ")";
  throw Error(ErrorCode::Geometry, os.str());
}

std::size_t voxel_count(const BinaryMask &mask) {
  std::size_t n = 0;
  for (auto v : mask.data())
    n += v != 0;
  return n;
}

void LabelMap::validate() const {
  if (enhancing == 0 || nonenhancing == 0 || snfh == 0)
    throw Error(ErrorCode::InvalidArgument, "label codes must be nonzero");
  if (enhancing == nonenhancing || enhancing == snfh || nonenhancing == snfh)
    throw Error(ErrorCode::InvalidArgument, "label codes must be distinct");
}

std::string_view to_string(Region region) {
  switch (region) {
  case Region::ET: return "ET";
  case Region::TC: return "TC";
  case Region::WT: return "WT";
  }
  return "?";
}

Region region_from_string(std::string_view name) {
  if (name == "ET") return Region::ET;
  if (name == "TC") return Region::TC;
  if (name == "WT") return Region::WT;
  throw Error(ErrorCode::InvalidArgument,
              "unknown region '" + std::string(name) + "'");
}

BinaryMask compose_region(const LabelVolume &volume, const LabelMap &map,
                          Region region) {
  map.validate();
  BinaryMask mask(volume.geometry());
  const bool with_nonenhancing = region != Region::ET;
  const bool with_snfh = region == Region::WT;
  auto src = volume.data();
  auto dst = mask.data();
  std::size_t unknown = 0;
  std::int32_t first_unknown = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto code = src[i];
    if (code == 0)
      continue;
    if (code == map.enhancing)
      dst[i] = 1;
    else if (code == map.nonenhancing)
      dst[i] = with_nonenhancing;
    else if (code == map.snfh)
      dst[i] = with_snfh;
    else if (unknown++ == 0)
      first_unknown = code;
  }
  if (unknown > 0)
    warn("label volume has " + std::to_string(unknown) +
         " voxels with codes outside the label map (first: " +
         std::to_string(first_unknown) + "); treated as background");
  return mask;
}

std::array<BinaryMask, 3> compose_all_regions(const LabelVolume &volume,
                                              const LabelMap &map) {
  map.validate();
  std::array<BinaryMask, 3> masks{BinaryMask(volume.geometry()),
                                  BinaryMask(volume.geometry()),
                                  BinaryMask(volume.geometry())};
  auto src = volume.data();
  auto et = masks[0].data();
  auto tc = masks[1].data();
  auto wt = masks[2].data();
  std::size_t unknown = 0;
  std::int32_t first_unknown = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto code = src[i];
    if (code == 0)
      continue;
    if (code == map.enhancing) {
      et[i] = tc[i] = wt[i] = 1;
    } else if (code == map.nonenhancing) {
      tc[i] = wt[i] = 1;
    } else if (code == map.snfh) {
      wt[i] = 1;
    } else if (unknown++ == 0) {
      first_unknown = code;
    }
  }
  if (unknown > 0)
    warn("label volume has " + std::to_string(unknown) +
         " voxels with codes outside the label map (first: " +
         std::to_string(first_unknown) + "); treated as background");
  return masks;
}

BinaryMask derive_brain_mask(const IntensityVolume &volume) {
  BinaryMask mask(volume.geometry());
  auto src = volume.data();
  auto dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = std::fabs(src[i]) > 0.0f;
  return mask;
}

BinaryMask derive_brain_mask(std::span<const IntensityVolume> channels) {
  if (channels.empty())
    throw Error(ErrorCode::InvalidArgument, "no intensity channels given");
  BinaryMask mask = derive_brain_mask(channels.front());
  for (const auto &channel : channels.subspan(1)) {
    require_aligned(mask.geometry(), channel.geometry(), "brain mask channels");
    auto src = channel.data();
    auto dst = mask.data();
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] |= std::fabs(src[i]) > 0.0f;
  }
  return mask;
}

} // namespace lesioneval
