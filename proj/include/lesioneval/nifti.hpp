/**
 * @file nifti.hpp
 * @brief NIfTI-1 reader and writer for single-frame 3D volumes.
 *
 * Supports uint8/int8/int16/uint16/int32/float32/float64 voxel data, both
 * byte orders, single-file (n+1) and header/image pair (ni1) layouts, with or
 * without gzip compression. The affine is read and kept for reference only;
 * volumes are never resliced.
 */
#pragma once

#include <array>
#include <filesystem>

#include "lesioneval/volume.hpp"

namespace lesioneval {

struct NiftiInfo {
  Geometry geometry;
  int datatype = 0;
  double scl_slope = 0.0;
  double scl_inter = 0.0;
  int qform_code = 0;
  int sform_code = 0;
  std::array<std::array<double, 4>, 3> srow{}; // sform rows
};

/// Reads only the header. Throws Error(Format) or Error(UnsupportedShape).
NiftiInfo read_nifti_info(const std::filesystem::path &path);

/// Loads a label volume. Scaled values must lie within 1e-6 of a
/// non-negative integer, otherwise Error(LabelDomain) is thrown.
LabelVolume load_label_nifti(const std::filesystem::path &path);

IntensityVolume load_intensity_nifti(const std::filesystem::path &path);

/// Writes a single-file NIfTI-1 volume; gzip-compressed if the path ends in
/// ".gz". Labels are stored as int16 when every code fits, else int32.
void write_nifti(const LabelVolume &volume, const std::filesystem::path &path);
void write_nifti(const IntensityVolume &volume,
                 const std::filesystem::path &path);

} // namespace lesioneval
