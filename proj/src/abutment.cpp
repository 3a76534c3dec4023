#include "lesioneval/abutment.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lesioneval {

AbutmentReport count_abutting(const LabelVolume &tumor, const BinaryMask &brain,
                              const LabelMap &map, Adjacency adjacency) {
  map.validate();
  require_aligned(tumor.geometry(), brain.geometry(), "count_abutting");
  const Geometry &g = tumor.geometry();
  const auto nx = static_cast<std::ptrdiff_t>(g.dims[0]);
  const auto ny = static_cast<std::ptrdiff_t>(g.dims[1]);
  const auto nz = static_cast<std::ptrdiff_t>(g.dims[2]);
  const bool full = adjacency == Adjacency::Full26;

  AbutmentReport report;
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < nz; ++z)
    for (std::ptrdiff_t y = 0; y < ny; ++y)
      for (std::ptrdiff_t x = 0; x < nx; ++x, ++i) {
        const auto code = tumor[i];
        if (code == 0 || !map.is_tumor(code))
          continue;
        ++report.wt_voxels;
        bool abuts = false;
        for (std::ptrdiff_t dz = -1; dz <= 1 && !abuts; ++dz)
          for (std::ptrdiff_t dy = -1; dy <= 1 && !abuts; ++dy)
            for (std::ptrdiff_t dx = -1; dx <= 1 && !abuts; ++dx) {
              const int offsets = (dx != 0) + (dy != 0) + (dz != 0);
              if (offsets == 0 || (!full && offsets != 1))
                continue;
              const auto xx = x + dx, yy = y + dy, zz = z + dz;
              if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny ||
                  zz >= nz) {
                abuts = true;
                break;
              }
              abuts = !brain.at(static_cast<std::size_t>(xx),
                                static_cast<std::size_t>(yy),
                                static_cast<std::size_t>(zz));
            }
        if (!abuts)
          continue;
        ++report.abutting_voxels;
        if (code == map.enhancing)
          ++report.abutting_enhancing;
        else if (code == map.nonenhancing)
          ++report.abutting_nonenhancing;
        else
          ++report.abutting_snfh;
      }
  report.wt_volume_mm3 =
      static_cast<double>(report.wt_voxels) * g.voxel_volume();
  return report;
}

AbutmentSummary cohort_abutment_summary(std::span<const AbutmentReport> reports) {
  if (reports.empty())
    throw Error(ErrorCode::EmptyInput, "no abutment reports");
  AbutmentSummary s;
  s.cases = reports.size();
  std::vector<double> counts;
  for (const auto &r : reports)
    if (r.abutting_voxels > 0)
      counts.push_back(static_cast<double>(r.abutting_voxels));
  s.cases_with_abutment = counts.size();
  s.fraction =
      static_cast<double>(counts.size()) / static_cast<double>(s.cases);
  if (!counts.empty()) {
    const auto stats = summarize(counts);
    s.mean = stats.mean;
    s.median = stats.median;
  }
  return s;
}

Correlation correlate_abutment_volume(std::span<const AbutmentReport> reports) {
  std::vector<double> abutting, volume;
  for (const auto &r : reports) {
    abutting.push_back(static_cast<double>(r.abutting_voxels));
    volume.push_back(static_cast<double>(r.wt_voxels));
  }
  return pearson(abutting, volume);
}

Correlation
correlate_abutment_log_volume(std::span<const AbutmentReport> reports) {
  std::vector<double> abutting, log_volume;
  std::size_t skipped = 0;
  for (const auto &r : reports) {
    if (!(r.wt_volume_mm3 > 0.0)) {
      ++skipped;
      continue;
    }
    abutting.push_back(static_cast<double>(r.abutting_voxels));
    log_volume.push_back(std::log10(r.wt_volume_mm3));
  }
  if (skipped > 0)
    warn("log-volume correlation skipped " + std::to_string(skipped) +
         " cases with zero tumor volume");
  return pearson(abutting, log_volume);
}

} // namespace lesioneval
