#include "lesioneval/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lesioneval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one line.
// f holds squared distances at sample k located at k * step; infinite samples
// carry no site. Scratch buffers are reused across lines.
struct Envelope1D {
  std::vector<std::size_t> sites;
  std::vector<double> bounds;
  std::vector<double> line;

  void run(std::vector<double> &f, double step) {
    const std::size_t n = f.size();
    sites.clear();
    bounds.clear();
    for (std::size_t q = 0; q < n; ++q) {
      if (f[q] == kInf)
        continue;
      const double xq = static_cast<double>(q) * step;
      double s = -kInf;
      while (!sites.empty()) {
        const std::size_t v = sites.back();
        const double xv = static_cast<double>(v) * step;
        s = ((f[q] + xq * xq) - (f[v] + xv * xv)) / (2.0 * (xq - xv));
        if (s > bounds.back())
          break;
        sites.pop_back();
        bounds.pop_back();
        s = -kInf;
      }
      sites.push_back(q);
      bounds.push_back(sites.size() == 1 ? -kInf : s);
    }
    if (sites.empty())
      return;
    line.assign(f.begin(), f.end());
    std::size_t k = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const double xp = static_cast<double>(p) * step;
      while (k + 1 < sites.size() && bounds[k + 1] < xp)
        ++k;
      const double d = xp - static_cast<double>(sites[k]) * step;
      f[p] = d * d + line[sites[k]];
    }
  }
};

} // namespace

BinaryMask surface_voxels(const BinaryMask &mask) {
  const Geometry &g = mask.geometry();
  const std::size_t nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
  const std::size_t sy = nx, sz = nx * ny;
  BinaryMask out(g);
  auto src = mask.data();
  auto dst = out.data();
  std::size_t i = 0;
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x, ++i) {
        if (!src[i])
          continue;
        const bool interior = x > 0 && x + 1 < nx && y > 0 && y + 1 < ny &&
                              z > 0 && z + 1 < nz && src[i - 1] &&
                              src[i + 1] && src[i - sy] && src[i + sy] &&
                              src[i - sz] && src[i + sz];
        dst[i] = !interior;
      }
  return out;
}

std::vector<double> squared_distance_transform(const BinaryMask &features) {
  const Geometry &g = features.geometry();
  std::vector<double> dist(g.voxel_count());
  auto src = features.data();
  for (std::size_t i = 0; i < dist.size(); ++i)
    dist[i] = src[i] ? 0.0 : kInf;

  const std::size_t strides[3] = {1, g.dims[0], g.dims[0] * g.dims[1]};
  Envelope1D envelope;
  std::vector<double> f;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t length = g.dims[axis];
    const std::size_t stride = strides[axis];
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    f.resize(length);
    for (std::size_t j = 0; j < g.dims[v]; ++j)
      for (std::size_t i = 0; i < g.dims[u]; ++i) {
        const std::size_t base = i * strides[u] + j * strides[v];
        bool any = false;
        for (std::size_t k = 0; k < length; ++k) {
          f[k] = dist[base + k * stride];
          any |= f[k] != kInf;
        }
        if (!any)
          continue;
        envelope.run(f, g.spacing[axis]);
        for (std::size_t k = 0; k < length; ++k)
          dist[base + k * stride] = f[k];
      }
  }
  return dist;
}

double percentile(std::vector<double> &values, double q) {
  if (values.empty())
    throw Error(ErrorCode::EmptyInput, "percentile of an empty set");
  if (!(q > 0.0 && q <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "percentile must be in (0, 1]");
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double a = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size())
    return a;
  const double b = *std::min_element(values.begin() + lo + 1, values.end());
  return a + frac * (b - a);
}

BinaryMask crop(const BinaryMask &mask, const Box &box) {
  Geometry g = mask.geometry();
  g.dims = box.extent();
  BinaryMask out(g);
  const Geometry &src = mask.geometry();
  std::size_t o = 0;
  for (std::size_t z = box.lo[2]; z <= box.hi[2]; ++z)
    for (std::size_t y = box.lo[1]; y <= box.hi[1]; ++y) {
      const std::size_t row = src.index(box.lo[0], y, z);
      for (std::size_t x = 0; x < g.dims[0]; ++x)
        out[o++] = mask[row + x];
    }
  return out;
}

bool union_bounding_box(const BinaryMask &a, const BinaryMask &b, Box &out) {
  require_aligned(a.geometry(), b.geometry(), "bounding box");
  const Geometry &g = a.geometry();
  bool found = false;
  std::size_t i = 0;
  for (std::size_t z = 0; z < g.dims[2]; ++z)
    for (std::size_t y = 0; y < g.dims[1]; ++y)
      for (std::size_t x = 0; x < g.dims[0]; ++x, ++i) {
        if (!a[i] && !b[i])
          continue;
        if (!found) {
          out.lo = out.hi = {x, y, z};
          found = true;
        } else {
          out.expand({x, y, z});
        }
      }
  return found;
}

namespace {

std::vector<double> directed_distances(const BinaryMask &from_surface,
                                       const BinaryMask &to_surface) {
  const auto sq = squared_distance_transform(to_surface);
  std::vector<double> out;
  auto src = from_surface.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    if (src[i])
      out.push_back(std::sqrt(sq[i]));
  return out;
}

} // namespace

double hausdorff_percentile(const BinaryMask &a, const BinaryMask &b, double q) {
  require_aligned(a.geometry(), b.geometry(), "hausdorff distance");
  Box box;
  union_bounding_box(a, b, box);
  // One voxel of padding keeps border voxels' out-of-crop neighbours unset,
  // exactly as they are in the full grid.
  box = box.padded(1, a.geometry().dims);
  const BinaryMask ca = crop(a, box);
  const BinaryMask cb = crop(b, box);
  const BinaryMask sa = surface_voxels(ca);
  const BinaryMask sb = surface_voxels(cb);
  if (voxel_count(sa) == 0 || voxel_count(sb) == 0)
    throw Error(ErrorCode::EmptyMask, "hausdorff distance of an empty mask");
  auto dab = directed_distances(sa, sb);
  auto dba = directed_distances(sb, sa);
  return std::max(percentile(dab, q), percentile(dba, q));
}

} // namespace lesioneval
