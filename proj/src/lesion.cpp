#include "lesioneval/lesion.hpp"

#include <algorithm>
#include <numeric>

namespace lesioneval {

void Box::expand(const Index3 &p) {
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::min(lo[a], p[a]);
    hi[a] = std::max(hi[a], p[a]);
  }
}

void Box::merge(const Box &other) {
  expand(other.lo);
  expand(other.hi);
}

Box Box::padded(std::size_t margin, const Index3 &dims) const {
  Box out = *this;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = lo[a] >= margin ? lo[a] - margin : 0;
    out.hi[a] = std::min(hi[a] + margin, dims[a] - 1);
  }
  return out;
}

BinaryMask LesionField::mask() const {
  BinaryMask out(geometry);
  for (std::size_t i = 0; i < ids.size(); ++i)
    out[i] = ids[i] != 0;
  return out;
}

namespace {

// One axis of a separable max filter: dst[i] = any(src[i-r .. i+r]) along
// lines of `length` voxels spaced `stride` apart.
void dilate_axis(std::span<const std::uint8_t> src, std::span<std::uint8_t> dst,
                 const Index3 &dims, int axis, std::size_t radius) {
  const std::size_t strides[3] = {1, dims[0], dims[0] * dims[1]};
  const std::size_t length = dims[axis];
  const std::size_t stride = strides[axis];
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  std::vector<std::size_t> prefix(length + 1);
  for (std::size_t j = 0; j < dims[v]; ++j) {
    for (std::size_t i = 0; i < dims[u]; ++i) {
      const std::size_t base = i * strides[u] + j * strides[v];
      bool any = false;
      for (std::size_t k = 0; k < length; ++k) {
        prefix[k + 1] = prefix[k] + (src[base + k * stride] != 0);
        any |= src[base + k * stride] != 0;
      }
      if (!any) {
        for (std::size_t k = 0; k < length; ++k)
          dst[base + k * stride] = 0;
        continue;
      }
      for (std::size_t k = 0; k < length; ++k) {
        const std::size_t a = k >= radius ? k - radius : 0;
        const std::size_t b = std::min(length, k + radius + 1);
        dst[base + k * stride] = prefix[b] > prefix[a];
      }
    }
  }
}

std::uint32_t find_root(std::vector<std::uint32_t> &parent, std::uint32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Builds lesion table (counts and boxes) from a consecutive id grid.
std::vector<LesionInfo> tabulate(const Geometry &g,
                                 const std::vector<std::uint32_t> &ids,
                                 std::uint32_t count) {
  std::vector<LesionInfo> lesions(count);
  std::vector<bool> seen(count, false);
  for (std::uint32_t k = 0; k < count; ++k)
    lesions[k].id = k + 1;
  std::size_t i = 0;
  for (std::size_t z = 0; z < g.dims[2]; ++z)
    for (std::size_t y = 0; y < g.dims[1]; ++y)
      for (std::size_t x = 0; x < g.dims[0]; ++x, ++i) {
        const auto id = ids[i];
        if (id == 0)
          continue;
        auto &l = lesions[id - 1];
        ++l.voxel_count;
        if (!seen[id - 1]) {
          seen[id - 1] = true;
          l.bbox.lo = l.bbox.hi = {x, y, z};
        } else {
          l.bbox.expand({x, y, z});
        }
      }
  return lesions;
}

// Renumbers arbitrary nonzero labels to 1..L in scan order of first voxel.
std::uint32_t renumber_in_scan_order(std::vector<std::uint32_t> &ids,
                                     std::uint32_t max_label) {
  std::vector<std::uint32_t> remap(static_cast<std::size_t>(max_label) + 1, 0);
  std::uint32_t next = 0;
  for (auto &id : ids) {
    if (id == 0)
      continue;
    auto &m = remap[id];
    if (m == 0)
      m = ++next;
    id = m;
  }
  return next;
}

} // namespace

BinaryMask dilate(const BinaryMask &mask, std::size_t radius) {
  if (radius == 0)
    throw Error(ErrorCode::InvalidArgument, "dilation radius must be >= 1");
  const Index3 &dims = mask.geometry().dims;
  BinaryMask a(mask.geometry());
  BinaryMask b(mask.geometry());
  dilate_axis(mask.data(), a.data(), dims, 0, radius);
  dilate_axis(a.data(), b.data(), dims, 1, radius);
  dilate_axis(b.data(), a.data(), dims, 2, radius);
  return a;
}

LesionField connected_components_26(const BinaryMask &mask) {
  const Geometry &g = mask.geometry();
  const auto nx = static_cast<std::ptrdiff_t>(g.dims[0]);
  const auto ny = static_cast<std::ptrdiff_t>(g.dims[1]);
  const auto nz = static_cast<std::ptrdiff_t>(g.dims[2]);
  const std::ptrdiff_t sy = nx;
  const std::ptrdiff_t sz = nx * ny;

  LesionField field;
  field.geometry = g;
  field.ids.assign(g.voxel_count(), 0);
  auto &labels = field.ids;
  std::vector<std::uint32_t> parent{0};

  auto src = mask.data();
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < nz; ++z)
    for (std::ptrdiff_t y = 0; y < ny; ++y)
      for (std::ptrdiff_t x = 0; x < nx; ++x, ++i) {
        if (!src[i])
          continue;
        std::uint32_t label = 0;
        // The 13 neighbours that precede (x, y, z) in scan order.
        for (std::ptrdiff_t dz = -1; dz <= 0; ++dz) {
          if (z + dz < 0)
            continue;
          for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
            if (dz == 0 && dy > 0)
              break;
            if (y + dy < 0 || y + dy >= ny)
              continue;
            for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
              if (dz == 0 && dy == 0 && dx >= 0)
                break;
              if (x + dx < 0 || x + dx >= nx)
                continue;
              const auto j = static_cast<std::size_t>(
                  static_cast<std::ptrdiff_t>(i) + dz * sz + dy * sy + dx);
              const std::uint32_t other = labels[j];
              if (other == 0)
                continue;
              if (label == 0) {
                label = find_root(parent, other);
              } else {
                const auto ra = find_root(parent, label);
                const auto rb = find_root(parent, other);
                if (ra != rb) {
                  parent[std::max(ra, rb)] = std::min(ra, rb);
                  label = std::min(ra, rb);
                }
              }
            }
          }
        }
        if (label == 0) {
          label = static_cast<std::uint32_t>(parent.size());
          parent.push_back(label);
        }
        labels[i] = label;
      }

  for (auto &l : labels)
    if (l != 0)
      l = find_root(parent, l);
  const auto count = renumber_in_scan_order(
      labels, static_cast<std::uint32_t>(parent.size() - 1));
  field.lesions = tabulate(g, labels, count);
  return field;
}

LesionField identify_gt_lesions(const BinaryMask &mask) {
  LesionField field = connected_components_26(dilate(mask, 1));
  auto src = mask.data();
  for (std::size_t i = 0; i < field.ids.size(); ++i)
    if (!src[i])
      field.ids[i] = 0;
  const auto max_label = static_cast<std::uint32_t>(field.lesions.size());
  const auto count = renumber_in_scan_order(field.ids, max_label);
  field.lesions = tabulate(field.geometry, field.ids, count);
  return field;
}

LesionField assign_by_parent(const BinaryMask &mask, const LesionField &parent) {
  require_aligned(mask.geometry(), parent.geometry, "assign_by_parent");
  LesionField field;
  field.geometry = mask.geometry();
  field.ids.assign(mask.size(), 0);
  auto src = mask.data();
  std::size_t orphans = 0;
  for (std::size_t i = 0; i < field.ids.size(); ++i) {
    if (!src[i])
      continue;
    field.ids[i] = parent.ids[i];
    orphans += parent.ids[i] == 0;
  }
  if (orphans > 0)
    warn(std::to_string(orphans) +
         " voxels lie outside every parent lesion and were left unassigned");
  std::uint32_t max_label = 0;
  if (!parent.lesions.empty())
    max_label = parent.lesions.back().id;
  const auto count = renumber_in_scan_order(field.ids, max_label);
  field.lesions = tabulate(field.geometry, field.ids, count);
  return field;
}

LesionField filter_small_lesions(const LesionField &field,
                                 std::size_t min_voxels) {
  if (min_voxels == 0)
    throw Error(ErrorCode::InvalidArgument, "min_voxels must be >= 1");
  LesionField out;
  out.geometry = field.geometry;
  out.removed = field.removed;
  std::vector<std::uint32_t> remap(field.lesions.size() + 1, 0);
  std::uint32_t next = 0;
  for (const auto &l : field.lesions) {
    if (l.voxel_count < min_voxels) {
      out.removed.push_back(l);
      continue;
    }
    remap[l.id] = ++next;
    LesionInfo kept = l;
    kept.id = next;
    out.lesions.push_back(kept);
  }
  out.ids.resize(field.ids.size());
  std::transform(field.ids.begin(), field.ids.end(), out.ids.begin(),
                 [&remap](std::uint32_t id) { return remap[id]; });
  out.excluded = field.excluded;
  if (out.removed.size() > field.removed.size()) {
    out.excluded.resize(field.ids.size(), 0);
    for (std::size_t i = 0; i < field.ids.size(); ++i)
      if (field.ids[i] != 0 && out.ids[i] == 0)
        out.excluded[i] = 1;
  }
  return out;
}

} // namespace lesioneval
