#include <doctest.h>

#include <random>

#include "lesioneval/lesion.hpp"
#include "oracle.hpp"

using namespace lesioneval;

namespace {

BinaryMask mask_with(const Geometry &g, std::initializer_list<Index3> voxels) {
  BinaryMask m(g);
  for (const auto &v : voxels)
    m.at(v[0], v[1], v[2]) = 1;
  return m;
}

void check_field_invariants(const LesionField &f, const BinaryMask &source) {
  std::vector<std::size_t> counts(f.lesion_count() + 1, 0);
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    REQUIRE(f.ids[i] <= f.lesion_count());
    ++counts[f.ids[i]];
    CHECK((f.ids[i] != 0) == (source[i] != 0));
  }
  for (std::size_t k = 0; k < f.lesion_count(); ++k) {
    CHECK(f.lesions[k].id == k + 1);
    CHECK(f.lesions[k].voxel_count == counts[k + 1]);
    CHECK(counts[k + 1] > 0);
  }
}

} // namespace

TEST_CASE("dilate basics") {
  Geometry g{{5, 5, 5}, {1, 1, 1}};
  CHECK(voxel_count(dilate(BinaryMask(g), 1)) == 0);
  CHECK(voxel_count(dilate(mask_with(g, {{2, 2, 2}}), 1)) == 27);
  CHECK(voxel_count(dilate(mask_with(g, {{0, 0, 0}}), 1)) == 8);
  CHECK(voxel_count(dilate(mask_with(g, {{2, 2, 2}}), 2)) == 125);
  CHECK_THROWS_AS(dilate(BinaryMask(g), 0), Error);
}

TEST_CASE("dilate matches the per-voxel neighbourhood oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Geometry g{{16, 16, 16}, {1, 1, 1}};
    const double p = 0.002 + 0.03 * (trial % 5);
    const auto m = oracle::random_mask(rng, g, p);
    const std::size_t r = 1 + trial % 3;
    CHECK(dilate(m, r) == oracle::dilate(m, static_cast<long>(r)));
  }
  // Non-cubic grids exercise each axis pass separately.
  const Geometry odd{{3, 11, 7}, {1, 1, 1}};
  const auto m = oracle::random_mask(rng, odd, 0.05);
  CHECK(dilate(m, 1) == oracle::dilate(m, 1));
  CHECK(dilate(m, 4) == oracle::dilate(m, 4));
}

TEST_CASE("dilate is extensive and monotone") {
  std::mt19937_64 rng(2);
  const Geometry g{{12, 10, 8}, {1, 1, 1}};
  for (int trial = 0; trial < 40; ++trial) {
    const auto b = oracle::random_mask(rng, g, 0.05);
    BinaryMask a = b;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (rng() % 2)
        a[i] = 0;
    const auto da = dilate(a, 1);
    const auto db = dilate(b, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(da[i] >= a[i]);
      CHECK(da[i] <= db[i]);
    }
  }
}

TEST_CASE("connected components basics") {
  Geometry g{{4, 4, 4}, {1, 1, 1}};
  CHECK(connected_components_26(BinaryMask(g)).lesion_count() == 0);
  // Corner adjacency joins voxels under 26-connectivity.
  CHECK(connected_components_26(mask_with(g, {{0, 0, 0}, {1, 1, 1}})).lesion_count() == 1);
  CHECK(connected_components_26(mask_with(g, {{0, 0, 0}, {2, 0, 0}})).lesion_count() == 2);
  const auto f = connected_components_26(mask_with(g, {{3, 3, 3}, {0, 0, 1}, {3, 0, 0}}));
  // Ids follow (z, y, x) order of first voxels.
  CHECK(f.ids[g.index(3, 0, 0)] == 1);
  CHECK(f.ids[g.index(0, 0, 1)] == 2);
  CHECK(f.ids[g.index(3, 3, 3)] == 3);
  CHECK(f.lesions[0].bbox == Box{{3, 0, 0}, {3, 0, 0}});
}

TEST_CASE("connected components match the BFS oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Geometry g{{20, 20, 20}, {1, 1, 1}};
    const auto m = oracle::random_mask(rng, g, 0.05 + 0.04 * (trial % 6));
    const auto f = connected_components_26(m);
    const auto ref = oracle::bfs_components(m);
    // Same scan-order convention, so ids agree exactly.
    CHECK(f.ids == ref);
    CHECK(f.lesion_count() == oracle::max_id(ref));
    check_field_invariants(f, m);
    for (const auto &l : f.lesions) {
      Box box{{99, 99, 99}, {0, 0, 0}};
      for (std::size_t i = 0; i < m.size(); ++i)
        if (f.ids[i] == l.id)
          for (int k = 0; k < 3; ++k) {
            box.lo[k] = std::min(box.lo[k], g.coords(i)[k]);
            box.hi[k] = std::max(box.hi[k], g.coords(i)[k]);
          }
      CHECK(l.bbox == box);
    }
  }
}

TEST_CASE("lesion identification merges across one-voxel gaps") {
  Geometry g{{6, 3, 3}, {1, 1, 1}};
  const auto merged = identify_gt_lesions(mask_with(g, {{0, 0, 0}, {2, 0, 0}}));
  CHECK(merged.lesion_count() == 1);
  CHECK(merged.lesions[0].voxel_count == 2);
  const auto split = identify_gt_lesions(mask_with(g, {{0, 0, 0}, {4, 0, 0}}));
  CHECK(split.lesion_count() == 2);
  // Diagonal gap of one voxel also merges.
  CHECK(identify_gt_lesions(mask_with(g, {{0, 0, 0}, {2, 2, 2}})).lesion_count() == 1);
}

TEST_CASE("lesion identification matches the composed oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const Geometry g{{18, 14, 12}, {1, 1, 1}};
    const auto m = oracle::random_mask(rng, g, 0.005 + 0.01 * (trial % 5));
    const auto f = identify_gt_lesions(m);
    CHECK(f.ids == oracle::identify(m));
    check_field_invariants(f, m);
    CHECK(f.lesion_count() <= connected_components_26(m).lesion_count());
  }
}

TEST_CASE("small lesion filter") {
  Geometry g{{20, 20, 3}, {1, 1, 1}};
  BinaryMask m(g);
  // 49 voxels (7x7) and 50 voxels (10x5), far apart.
  for (std::size_t y = 0; y < 7; ++y)
    for (std::size_t x = 0; x < 7; ++x)
      m.at(x, y, 0) = 1;
  for (std::size_t y = 10; y < 15; ++y)
    for (std::size_t x = 10; x < 20; ++x)
      m.at(x, y, 2) = 1;
  const auto field = identify_gt_lesions(m);
  REQUIRE(field.lesion_count() == 2);
  const auto kept = filter_small_lesions(field, 50);
  REQUIRE(kept.lesion_count() == 1);
  CHECK(kept.lesions[0].voxel_count == 50);
  CHECK(kept.lesions[0].id == 1);
  REQUIRE(kept.removed.size() == 1);
  CHECK(kept.removed[0].voxel_count == 49);
  CHECK(kept.ids[g.index(0, 0, 0)] == 0);
  CHECK(kept.ids[g.index(10, 10, 2)] == 1);
  REQUIRE(kept.excluded.size() == m.size());
  CHECK(kept.excluded[g.index(0, 0, 0)] == 1);
  CHECK(kept.excluded[g.index(10, 10, 2)] == 0);

  const auto same = filter_small_lesions(field, 1);
  CHECK(same.ids == field.ids);
  CHECK(same.lesions == field.lesions);
  CHECK(same.excluded.empty());

  CHECK(filter_small_lesions(kept, 50) == kept);
  CHECK_THROWS_AS(filter_small_lesions(field, 0), Error);
}

TEST_CASE("filter is idempotent and renumbers consecutively on random fields") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Geometry g{{16, 16, 16}, {1, 1, 1}};
    const auto m = oracle::random_blobs(rng, g, 6, 3.0, 0.002);
    const auto f = identify_gt_lesions(m);
    const std::size_t threshold = 1 + trial * 3;
    const auto once = filter_small_lesions(f, threshold);
    CHECK(filter_small_lesions(once, threshold) == once);
    for (std::size_t k = 0; k < once.lesion_count(); ++k) {
      CHECK(once.lesions[k].id == k + 1);
      CHECK(once.lesions[k].voxel_count >= threshold);
    }
    CHECK(once.lesion_count() + once.removed.size() == f.lesion_count());
  }
}

TEST_CASE("assign_by_parent groups voxels by their containing lesion") {
  Geometry g{{12, 3, 3}, {1, 1, 1}};
  // Parent: one long bar. Child: two voxels at opposite ends.
  BinaryMask parent(g);
  for (std::size_t x = 0; x < 12; ++x)
    parent.at(x, 1, 1) = 1;
  const auto parent_field = identify_gt_lesions(parent);
  const auto child = mask_with(g, {{0, 1, 1}, {11, 1, 1}});
  CHECK(identify_gt_lesions(child).lesion_count() == 2);
  const auto grouped = assign_by_parent(child, parent_field);
  CHECK(grouped.lesion_count() == 1);
  CHECK(grouped.lesions[0].voxel_count == 2);
}

TEST_CASE("box helpers") {
  Box b{{2, 2, 2}, {3, 4, 5}};
  CHECK(b.extent() == Index3{2, 3, 4});
  const auto p = b.padded(3, {6, 6, 6});
  CHECK(p.lo == Index3{0, 0, 0});
  CHECK(p.hi == Index3{5, 5, 5});
  Box c{{0, 5, 1}, {1, 5, 1}};
  b.merge(c);
  CHECK(b.lo == Index3{0, 2, 1});
  CHECK(b.hi == Index3{3, 5, 5});
}
