#include <doctest.h>

#include <cmath>
#include <random>

#include "lesioneval/distance.hpp"
#include "oracle.hpp"

using namespace lesioneval;

namespace {

BinaryMask cube(const Geometry &g, Index3 lo, Index3 hi) {
  BinaryMask m(g);
  for (std::size_t z = lo[2]; z <= hi[2]; ++z)
    for (std::size_t y = lo[1]; y <= hi[1]; ++y)
      for (std::size_t x = lo[0]; x <= hi[0]; ++x)
        m.at(x, y, z) = 1;
  return m;
}

BinaryMask non_empty_random(std::mt19937_64 &rng, const Geometry &g, double p) {
  auto m = oracle::random_mask(rng, g, p);
  m[rng() % m.size()] = 1;
  return m;
}

} // namespace

TEST_CASE("surface voxels") {
  Geometry g{{5, 5, 5}, {1, 1, 1}};
  BinaryMask single(g);
  single.at(2, 2, 2) = 1;
  CHECK(surface_voxels(single) == single);
  CHECK(voxel_count(surface_voxels(cube(g, {1, 1, 1}, {3, 3, 3}))) == 26);
  // Voxels on the grid edge are surface even if the mask fills the grid.
  BinaryMask full(g, 1);
  CHECK(voxel_count(surface_voxels(full)) == 125 - 27);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Geometry r{{9, 7, 8}, {1, 1, 1}};
    const auto m = oracle::random_mask(rng, r, 0.2 + 0.1 * (trial % 6));
    CHECK(surface_voxels(m) == oracle::surface(m));
  }
}

TEST_CASE("squared distance transform matches brute force") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sp(0.4, 2.5);
  for (int trial = 0; trial < 25; ++trial) {
    const Geometry g{{9, 6, 7}, {sp(rng), sp(rng), sp(rng)}};
    const auto m = non_empty_random(rng, g, 0.01 + 0.02 * (trial % 4));
    const auto dt = squared_distance_transform(m);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto p = g.coords(i);
      double best = INFINITY;
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (!m[j])
          continue;
        const auto c = g.coords(j);
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double d = (double(p[k]) - double(c[k])) * g.spacing[k];
          s += d * d;
        }
        best = std::min(best, s);
      }
      CHECK(dt[i] == doctest::Approx(best).epsilon(1e-12));
    }
  }
  const Geometry g{{3, 3, 3}, {1, 1, 1}};
  const auto empty = squared_distance_transform(BinaryMask(g));
  CHECK(std::isinf(empty[0]));
}

TEST_CASE("percentile interpolates between closest ranks") {
  std::vector<double> v{4, 1, 3, 2, 5};
  CHECK(percentile(v, 0.5) == 3.0);
  CHECK(percentile(v, 1.0) == 5.0);
  CHECK(percentile(v, 0.95) == doctest::Approx(4.8));
  std::vector<double> one{7.5};
  CHECK(percentile(one, 0.95) == 7.5);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 60);
    for (auto &x : xs)
      x = u(rng);
    const double q = trial % 2 ? 0.95 : u(rng) / 100.0 + 1e-9;
    const double expected = oracle::sorted_percentile(xs, q);
    CHECK(percentile(xs, q) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hd95 simple cases") {
  Geometry g{{8, 3, 3}, {1, 1, 1}};
  BinaryMask a(g), b(g);
  a.at(1, 1, 1) = 1;
  b.at(4, 1, 1) = 1;
  CHECK(hd95(a, b) == 3.0);
  CHECK(hd95(a, a) == 0.0);

  Geometry aniso{{8, 3, 3}, {0.5, 1, 1}};
  BinaryMask c(aniso), d(aniso);
  c.at(1, 1, 1) = 1;
  d.at(4, 1, 1) = 1;
  CHECK(hd95(c, d) == 1.5);

  CHECK_THROWS_AS(hd95(a, BinaryMask(g)), Error);
  try {
    hd95(BinaryMask(g), b);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::EmptyMask);
  }
  try {
    hd95(a, c);
    FAIL("expected geometry error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Geometry);
  }
}

TEST_CASE("hd95 matches all-pairs brute force and is symmetric") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> sp(0.5, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Geometry g{{14, 12, 10},
                     trial % 3 ? std::array<double, 3>{1, 1, 1}
                               : std::array<double, 3>{sp(rng), sp(rng), sp(rng)}};
    const auto a = trial % 2 ? non_empty_random(rng, g, 0.03)
                             : oracle::random_blobs(rng, g, 3, 3.5, 0.001);
    auto b = oracle::random_blobs(rng, g, 3, 3.5, 0.002);
    b[rng() % b.size()] = 1;
    if (voxel_count(a) == 0)
      continue;
    const double q = trial % 4 == 0 ? 1.0 : 0.95;
    const double fast = hausdorff_percentile(a, b, q);
    CHECK(fast == doctest::Approx(oracle::hausdorff(a, b, q)).epsilon(1e-12));
    CHECK(hausdorff_percentile(b, a, q) == fast);
    CHECK(hausdorff_percentile(a, a, q) == 0.0);
    // Percentile never exceeds the full Hausdorff distance.
    CHECK(hausdorff_percentile(a, b, 0.95) <= hausdorff_percentile(a, b, 1.0));
  }
}

TEST_CASE("crop and union bounding box") {
  Geometry g{{6, 6, 6}, {1, 2, 3}};
  BinaryMask a(g), b(g);
  a.at(1, 2, 3) = 1;
  b.at(4, 0, 5) = 1;
  Box box;
  REQUIRE(union_bounding_box(a, b, box));
  CHECK(box.lo == Index3{1, 0, 3});
  CHECK(box.hi == Index3{4, 2, 5});
  const auto c = crop(a, box);
  CHECK(c.geometry().dims == Index3{4, 3, 3});
  CHECK(c.geometry().spacing == g.spacing);
  CHECK(c.at(0, 2, 0) == 1);
  CHECK(voxel_count(c) == 1);
  CHECK_FALSE(union_bounding_box(BinaryMask(g), BinaryMask(g), box));
}
