#include <doctest.h>

#include <random>

#include "lesioneval/abutment.hpp"
#include "lesioneval/phantom.hpp"
#include "oracle.hpp"

using namespace lesioneval;

namespace {

std::size_t brute_force_abutting(const LabelVolume &tumor, const BinaryMask &brain,
                                 const LabelMap &map, bool full) {
  const Geometry &g = tumor.geometry();
  std::size_t n = 0;
  for (long z = 0; z < static_cast<long>(g.dims[2]); ++z)
    for (long y = 0; y < static_cast<long>(g.dims[1]); ++y)
      for (long x = 0; x < static_cast<long>(g.dims[0]); ++x) {
        if (!map.is_tumor(tumor.at(x, y, z)))
          continue;
        bool edge = false;
        for (long dz = -1; dz <= 1; ++dz)
          for (long dy = -1; dy <= 1; ++dy)
            for (long dx = -1; dx <= 1; ++dx) {
              const long k = std::labs(dx) + std::labs(dy) + std::labs(dz);
              if (k == 0 || (!full && k != 1))
                continue;
              if (!oracle::in_bounds(g, x + dx, y + dy, z + dz) ||
                  !brain.at(x + dx, y + dy, z + dz))
                edge = true;
            }
        n += edge;
      }
  return n;
}

Phantom phantom(std::uint64_t seed) {
  PhantomSpec spec;
  spec.geometry = Geometry{{30, 28, 26}, {1, 1, 1.5}};
  spec.min_radius = 3;
  spec.max_radius = 5;
  spec.brain_semi_axes = {0.42, 0.42, 0.42};
  spec.max_lesions = 2;
  spec.seed = seed;
  return generate_phantom(spec);
}

AbutmentReport with_counts(std::size_t abutting, std::size_t wt, double vol) {
  AbutmentReport r;
  r.abutting_voxels = abutting;
  r.wt_voxels = wt;
  r.wt_volume_mm3 = vol;
  return r;
}

} // namespace

TEST_CASE("single voxel abutment") {
  Geometry g{{5, 5, 5}, {1, 1, 1}};
  const LabelMap map;
  BinaryMask brain(g, 1);
  LabelVolume tumor(g);
  tumor.at(2, 2, 2) = map.enhancing;
  auto r = count_abutting(tumor, brain, map);
  CHECK(r.abutting_voxels == 0);
  CHECK(r.wt_voxels == 1);

  brain.at(3, 2, 2) = 0;
  r = count_abutting(tumor, brain, map);
  CHECK(r.abutting_voxels == 1);
  CHECK(r.abutting_enhancing == 1);

  // A diagonal gap only counts under 26-adjacency.
  BinaryMask diag(g, 1);
  diag.at(3, 3, 2) = 0;
  CHECK(count_abutting(tumor, diag, map).abutting_voxels == 0);
  CHECK(count_abutting(tumor, diag, map, Adjacency::Full26).abutting_voxels == 1);

  // Touching the image border counts as abutting.
  LabelVolume border(g);
  border.at(0, 2, 2) = map.snfh;
  border.at(2, 2, 2) = map.nonenhancing;
  border.at(2, 2, 4) = 99; // unknown code: not tumor
  r = count_abutting(border, BinaryMask(g, 1), map);
  CHECK(r.abutting_voxels == 1);
  CHECK(r.abutting_snfh == 1);
  CHECK(r.abutting_nonenhancing == 0);
  CHECK(r.wt_voxels == 2);

  CHECK_THROWS_AS(count_abutting(tumor, BinaryMask(Geometry{{5, 5, 4}, {1, 1, 1}}), map),
                  Error);
}

TEST_CASE("abutment matches brute-force neighbour enumeration") {
  const LabelMap map;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto p = phantom(seed);
    const auto brain = derive_brain_mask(p.brain);
    for (bool full : {false, true}) {
      const auto r = count_abutting(p.labels, brain, map,
                                    full ? Adjacency::Full26 : Adjacency::Face6);
      CHECK(r.abutting_voxels == brute_force_abutting(p.labels, brain, map, full));
      CHECK(r.abutting_voxels ==
            r.abutting_enhancing + r.abutting_nonenhancing + r.abutting_snfh);
      CHECK(r.abutting_voxels <= r.wt_voxels);
      CHECK(r.wt_volume_mm3 == doctest::Approx(1.5 * static_cast<double>(r.wt_voxels)));
    }
    CHECK(count_abutting(p.labels, brain, map, Adjacency::Full26).abutting_voxels >=
          count_abutting(p.labels, brain, map).abutting_voxels);
  }
}

TEST_CASE("abutment properties") {
  const LabelMap map;
  std::mt19937_64 rng(51);
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto p = phantom(seed);
    const auto brain = derive_brain_mask(p.brain);
    const auto base = count_abutting(p.labels, brain, map);

    // Relabelling tumor codes among themselves keeps the total.
    LabelVolume shuffled = p.labels;
    const std::int32_t codes[3] = {map.enhancing, map.nonenhancing, map.snfh};
    for (std::size_t i = 0; i < shuffled.size(); ++i)
      if (map.is_tumor(shuffled[i]))
        shuffled[i] = codes[rng() % 3];
    CHECK(count_abutting(shuffled, brain, map).abutting_voxels == base.abutting_voxels);

    // Removing brain voxels can only add abutting voxels.
    BinaryMask smaller = brain;
    for (std::size_t i = 0; i < smaller.size(); ++i)
      if (rng() % 10 == 0)
        smaller[i] = 0;
    CHECK(count_abutting(p.labels, smaller, map).abutting_voxels >= base.abutting_voxels);
  }
}

TEST_CASE("cohort summary") {
  const std::vector<AbutmentReport> r{with_counts(0, 10, 10), with_counts(4, 20, 20),
                                      with_counts(6, 30, 30)};
  const auto s = cohort_abutment_summary(r);
  CHECK(s.cases == 3);
  CHECK(s.cases_with_abutment == 2);
  CHECK(s.fraction == doctest::Approx(2.0 / 3.0));
  CHECK(*s.mean == 5.0);
  CHECK(*s.median == 5.0);

  const std::vector<AbutmentReport> none{with_counts(0, 10, 10), with_counts(0, 5, 5)};
  const auto z = cohort_abutment_summary(none);
  CHECK(z.fraction == 0.0);
  CHECK_FALSE(z.mean.has_value());
  CHECK_FALSE(z.median.has_value());

  try {
    cohort_abutment_summary(std::vector<AbutmentReport>{});
    FAIL("expected empty-input error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("abutment correlations") {
  std::vector<AbutmentReport> r;
  for (std::size_t k = 1; k <= 6; ++k)
    r.push_back(with_counts(2 * k, 10 * k, 10.0 * k));
  const auto c = correlate_abutment_volume(r);
  CHECK(c.r == doctest::Approx(1.0));
  CHECK(c.r_squared == doctest::Approx(1.0));

  // Zero-volume cases drop out of the log correlation with a warning.
  int warnings = 0;
  set_warning_handler([&](std::string_view) { ++warnings; });
  r.push_back(with_counts(0, 0, 0.0));
  const auto l = correlate_abutment_log_volume(r);
  set_warning_handler(nullptr);
  CHECK(l.n == 6);
  CHECK(warnings == 1);
  std::vector<double> x, y;
  for (std::size_t k = 1; k <= 6; ++k) {
    x.push_back(2.0 * k);
    y.push_back(std::log10(10.0 * k));
  }
  CHECK(l.r == doctest::Approx(pearson(x, y).r));

  std::vector<AbutmentReport> flat(4, with_counts(3, 10, 10));
  CHECK_THROWS_AS(correlate_abutment_volume(flat), Error);
}
