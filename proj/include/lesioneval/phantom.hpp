/**
 * @file phantom.hpp
 * @brief Seeded synthetic label volumes and brain images for testing.
 *
 * A phantom is an ellipsoidal "brain" image plus a set of spherical lesions.
 * Each lesion is layered: an enhancing core, a nonenhancing shell and an SNFH
 * halo. Calcified lesions replace the enhancing core with nonenhancing tissue.
 * Lesions are spaced so that their radius-1 dilations never touch, which keeps
 * them distinct under lesion identification.
 */
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lesioneval/volume.hpp"

namespace lesioneval {

/// Deterministic, platform-independent generator (SplitMix64).
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform(); ///< [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi); ///< inclusive

private:
  std::uint64_t state_;
};

struct PhantomSpec {
  Geometry geometry{{64, 64, 64}, {1.0, 1.0, 1.0}};
  std::size_t min_lesions = 1;
  std::size_t max_lesions = 3;
  double min_radius = 4.0; // voxels, outer (SNFH) radius
  double max_radius = 8.0;
  /// Relative radial thickness of enhancing core, nonenhancing shell, SNFH.
  std::array<double, 3> composition{0.4, 0.3, 0.3};
  double calcified_probability = 0.0;
  std::array<double, 3> brain_center{0.5, 0.5, 0.5};    // fraction of dims
  std::array<double, 3> brain_semi_axes{0.45, 0.45, 0.45}; // fraction of dims
  LabelMap labels;
  std::uint64_t seed = 0;
  std::size_t max_attempts = 1000; // per lesion

  void validate() const;
};

struct PlacedLesion {
  std::array<double, 3> center{};
  double radius = 0.0;
  bool calcified = false;
};

struct Phantom {
  LabelVolume labels;
  IntensityVolume brain;
  std::vector<PlacedLesion> lesions;
};

/// Throws Error(Placement) if a lesion cannot be placed within
/// spec.max_attempts tries.
Phantom generate_phantom(const PhantomSpec &spec);

struct Perturbation {
  enum class Kind { Dilate, Erode, Translate, DropLesion, AddFalsePositive };
  Kind kind = Kind::Dilate;
  std::size_t amount = 1;            // dilate/erode radius, FP blob radius
  std::array<int, 3> offset{};       // translate
  std::size_t lesion = 0;            // drop index
};

/// Parses "dilate:R", "erode:R", "translate:DX,DY,DZ", "drop:K", "fp:R".
Perturbation parse_perturbation(const std::string &text);
std::string to_string(const Perturbation &p);

/// Applies perturbations in order to a copy of the phantom's labels. The
/// returned strings describe each applied step.
LabelVolume perturb(const Phantom &phantom, const std::vector<Perturbation> &steps,
                    const LabelMap &map, std::uint64_t seed,
                    std::vector<std::string> *provenance = nullptr);

} // namespace lesioneval
