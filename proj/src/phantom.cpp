#include "lesioneval/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lesioneval/lesion.hpp"

namespace lesioneval {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::int64_t SplitMix64::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(next() % span);
}

void PhantomSpec::validate() const {
  geometry.validate();
  labels.validate();
  if (min_lesions > max_lesions)
    throw Error(ErrorCode::InvalidArgument, "lesion count range is empty");
  if (!(min_radius > 0.0) || min_radius > max_radius)
    throw Error(ErrorCode::InvalidArgument, "lesion radius range is empty");
  if (!(calcified_probability >= 0.0 && calcified_probability <= 1.0))
    throw Error(ErrorCode::InvalidArgument,
                "calcified probability must be in [0, 1]");
  double total = 0.0;
  for (double w : composition) {
    if (!(w >= 0.0))
      throw Error(ErrorCode::InvalidArgument,
                  "composition weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0))
    throw Error(ErrorCode::InvalidArgument, "composition weights sum to zero");
  for (int a = 0; a < 3; ++a)
    if (!(brain_semi_axes[a] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "brain semi-axes must be > 0");
  if (max_attempts == 0)
    throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
}

namespace {

// Gap between sphere surfaces large enough that radius-1 dilations of the
// voxelised spheres cannot touch (Chebyshev gap >= 3 needs Euclidean >= 3*sqrt(3)).
constexpr double kLesionGap = 6.0;

void paint_lesion(LabelVolume &labels, const PlacedLesion &lesion,
                  const std::array<double, 3> &composition,
                  const LabelMap &map) {
  const double total = composition[0] + composition[1] + composition[2];
  const double r_core = lesion.radius * composition[0] / total;
  const double r_shell = lesion.radius * (composition[0] + composition[1]) / total;
  const Geometry &g = labels.geometry();
  Index3 lo, hi;
  for (int a = 0; a < 3; ++a) {
    const double l = std::floor(lesion.center[a] - lesion.radius);
    const double h = std::ceil(lesion.center[a] + lesion.radius);
    lo[a] = static_cast<std::size_t>(std::max(0.0, l));
    hi[a] = static_cast<std::size_t>(
        std::min(static_cast<double>(g.dims[a] - 1), std::max(0.0, h)));
  }
  for (std::size_t z = lo[2]; z <= hi[2]; ++z)
    for (std::size_t y = lo[1]; y <= hi[1]; ++y)
      for (std::size_t x = lo[0]; x <= hi[0]; ++x) {
        const double dx = static_cast<double>(x) - lesion.center[0];
        const double dy = static_cast<double>(y) - lesion.center[1];
        const double dz = static_cast<double>(z) - lesion.center[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d > lesion.radius)
          continue;
        std::int32_t code = map.snfh;
        if (d <= r_core)
          code = lesion.calcified ? map.nonenhancing : map.enhancing;
        else if (d <= r_shell)
          code = map.nonenhancing;
        labels.at(x, y, z) = code;
      }
}

bool inside_ellipsoid(const std::array<double, 3> &p, const PhantomSpec &spec) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double dim = static_cast<double>(spec.geometry.dims[a]);
    const double c = spec.brain_center[a] * (dim - 1.0);
    const double r = spec.brain_semi_axes[a] * dim;
    const double t = (p[a] - c) / r;
    s += t * t;
  }
  return s <= 1.0;
}

// Random centre keeping the sphere one voxel away from the image border.
bool draw_center(SplitMix64 &rng, const Geometry &g, double radius,
                 std::array<double, 3> &center) {
  for (int a = 0; a < 3; ++a) {
    const double lo = radius + 1.0;
    const double hi = static_cast<double>(g.dims[a]) - 2.0 - radius;
    if (hi < lo)
      return false;
    center[a] = std::round(rng.uniform(lo, hi));
  }
  return true;
}

} // namespace

Phantom generate_phantom(const PhantomSpec &spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  Phantom ph;
  ph.labels = LabelVolume(spec.geometry);
  ph.brain = IntensityVolume(spec.geometry);

  const Geometry &g = spec.geometry;
  std::size_t i = 0;
  for (std::size_t z = 0; z < g.dims[2]; ++z)
    for (std::size_t y = 0; y < g.dims[1]; ++y)
      for (std::size_t x = 0; x < g.dims[0]; ++x, ++i) {
        const std::array<double, 3> p{static_cast<double>(x),
                                      static_cast<double>(y),
                                      static_cast<double>(z)};
        const double noise = rng.uniform();
        if (inside_ellipsoid(p, spec))
          ph.brain[i] = static_cast<float>(100.0 + 20.0 * noise);
      }

  const auto count = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(spec.min_lesions),
                      static_cast<std::int64_t>(spec.max_lesions)));
  for (std::size_t k = 0; k < count; ++k) {
    PlacedLesion lesion;
    lesion.radius = rng.uniform(spec.min_radius, spec.max_radius);
    lesion.calcified = rng.uniform() < spec.calcified_probability;
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed;
         ++attempt) {
      if (!draw_center(rng, g, lesion.radius, lesion.center))
        break;
      if (!inside_ellipsoid(lesion.center, spec))
        continue;
      placed = std::all_of(ph.lesions.begin(), ph.lesions.end(),
                           [&](const PlacedLesion &other) {
                             double d2 = 0.0;
                             for (int a = 0; a < 3; ++a) {
                               const double d = lesion.center[a] - other.center[a];
                               d2 += d * d;
                             }
                             const double need =
                                 lesion.radius + other.radius + kLesionGap;
                             return d2 > need * need;
                           });
    }
    if (!placed)
      throw Error(ErrorCode::Placement,
                  "could not place lesion " + std::to_string(k + 1) + " of " +
                      std::to_string(count));
    paint_lesion(ph.labels, lesion, spec.composition, spec.labels);
    ph.lesions.push_back(lesion);
  }
  return ph;
}

Perturbation parse_perturbation(const std::string &text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto parse_int = [&](std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorCode::InvalidArgument,
                  "bad perturbation argument in '" + text + "'");
    return v;
  };
  auto parse_count = [&](std::string_view s) {
    const auto v = parse_int(s);
    if (v < 0)
      throw Error(ErrorCode::InvalidArgument,
                  "negative perturbation argument in '" + text + "'");
    return static_cast<std::size_t>(v);
  };

  Perturbation p;
  if (kind == "dilate" || kind == "erode" || kind == "fp") {
    p.kind = kind == "dilate"  ? Perturbation::Kind::Dilate
             : kind == "erode" ? Perturbation::Kind::Erode
                               : Perturbation::Kind::AddFalsePositive;
    p.amount = arg.empty() ? (kind == "fp" ? 3 : 1) : parse_count(arg);
    if (p.amount == 0)
      throw Error(ErrorCode::InvalidArgument, "'" + text + "' needs a size >= 1");
  } else if (kind == "translate") {
    p.kind = Perturbation::Kind::Translate;
    std::istringstream is(arg);
    std::string part;
    int a = 0;
    while (std::getline(is, part, ',')) {
      if (a >= 3)
        throw Error(ErrorCode::InvalidArgument, "translate takes 3 offsets");
      p.offset[a++] = static_cast<int>(parse_int(part));
    }
    if (a != 3)
      throw Error(ErrorCode::InvalidArgument, "translate takes 3 offsets");
  } else if (kind == "drop") {
    p.kind = Perturbation::Kind::DropLesion;
    p.lesion = arg.empty() ? 0 : parse_count(arg);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown perturbation '" + text + "'");
  }
  return p;
}

std::string to_string(const Perturbation &p) {
  switch (p.kind) {
  case Perturbation::Kind::Dilate: return "dilate:" + std::to_string(p.amount);
  case Perturbation::Kind::Erode: return "erode:" + std::to_string(p.amount);
  case Perturbation::Kind::AddFalsePositive: return "fp:" + std::to_string(p.amount);
  case Perturbation::Kind::DropLesion: return "drop:" + std::to_string(p.lesion);
  case Perturbation::Kind::Translate:
    return "translate:" + std::to_string(p.offset[0]) + "," +
           std::to_string(p.offset[1]) + "," + std::to_string(p.offset[2]);
  }
  return "?";
}

namespace {

BinaryMask tumor_mask(const LabelVolume &labels, const LabelMap &map) {
  BinaryMask m(labels.geometry());
  for (std::size_t i = 0; i < labels.size(); ++i)
    m[i] = map.is_tumor(labels[i]);
  return m;
}

LabelVolume translate(const LabelVolume &labels, const std::array<int, 3> &off) {
  const Geometry &g = labels.geometry();
  LabelVolume out(g);
  for (std::size_t z = 0; z < g.dims[2]; ++z)
    for (std::size_t y = 0; y < g.dims[1]; ++y)
      for (std::size_t x = 0; x < g.dims[0]; ++x) {
        const auto code = labels.at(x, y, z);
        if (code == 0)
          continue;
        const std::array<long long, 3> t{static_cast<long long>(x) + off[0],
                                         static_cast<long long>(y) + off[1],
                                         static_cast<long long>(z) + off[2]};
        bool inside = true;
        for (int a = 0; a < 3; ++a)
          inside &= t[a] >= 0 && t[a] < static_cast<long long>(g.dims[a]);
        if (inside)
          out.at(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]),
                 static_cast<std::size_t>(t[2])) = code;
      }
  return out;
}

std::string add_false_positive(LabelVolume &labels, std::size_t radius,
                               const LabelMap &map, SplitMix64 &rng) {
  const Geometry &g = labels.geometry();
  // Keep the blob's radius-1 dilation clear of existing tumor by requiring an
  // empty cube of half-width radius + 3 around the centre.
  const BinaryMask forbidden = dilate(tumor_mask(labels, map), radius + 3);
  const auto r = static_cast<double>(radius);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    PlacedLesion blob;
    blob.radius = r;
    if (!draw_center(rng, g, r, blob.center))
      break;
    const auto cx = static_cast<std::size_t>(blob.center[0]);
    const auto cy = static_cast<std::size_t>(blob.center[1]);
    const auto cz = static_cast<std::size_t>(blob.center[2]);
    if (forbidden.at(cx, cy, cz))
      continue;
    paint_lesion(labels, blob, {0.4, 0.3, 0.3}, map);
    std::ostringstream os;
    os << "fp:" << radius << " at (" << cx << "," << cy << "," << cz << ")";
    return os.str();
  }
  throw Error(ErrorCode::Placement, "could not place a false-positive blob");
}

} // namespace

LabelVolume perturb(const Phantom &phantom, const std::vector<Perturbation> &steps,
                    const LabelMap &map, std::uint64_t seed,
                    std::vector<std::string> *provenance) {
  map.validate();
  SplitMix64 rng(seed);
  LabelVolume labels = phantom.labels;
  const Geometry &g = labels.geometry();
  for (const auto &step : steps) {
    std::string note = to_string(step);
    switch (step.kind) {
    case Perturbation::Kind::Dilate: {
      const BinaryMask grown = dilate(tumor_mask(labels, map), step.amount);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (grown[i] && !map.is_tumor(labels[i]))
          labels[i] = map.snfh;
      break;
    }
    case Perturbation::Kind::Erode: {
      BinaryMask background = tumor_mask(labels, map);
      for (std::size_t i = 0; i < background.size(); ++i)
        background[i] = !background[i];
      const BinaryMask lost = dilate(background, step.amount);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (lost[i] && map.is_tumor(labels[i]))
          labels[i] = 0;
      break;
    }
    case Perturbation::Kind::Translate:
      labels = translate(labels, step.offset);
      break;
    case Perturbation::Kind::DropLesion: {
      if (step.lesion >= phantom.lesions.size())
        throw Error(ErrorCode::InvalidArgument,
                    "phantom has no lesion " + std::to_string(step.lesion));
      const auto &l = phantom.lesions[step.lesion];
      for (std::size_t z = 0; z < g.dims[2]; ++z)
        for (std::size_t y = 0; y < g.dims[1]; ++y)
          for (std::size_t x = 0; x < g.dims[0]; ++x) {
            const double dx = static_cast<double>(x) - l.center[0];
            const double dy = static_cast<double>(y) - l.center[1];
            const double dz = static_cast<double>(z) - l.center[2];
            if (dx * dx + dy * dy + dz * dz <= l.radius * l.radius)
              labels.at(x, y, z) = 0;
          }
      break;
    }
    case Perturbation::Kind::AddFalsePositive:
      note = add_false_positive(labels, step.amount, map, rng);
      break;
    }
    if (provenance)
      provenance->push_back(note);
  }
  return labels;
}

} // namespace lesioneval
