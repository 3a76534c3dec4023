#include "lesioneval/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace lesioneval {
namespace {

constexpr std::size_t kHeaderSize = 348;

enum DataType : int {
  kUInt8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
  kInt8 = 256,
  kUInt16 = 512,
};

int bytes_per_voxel(int datatype) {
  switch (datatype) {
  case kUInt8:
  case kInt8: return 1;
  case kInt16:
  case kUInt16: return 2;
  case kInt32:
  case kFloat32: return 4;
  case kFloat64: return 8;
  default: return 0;
  }
}

struct GzCloser {
  void operator()(gzFile_s *f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

std::vector<unsigned char> read_all(const std::filesystem::path &path) {
  GzHandle file(gzopen(path.c_str(), "rb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes;
  std::vector<unsigned char> chunk(1 << 20);
  for (;;) {
    const int n = gzread(file.get(), chunk.data(),
                         static_cast<unsigned>(chunk.size()));
    if (n < 0)
      throw Error(ErrorCode::Format,
                  "corrupt compressed stream in '" + path.string() + "'");
    if (n == 0)
      break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
  }
  return bytes;
}

// Little helper over a raw header buffer that honours the file byte order.
class HeaderReader {
public:
  HeaderReader(const unsigned char *bytes, bool swap)
      : bytes_(bytes), swap_(swap) {}

  template <typename T> T get(std::size_t offset) const {
    T value;
    std::memcpy(&value, bytes_ + offset, sizeof(T));
    if (swap_)
      value = swapped(value);
    return value;
  }

  template <typename T> static T swapped(T value) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    std::reverse(raw, raw + sizeof(T));
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

private:
  const unsigned char *bytes_;
  bool swap_;
};

struct ParsedHeader {
  NiftiInfo info;
  bool swap = false;
  bool pair = false; // ni1: data lives in a separate .img file
  std::size_t vox_offset = 0;
};

ParsedHeader parse_header(const unsigned char *bytes, std::size_t size,
                          const std::string &name) {
  if (size < kHeaderSize)
    throw Error(ErrorCode::Format, "'" + name + "' is too short for NIfTI-1");

  ParsedHeader out;
  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, bytes, 4);
  if (sizeof_hdr != 348) {
    if (HeaderReader::swapped(sizeof_hdr) != 348)
      throw Error(ErrorCode::Format, "'" + name + "' has an invalid sizeof_hdr");
    out.swap = true;
  }
  const char *magic = reinterpret_cast<const char *>(bytes + 344);
  if (std::memcmp(magic, "n+1\0", 4) == 0)
    out.pair = false;
  else if (std::memcmp(magic, "ni1\0", 4) == 0)
    out.pair = true;
  else
    throw Error(ErrorCode::Format, "'" + name + "' has bad NIfTI-1 magic");

  HeaderReader h(bytes, out.swap);
  const int ndim = h.get<std::int16_t>(40);
  if (ndim < 1 || ndim > 7)
    throw Error(ErrorCode::Format, "'" + name + "' has invalid dim[0]");
  Geometry &g = out.info.geometry;
  for (int i = 0; i < 3; ++i) {
    const int d = i < ndim ? h.get<std::int16_t>(42 + 2 * i) : 1;
    if (d < 1)
      throw Error(ErrorCode::Format, "'" + name + "' has non-positive dims");
    g.dims[i] = static_cast<std::size_t>(d);
  }
  for (int i = 3; i < ndim; ++i)
    if (h.get<std::int16_t>(42 + 2 * i) > 1)
      throw Error(ErrorCode::UnsupportedShape,
                  "'" + name + "' is not a single 3D frame");
  for (int i = 0; i < 3; ++i) {
    const double p = std::fabs(static_cast<double>(h.get<float>(80 + 4 * i)));
    g.spacing[i] = (std::isfinite(p) && p > 0.0) ? p : 1.0;
  }

  out.info.datatype = h.get<std::int16_t>(70);
  if (bytes_per_voxel(out.info.datatype) == 0)
    throw Error(ErrorCode::Format, "'" + name + "' has unsupported datatype " +
                                       std::to_string(out.info.datatype));
  const float vox_offset = h.get<float>(108);
  if (!(vox_offset >= 0.0f) || !std::isfinite(vox_offset))
    throw Error(ErrorCode::Format, "'" + name + "' has invalid vox_offset");
  out.vox_offset = static_cast<std::size_t>(vox_offset);
  if (!out.pair && out.vox_offset < kHeaderSize)
    out.vox_offset = 352;
  out.info.scl_slope = h.get<float>(112);
  out.info.scl_inter = h.get<float>(116);
  out.info.qform_code = h.get<std::int16_t>(252);
  out.info.sform_code = h.get<std::int16_t>(254);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      out.info.srow[r][c] = h.get<float>(280 + 16 * r + 4 * c);
  return out;
}

std::filesystem::path image_path_for(const std::filesystem::path &header) {
  std::string s = header.string();
  const bool gz = s.size() > 3 && s.ends_with(".gz");
  if (gz)
    s.resize(s.size() - 3);
  if (s.ends_with(".hdr"))
    s.replace(s.size() - 4, 4, ".img");
  else
    throw Error(ErrorCode::Format,
                "ni1 header '" + header.string() + "' must end in .hdr");
  if (gz && std::filesystem::exists(s + ".gz"))
    return s + ".gz";
  return s;
}

// Reads the file(s) and returns scaled voxel values as doubles.
std::pair<NiftiInfo, std::vector<double>>
read_scaled(const std::filesystem::path &path) {
  const auto bytes = read_all(path);
  const ParsedHeader hdr = parse_header(bytes.data(), bytes.size(), path.string());

  std::vector<unsigned char> pair_bytes;
  const unsigned char *data = nullptr;
  std::size_t available = 0;
  if (hdr.pair) {
    pair_bytes = read_all(image_path_for(path));
    if (hdr.vox_offset > pair_bytes.size())
      throw Error(ErrorCode::Format, "image file shorter than vox_offset");
    data = pair_bytes.data() + hdr.vox_offset;
    available = pair_bytes.size() - hdr.vox_offset;
  } else {
    if (hdr.vox_offset > bytes.size())
      throw Error(ErrorCode::Format, "'" + path.string() + "' is truncated");
    data = bytes.data() + hdr.vox_offset;
    available = bytes.size() - hdr.vox_offset;
  }

  const std::size_t n = hdr.info.geometry.voxel_count();
  const int bpv = bytes_per_voxel(hdr.info.datatype);
  if (available < n * static_cast<std::size_t>(bpv))
    throw Error(ErrorCode::Format,
                "'" + path.string() + "' holds fewer voxels than its dims");

  std::vector<double> values(n);
  HeaderReader r(data, hdr.swap);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = i * bpv;
    switch (hdr.info.datatype) {
    case kUInt8: values[i] = data[off]; break;
    case kInt8: values[i] = static_cast<std::int8_t>(data[off]); break;
    case kInt16: values[i] = r.get<std::int16_t>(off); break;
    case kUInt16: values[i] = r.get<std::uint16_t>(off); break;
    case kInt32: values[i] = r.get<std::int32_t>(off); break;
    case kFloat32: values[i] = r.get<float>(off); break;
    case kFloat64: values[i] = r.get<double>(off); break;
    }
  }

  const double slope = hdr.info.scl_slope;
  const double inter = hdr.info.scl_inter;
  if (slope != 0.0 && std::isfinite(slope) && std::isfinite(inter) &&
      !(slope == 1.0 && inter == 0.0))
    for (auto &v : values)
      v = v * slope + inter;
  return {hdr.info, std::move(values)};
}

template <typename T>
void write_volume(const Volume<T> &volume, int datatype,
                  const std::filesystem::path &path) {
  const Geometry &g = volume.geometry();
  for (auto d : g.dims)
    if (d > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max()))
      throw Error(ErrorCode::UnsupportedShape,
                  "dimension too large for NIfTI-1");

  unsigned char header[352] = {};
  auto put = [&header](std::size_t offset, auto value) {
    std::memcpy(header + offset, &value, sizeof(value));
  };
  const int bpv = bytes_per_voxel(datatype);
  put(0, std::int32_t{348});
  put(38, char{'r'});
  put(40, std::int16_t{3});
  for (int i = 0; i < 3; ++i)
    put(42 + 2 * i, static_cast<std::int16_t>(g.dims[i]));
  for (int i = 3; i < 7; ++i)
    put(42 + 2 * i, std::int16_t{1});
  put(70, static_cast<std::int16_t>(datatype));
  put(72, static_cast<std::int16_t>(8 * bpv));
  put(76, 1.0f);
  for (int i = 0; i < 3; ++i)
    put(80 + 4 * i, static_cast<float>(g.spacing[i]));
  put(108, 352.0f);
  put(112, 1.0f);
  put(116, 0.0f);
  put(123, char{2}); // mm
  put(254, std::int16_t{1});
  for (int r = 0; r < 3; ++r)
    put(280 + 16 * r + 4 * r, static_cast<float>(g.spacing[r]));
  std::memcpy(header + 344, "n+1\0", 4);

  std::vector<unsigned char> payload(volume.size() * bpv);
  for (std::size_t i = 0; i < volume.size(); ++i) {
    const T v = volume[i];
    unsigned char *dst = payload.data() + i * bpv;
    switch (datatype) {
    case kInt16: {
      const auto x = static_cast<std::int16_t>(v);
      std::memcpy(dst, &x, 2);
      break;
    }
    case kInt32: {
      const auto x = static_cast<std::int32_t>(v);
      std::memcpy(dst, &x, 4);
      break;
    }
    case kFloat32: {
      const auto x = static_cast<float>(v);
      std::memcpy(dst, &x, 4);
      break;
    }
    default: throw Error(ErrorCode::InvalidArgument, "unsupported output type");
    }
  }
  if constexpr (std::endian::native == std::endian::big)
    throw Error(ErrorCode::InvalidArgument,
                "writing NIfTI on big-endian hosts is not supported");

  const bool gz = path.string().ends_with(".gz");
  GzHandle file(gzopen(path.c_str(), gz ? "wb6" : "wbT"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot create '" + path.string() + "'");
  auto write = [&](const unsigned char *p, std::size_t n) {
    while (n > 0) {
      const unsigned chunk =
          static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      if (gzwrite(file.get(), p, chunk) != static_cast<int>(chunk))
        throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
      p += chunk;
      n -= chunk;
    }
  };
  write(header, sizeof header);
  write(payload.data(), payload.size());
  if (gzclose(file.release()) != Z_OK)
    throw Error(ErrorCode::Io, "failed to finish '" + path.string() + "'");
}

} // namespace

NiftiInfo read_nifti_info(const std::filesystem::path &path) {
  GzHandle file(gzopen(path.c_str(), "rb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  unsigned char header[kHeaderSize];
  const int n = gzread(file.get(), header, kHeaderSize);
  if (n < 0)
    throw Error(ErrorCode::Format, "cannot read '" + path.string() + "'");
  return parse_header(header, static_cast<std::size_t>(n), path.string()).info;
}

LabelVolume load_label_nifti(const std::filesystem::path &path) {
  auto [info, values] = read_scaled(path);
  std::vector<std::int32_t> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double r = std::round(v);
    if (!std::isfinite(v) || std::fabs(v - r) > 1e-6 || r < 0.0 ||
        r > std::numeric_limits<std::int32_t>::max())
      throw Error(ErrorCode::LabelDomain,
                  "'" + path.string() + "' contains non-label value " +
                      std::to_string(v));
    labels[i] = static_cast<std::int32_t>(r);
  }
  return LabelVolume(info.geometry, std::move(labels));
}

IntensityVolume load_intensity_nifti(const std::filesystem::path &path) {
  auto [info, values] = read_scaled(path);
  std::vector<float> out(values.begin(), values.end());
  return IntensityVolume(info.geometry, std::move(out));
}

void write_nifti(const LabelVolume &volume, const std::filesystem::path &path) {
  const auto [lo, hi] =
      std::minmax_element(volume.data().begin(), volume.data().end());
  const bool fits16 =
      volume.size() == 0 ||
      (*lo >= std::numeric_limits<std::int16_t>::min() &&
       *hi <= std::numeric_limits<std::int16_t>::max());
  write_volume(volume, fits16 ? kInt16 : kInt32, path);
}

void write_nifti(const IntensityVolume &volume,
                 const std::filesystem::path &path) {
  write_volume(volume, kFloat32, path);
}

} // namespace lesioneval
