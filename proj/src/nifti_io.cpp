#include "lesionkit/nifti_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <cctype>
#include <sstream>
#include <vector>

#include "lesionkit/log.hpp"

namespace lesionkit::nifti {
namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

struct GzCloser {
  void operator()(gzFile f) const noexcept {
    if (f != nullptr) gzclose(f);
  }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

std::string os_error(const std::filesystem::path& path, const char* action) {
  return std::string("cannot ") + action + " '" + path.string() + "': " + std::strerror(errno);
}

GzHandle open_for_read(const std::filesystem::path& path) {
  errno = 0;
  GzHandle f(gzopen(path.string().c_str(), "rb"));
  if (!f) throw NiftiError(ErrorKind::IoError, os_error(path, "open"));
  gzbuffer(f.get(), 1u << 18);
  return f;
}

// Reads up to n bytes; returns the count actually read.
std::size_t read_bytes(gzFile f, void* dst, std::size_t n, const std::filesystem::path& path) {
  auto* out = static_cast<unsigned char*>(dst);
  std::size_t total = 0;
  while (total < n) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n - total, 1u << 30));
    const int got = gzread(f, out + total, chunk);
    if (got < 0) {
      int errnum = 0;
      const char* msg = gzerror(f, &errnum);
      throw NiftiError(ErrorKind::IoError, "read error in '" + path.string() + "': " + msg);
    }
    if (got == 0) break;
    total += static_cast<std::size_t>(got);
  }
  return total;
}

template <typename T>
T load(const unsigned char* p, bool swap) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if (swap) std::reverse(b.begin(), b.end());
  return std::bit_cast<T>(b);
}

template <typename T>
void store_le(unsigned char* p, T value) {
  auto b = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  std::memcpy(p, b.data(), sizeof(T));
}

std::size_t bytes_per_voxel(DataType t) {
  switch (t) {
    case DataType::UInt8: return 1;
    case DataType::Int16: return 2;
    case DataType::Int32: return 4;
    case DataType::Float32: return 4;
    case DataType::Float64: return 8;
  }
  return 0;
}

bool is_supported(std::int16_t code) {
  switch (code) {
    case 2: case 4: case 8: case 16: case 64: return true;
    default: return false;
  }
}

HeaderView parse_header(const unsigned char* h, const std::filesystem::path& path) {
  HeaderView v;
  const auto dim0_native = load<std::int16_t>(h + 40, false);
  bool swap = false;
  if (dim0_native < 1 || dim0_native > 7) {
    const auto dim0_swapped = load<std::int16_t>(h + 40, true);
    if (dim0_swapped < 1 || dim0_swapped > 7) {
      throw NiftiError(ErrorKind::BadHeader, "'" + path.string() + "': dim[0] = " +
                                                 std::to_string(dim0_native) +
                                                 " is not in 1..7 in either byte order");
    }
    swap = true;
  }
  // Host is little-endian in practice; "swap" means the file's order differs.
  v.big_endian = (std::endian::native == std::endian::little) == swap;

  if (!(h[344] == 'n' && h[345] == '+' && h[346] == '1' && h[347] == '\0')) {
    std::string magic;
    for (int i = 344; i < 347; ++i) {
      const char c = static_cast<char>(h[i]);
      magic += std::isprint(static_cast<unsigned char>(c)) ? c : '?';
    }
    throw NiftiError(ErrorKind::BadMagic,
                     "'" + path.string() + "': bad magic \"" + magic + "\" (expected \"n+1\")");
  }

  for (int i = 0; i < 8; ++i) {
    v.dim[i] = load<std::int16_t>(h + 40 + 2 * i, swap);
    v.pixdim[i] = load<float>(h + 76 + 4 * i, swap);
  }
  v.datatype = load<std::int16_t>(h + 70, swap);
  v.bitpix = load<std::int16_t>(h + 72, swap);
  v.vox_offset = load<float>(h + 108, swap);
  v.scl_slope = load<float>(h + 112, swap);
  v.scl_inter = load<float>(h + 116, swap);
  v.qform_code = load<std::int16_t>(h + 252, swap);
  v.sform_code = load<std::int16_t>(h + 254, swap);
  for (int i = 0; i < 3; ++i) {
    v.qoffset[i] = load<float>(h + 268 + 4 * i, swap);
    v.sform_translation[i] = load<float>(h + 280 + 16 * i + 12, swap);
  }
  return v;
}

struct Decoded {
  Grid3 grid;
  DataType datatype;
  std::vector<unsigned char> payload;
  bool swap;
  double slope;
  double inter;
};

Decoded read_image(const std::filesystem::path& path) {
  auto f = open_for_read(path);
  std::array<unsigned char, kHeaderSize> raw{};
  if (read_bytes(f.get(), raw.data(), raw.size(), path) != raw.size()) {
    throw NiftiError(ErrorKind::BadHeader,
                     "'" + path.string() + "': file shorter than the 348-byte header");
  }
  const HeaderView h = parse_header(raw.data(), path);
  const bool swap = h.big_endian == (std::endian::native == std::endian::little);

  if (!is_supported(h.datatype)) {
    throw NiftiError(ErrorKind::UnsupportedDatatype,
                     "'" + path.string() + "': unsupported datatype code " +
                         std::to_string(h.datatype));
  }
  const auto dtype = static_cast<DataType>(h.datatype);

  const int ndim = h.dim[0];
  for (int i = 4; i <= ndim; ++i) {
    if (h.dim[i] != 1) {
      throw NiftiError(ErrorKind::NonThreeD, "'" + path.string() + "': non-3D image (dim[0] = " +
                                                 std::to_string(ndim) + ", dim[" +
                                                 std::to_string(i) + "] = " +
                                                 std::to_string(h.dim[i]) + ")");
    }
  }
  Dims3 dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    if (a + 1 <= ndim) {
      if (h.dim[a + 1] < 1) {
        throw NiftiError(ErrorKind::BadHeader, "'" + path.string() + "': dim[" +
                                                   std::to_string(a + 1) + "] = " +
                                                   std::to_string(h.dim[a + 1]));
      }
      dims[a] = static_cast<std::size_t>(h.dim[a + 1]);
      spacing[a] = std::abs(static_cast<double>(h.pixdim[a + 1]));
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
        throw NiftiError(ErrorKind::BadHeader, "'" + path.string() + "': pixdim[" +
                                                   std::to_string(a + 1) + "] = " +
                                                   std::to_string(h.pixdim[a + 1]));
      }
    }
  }
  Vec3 origin{0.0, 0.0, 0.0};
  if (h.qform_code > 0) {
    origin = {h.qoffset[0], h.qoffset[1], h.qoffset[2]};
  } else if (h.sform_code > 0) {
    origin = {h.sform_translation[0], h.sform_translation[1], h.sform_translation[2]};
  }

  if (!(h.vox_offset >= static_cast<float>(kHeaderSize))) {
    throw NiftiError(ErrorKind::BadHeader, "'" + path.string() + "': vox_offset " +
                                               std::to_string(h.vox_offset) + " < 348");
  }
  const auto skip = static_cast<std::size_t>(h.vox_offset) - kHeaderSize;
  if (skip > 0) {
    std::vector<unsigned char> ext(skip);
    if (read_bytes(f.get(), ext.data(), skip, path) != skip) {
      throw NiftiError(ErrorKind::TruncatedPayload,
                       "'" + path.string() + "': file ends before vox_offset");
    }
  }

  Grid3 grid(dims, spacing, origin);
  const std::size_t expected = grid.voxel_count() * bytes_per_voxel(dtype);
  std::vector<unsigned char> payload(expected);
  const std::size_t got = read_bytes(f.get(), payload.data(), expected, path);
  if (got != expected) {
    throw NiftiError(ErrorKind::TruncatedPayload,
                     "'" + path.string() + "': truncated payload, expected " +
                         std::to_string(expected) + " bytes, got " + std::to_string(got));
  }

  double slope = 1.0;
  double inter = 0.0;
  if (h.scl_slope != 0.0f && std::isfinite(h.scl_slope)) {
    slope = h.scl_slope;
    inter = std::isfinite(h.scl_inter) ? h.scl_inter : 0.0;
  }
  return Decoded{grid, dtype, std::move(payload), swap, slope, inter};
}

// Calls fn(index, scaled_value) for every voxel in linearization order.
template <typename Fn>
void for_each_value(const Decoded& d, Fn&& fn) {
  const std::size_t n = d.grid.voxel_count();
  const unsigned char* p = d.payload.data();
  const bool identity = d.slope == 1.0 && d.inter == 0.0;
  auto dispatch = [&](auto tag) {
    using T = decltype(tag);
    for (std::size_t i = 0; i < n; ++i) {
      const double raw = static_cast<double>(load<T>(p + i * sizeof(T), d.swap));
      fn(i, identity ? raw : raw * d.slope + d.inter);
    }
  };
  switch (d.datatype) {
    case DataType::UInt8: dispatch(std::uint8_t{}); break;
    case DataType::Int16: dispatch(std::int16_t{}); break;
    case DataType::Int32: dispatch(std::int32_t{}); break;
    case DataType::Float32: dispatch(float{}); break;
    case DataType::Float64: dispatch(double{}); break;
  }
}

void write_image(const std::filesystem::path& path, const Grid3& grid, DataType dtype,
                 const std::vector<unsigned char>& payload, bool gzip) {
  std::array<unsigned char, kVoxOffset> h{};
  store_le<std::int32_t>(h.data() + 0, 348);
  h[38] = 'r';
  const auto& dims = grid.dims();
  for (int a = 0; a < 3; ++a) {
    if (dims[a] > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max())) {
      throw std::invalid_argument("NIfTI-1 dims are limited to 32767 per axis");
    }
  }
  const std::array<std::int16_t, 8> dim{3,
                                        static_cast<std::int16_t>(dims[0]),
                                        static_cast<std::int16_t>(dims[1]),
                                        static_cast<std::int16_t>(dims[2]),
                                        1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) store_le<std::int16_t>(h.data() + 40 + 2 * i, dim[i]);
  store_le<std::int16_t>(h.data() + 70, static_cast<std::int16_t>(dtype));
  store_le<std::int16_t>(h.data() + 72, static_cast<std::int16_t>(8 * bytes_per_voxel(dtype)));
  const auto& sp = grid.spacing();
  const std::array<float, 8> pixdim{1.0f, static_cast<float>(sp[0]), static_cast<float>(sp[1]),
                                    static_cast<float>(sp[2]), 1.0f, 1.0f, 1.0f, 1.0f};
  for (int i = 0; i < 8; ++i) store_le<float>(h.data() + 76 + 4 * i, pixdim[i]);
  store_le<float>(h.data() + 108, static_cast<float>(kVoxOffset));
  store_le<float>(h.data() + 112, 1.0f);
  store_le<float>(h.data() + 116, 0.0f);
  h[123] = 2;  // xyzt_units: mm
  store_le<std::int16_t>(h.data() + 252, 1);
  store_le<std::int16_t>(h.data() + 254, 1);
  const auto& o = grid.origin();
  for (int i = 0; i < 3; ++i) {
    store_le<float>(h.data() + 268 + 4 * i, static_cast<float>(o[i]));
    for (int j = 0; j < 3; ++j) {
      store_le<float>(h.data() + 280 + 16 * i + 4 * j, i == j ? static_cast<float>(sp[i]) : 0.0f);
    }
    store_le<float>(h.data() + 280 + 16 * i + 12, static_cast<float>(o[i]));
  }
  std::memcpy(h.data() + 344, "n+1\0", 4);

  errno = 0;
  GzHandle f(gzopen(path.string().c_str(), gzip ? "wb6" : "wbT"));
  if (!f) throw NiftiError(ErrorKind::IoError, os_error(path, "create"));
  gzbuffer(f.get(), 1u << 18);
  auto put = [&](const unsigned char* data, std::size_t n) {
    std::size_t done = 0;
    while (done < n) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n - done, 1u << 30));
      if (gzwrite(f.get(), data + done, chunk) != static_cast<int>(chunk)) {
        int errnum = 0;
        const char* msg = gzerror(f.get(), &errnum);
        throw NiftiError(ErrorKind::IoError, "write error in '" + path.string() + "': " +
                                                 (errnum == Z_ERRNO ? std::strerror(errno) : msg));
      }
      done += chunk;
    }
  };
  put(h.data(), h.size());
  put(payload.data(), payload.size());
  gzFile raw = f.release();
  if (gzclose(raw) != Z_OK) {
    throw NiftiError(ErrorKind::IoError, os_error(path, "close"));
  }
}

template <typename T>
std::vector<unsigned char> encode_integers(const std::vector<float>& values, DataType dtype) {
  std::vector<unsigned char> out(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (v != std::trunc(v) || v < static_cast<float>(std::numeric_limits<T>::min()) ||
        static_cast<double>(v) > static_cast<double>(std::numeric_limits<T>::max())) {
      throw std::invalid_argument("write_volume: value " + std::to_string(v) + " at voxel " +
                                  std::to_string(i) + " is not representable as " +
                                  to_string(dtype));
    }
    store_le<T>(out.data() + i * sizeof(T), static_cast<T>(v));
  }
  return out;
}

bool has_gz_extension(const std::filesystem::path& path) { return path.extension() == ".gz"; }

}  // namespace

std::string to_string(DataType t) {
  switch (t) {
    case DataType::UInt8: return "uint8";
    case DataType::Int16: return "int16";
    case DataType::Int32: return "int32";
    case DataType::Float32: return "float32";
    case DataType::Float64: return "float64";
  }
  return "unknown";
}

HeaderView read_header(const std::filesystem::path& path) {
  auto f = open_for_read(path);
  std::array<unsigned char, kHeaderSize> raw{};
  if (read_bytes(f.get(), raw.data(), raw.size(), path) != raw.size()) {
    throw NiftiError(ErrorKind::BadHeader,
                     "'" + path.string() + "': file shorter than the 348-byte header");
  }
  return parse_header(raw.data(), path);
}

Volume read_volume(const std::filesystem::path& path) {
  const Decoded d = read_image(path);
  std::vector<float> values(d.grid.voxel_count());
  for_each_value(d, [&](std::size_t i, double v) { values[i] = static_cast<float>(v); });
  try {
    return Volume(d.grid, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw NiftiError(ErrorKind::BadHeader, "'" + path.string() + "': " + e.what());
  }
}

Mask read_mask(const std::filesystem::path& path) {
  const Decoded d = read_image(path);
  std::vector<std::uint8_t> bits(d.grid.voxel_count());
  constexpr std::size_t kMaxListed = 16;
  std::vector<double> distinct;
  bool non_binary = false;
  for_each_value(d, [&](std::size_t i, double v) {
    bits[i] = v > 0.5 ? 1 : 0;
    if (std::abs(v) > 1e-6 && std::abs(v - 1.0) > 1e-6) non_binary = true;
    if (distinct.size() < kMaxListed && std::find(distinct.begin(), distinct.end(), v) == distinct.end()) {
      distinct.push_back(v);
    }
  });
  if (non_binary) {
    std::sort(distinct.begin(), distinct.end());
    std::ostringstream os;
    os << "mask '" << path.string() << "' is not binary; distinct values:";
    for (double v : distinct) os << ' ' << v;
    if (distinct.size() >= kMaxListed) os << " ...";
    os << " (foreground where value > 0.5)";
    log::warn(os.str());
  }
  return Mask(d.grid, std::move(bits));
}

void write_volume(const Volume& volume, const std::filesystem::path& path, WriteOptions options) {
  const auto& values = volume.values();
  std::vector<unsigned char> payload;
  switch (options.datatype) {
    case DataType::UInt8:
      payload = encode_integers<std::uint8_t>(values, options.datatype);
      break;
    case DataType::Int16:
      payload = encode_integers<std::int16_t>(values, options.datatype);
      break;
    case DataType::Int32:
      payload = encode_integers<std::int32_t>(values, options.datatype);
      break;
    case DataType::Float32:
      payload.resize(values.size() * 4);
      for (std::size_t i = 0; i < values.size(); ++i) store_le<float>(payload.data() + 4 * i, values[i]);
      break;
    case DataType::Float64:
      payload.resize(values.size() * 8);
      for (std::size_t i = 0; i < values.size(); ++i) {
        store_le<double>(payload.data() + 8 * i, static_cast<double>(values[i]));
      }
      break;
  }
  write_image(path, volume.grid(), options.datatype, payload, options.gzip);
}

void write_mask(const Mask& mask, const std::filesystem::path& path, bool gzip) {
  const auto& bits = mask.bits();
  std::vector<unsigned char> payload(bits.begin(), bits.end());
  write_image(path, mask.grid(), DataType::UInt8, payload, gzip);
}

void write_volume(const Volume& volume, const std::filesystem::path& path, DataType datatype) {
  write_volume(volume, path, WriteOptions{has_gz_extension(path), datatype});
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  write_mask(mask, path, has_gz_extension(path));
}

}  // namespace lesionkit::nifti
