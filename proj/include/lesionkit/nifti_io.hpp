#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "lesionkit/core.hpp"

namespace lesionkit::nifti {

enum class DataType : std::int16_t {
  UInt8 = 2,
  Int16 = 4,
  Int32 = 8,
  Float32 = 16,
  Float64 = 64,
};

std::string to_string(DataType t);

/// Distinct failure kinds; IoError carries the OS error text.
enum class ErrorKind { BadMagic, UnsupportedDatatype, TruncatedPayload, NonThreeD, BadHeader, IoError };

class NiftiError : public std::runtime_error {
 public:
  NiftiError(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// The header fields this reader interprets.
struct HeaderView {
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 0.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  std::array<float, 3> qoffset{};
  std::array<float, 3> sform_translation{};
  bool big_endian = false;
};

/// Parses the 348-byte header of a .nii or .nii.gz file.
HeaderView read_header(const std::filesystem::path& path);

/// Reads a 3D image; values are raw * scl_slope + scl_inter when the slope is
/// nonzero. The origin is taken from the qform offset (or the sform
/// translation); orientation is otherwise treated as axis-aligned.
Volume read_volume(const std::filesystem::path& path);

/// Foreground iff scaled value > 0.5. Warns, listing the distinct values, when
/// any voxel is not within 1e-6 of 0 or 1.
Mask read_mask(const std::filesystem::path& path);

struct WriteOptions {
  bool gzip = false;
  DataType datatype = DataType::Float32;
};

/// Little-endian single-file NIfTI-1 (vox_offset 352). Integer datatypes
/// require integral in-range values.
void write_volume(const Volume& volume, const std::filesystem::path& path, WriteOptions options = {});
/// Masks are always stored as unsigned 8-bit.
void write_mask(const Mask& mask, const std::filesystem::path& path, bool gzip);

/// gzip chosen from the ".gz" extension.
void write_volume(const Volume& volume, const std::filesystem::path& path, DataType datatype);
void write_mask(const Mask& mask, const std::filesystem::path& path);

}  // namespace lesionkit::nifti
