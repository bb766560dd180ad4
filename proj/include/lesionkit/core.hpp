#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lesionkit {

using Dims3 = std::array<std::size_t, 3>;
using Vec3 = std::array<double, 3>;
using Index3 = std::array<std::int64_t, 3>;

/// Spacing/origin tolerance (mm) used by geometry equality checks.
inline constexpr double kGeometryTolerance = 1e-4;

class GeometryMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned voxel grid: dims, per-axis spacing (mm) and world origin of
/// voxel (0,0,0). Linearization is x fastest, then y, then z.
class Grid3 {
 public:
  Grid3(Dims3 dims, Vec3 spacing, Vec3 origin = {0.0, 0.0, 0.0});

  const Dims3& dims() const noexcept { return dims_; }
  const Vec3& spacing() const noexcept { return spacing_; }
  const Vec3& origin() const noexcept { return origin_; }

  std::size_t voxel_count() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }
  double voxel_volume_mm3() const noexcept { return spacing_[0] * spacing_[1] * spacing_[2]; }

  std::size_t linearize(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + dims_[0] * (y + dims_[1] * z);
  }
  std::array<std::size_t, 3> delinearize(std::size_t index) const noexcept {
    const std::size_t x = index % dims_[0];
    const std::size_t rest = index / dims_[0];
    return {x, rest % dims_[1], rest / dims_[1]};
  }
  bool contains(const Index3& v) const noexcept {
    for (int a = 0; a < 3; ++a) {
      if (v[a] < 0 || static_cast<std::size_t>(v[a]) >= dims_[a]) return false;
    }
    return true;
  }

  /// World position (mm) of a voxel center given in continuous index units.
  Vec3 to_world(const Vec3& index) const noexcept;
  Vec3 to_index(const Vec3& world) const noexcept;

  /// Dims exact, spacing and origin within kGeometryTolerance.
  bool same_geometry(const Grid3& other) const noexcept;
  std::string describe() const;

  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  Dims3 dims_;
  Vec3 spacing_;
  Vec3 origin_;
};

double voxel_volume_ml(const Grid3& grid) noexcept;

/// Throws GeometryMismatch naming both grids unless a.same_geometry(b).
void require_same_geometry(const Grid3& a, const Grid3& b, const char* what);

/// Scalar volume with 32-bit values; finite by construction.
class Volume {
 public:
  Volume(Grid3 grid, std::vector<float> values);
  /// Constant-filled volume.
  Volume(Grid3 grid, float fill);

  const Grid3& grid() const noexcept { return grid_; }
  const std::vector<float>& values() const noexcept { return values_; }
  float at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return values_[grid_.linearize(x, y, z)];
  }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  Grid3 grid_;
  std::vector<float> values_;
};

/// Binary mask stored one byte per voxel (0 or 1).
class Mask {
 public:
  explicit Mask(Grid3 grid);
  /// Any nonzero byte becomes foreground.
  Mask(Grid3 grid, std::vector<std::uint8_t> bits);

  const Grid3& grid() const noexcept { return grid_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  bool at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return bits_[grid_.linearize(x, y, z)] != 0;
  }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t foreground_count() const noexcept { return foreground_; }
  bool empty() const noexcept { return foreground_ == 0; }

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.grid_ == b.grid_ && a.bits_ == b.bits_;
  }

 private:
  Grid3 grid_;
  std::vector<std::uint8_t> bits_;
  std::size_t foreground_ = 0;
};

/// Connected-component labels; ids 1..count, 0 is background.
/// sizes()[id - 1] holds the voxel count of component id.
class LabelMap {
 public:
  LabelMap(Grid3 grid, std::vector<std::uint32_t> labels, std::vector<std::uint64_t> sizes);

  const Grid3& grid() const noexcept { return grid_; }
  const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }
  const std::vector<std::uint64_t>& sizes() const noexcept { return sizes_; }
  std::size_t count() const noexcept { return sizes_.size(); }
  std::uint64_t size_of(std::uint32_t id) const { return sizes_.at(id - 1); }

  /// Checks ids are exactly 1..count and sizes match the label array. O(n).
  bool consistent() const;

 private:
  Grid3 grid_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint64_t> sizes_;
};

/// Number of voxels foreground in both masks.
std::size_t overlap_count(const Mask& a, const Mask& b);

}  // namespace lesionkit
