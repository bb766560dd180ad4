#include "lesionkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lesionkit {

Grid3::Grid3(Dims3 dims, Vec3 spacing, Vec3 origin)
    : dims_(dims), spacing_(spacing), origin_(origin) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] < 1) {
      throw std::invalid_argument("Grid3: dims[" + std::to_string(a) + "] must be >= 1");
    }
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
      throw std::invalid_argument("Grid3: spacing[" + std::to_string(a) +
                                  "] must be positive and finite, got " +
                                  std::to_string(spacing_[a]));
    }
    if (!std::isfinite(origin_[a])) {
      throw std::invalid_argument("Grid3: origin must be finite");
    }
  }
}

Vec3 Grid3::to_world(const Vec3& index) const noexcept {
  return {origin_[0] + index[0] * spacing_[0], origin_[1] + index[1] * spacing_[1],
          origin_[2] + index[2] * spacing_[2]};
}

Vec3 Grid3::to_index(const Vec3& world) const noexcept {
  return {(world[0] - origin_[0]) / spacing_[0], (world[1] - origin_[1]) / spacing_[1],
          (world[2] - origin_[2]) / spacing_[2]};
}

bool Grid3::same_geometry(const Grid3& other) const noexcept {
  if (dims_ != other.dims_) return false;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(spacing_[a] - other.spacing_[a]) > kGeometryTolerance) return false;
    if (std::abs(origin_[a] - other.origin_[a]) > kGeometryTolerance) return false;
  }
  return true;
}

std::string Grid3::describe() const {
  std::ostringstream os;
  os << "dims=(" << dims_[0] << "," << dims_[1] << "," << dims_[2] << ") spacing=("
     << spacing_[0] << "," << spacing_[1] << "," << spacing_[2] << ") origin=(" << origin_[0]
     << "," << origin_[1] << "," << origin_[2] << ")";
  return os.str();
}

double voxel_volume_ml(const Grid3& grid) noexcept { return grid.voxel_volume_mm3() / 1000.0; }

void require_same_geometry(const Grid3& a, const Grid3& b, const char* what) {
  if (!a.same_geometry(b)) {
    throw GeometryMismatch(std::string(what) + ": geometry mismatch between " + a.describe() +
                           " and " + b.describe());
  }
}

Volume::Volume(Grid3 grid, std::vector<float> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.voxel_count()) {
    throw std::invalid_argument("Volume: expected " + std::to_string(grid_.voxel_count()) +
                                " values, got " + std::to_string(values_.size()));
  }
  auto bad = std::find_if(values_.begin(), values_.end(),
                          [](float v) { return !std::isfinite(v); });
  if (bad != values_.end()) {
    throw std::invalid_argument("Volume: non-finite value at voxel " +
                                std::to_string(bad - values_.begin()));
  }
}

Volume::Volume(Grid3 grid, float fill) : Volume(grid, std::vector<float>(grid.voxel_count(), fill)) {}

Mask::Mask(Grid3 grid) : grid_(grid), bits_(grid.voxel_count(), 0) {}

Mask::Mask(Grid3 grid, std::vector<std::uint8_t> bits) : grid_(grid), bits_(std::move(bits)) {
  if (bits_.size() != grid_.voxel_count()) {
    throw std::invalid_argument("Mask: expected " + std::to_string(grid_.voxel_count()) +
                                " voxels, got " + std::to_string(bits_.size()));
  }
  for (auto& b : bits_) {
    b = b != 0 ? 1 : 0;
    foreground_ += b;
  }
}

LabelMap::LabelMap(Grid3 grid, std::vector<std::uint32_t> labels, std::vector<std::uint64_t> sizes)
    : grid_(grid), labels_(std::move(labels)), sizes_(std::move(sizes)) {
  if (labels_.size() != grid_.voxel_count()) {
    throw std::invalid_argument("LabelMap: label array does not match grid");
  }
}

bool LabelMap::consistent() const {
  std::vector<std::uint64_t> seen(sizes_.size(), 0);
  for (auto l : labels_) {
    if (l == 0) continue;
    if (l > sizes_.size()) return false;
    ++seen[l - 1];
  }
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 1 || seen[i] != sizes_[i]) return false;
  }
  return true;
}

std::size_t overlap_count(const Mask& a, const Mask& b) {
  require_same_geometry(a.grid(), b.grid(), "overlap_count");
  const auto& x = a.bits();
  const auto& y = b.bits();
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] & y[i];
  return n;
}

}  // namespace lesionkit
