#include "lesionkit/ccl.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace lesionkit {
namespace {

struct Offset {
  int dx, dy, dz;
};

// Neighbors already visited by an x-fastest raster scan.
std::vector<Offset> backward_neighbors(Connectivity conn) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 0; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
        const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (conn == Connectivity::Six && order > 1) continue;
        if (conn == Connectivity::Eighteen && order > 2) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

class UnionFind {
 public:
  UnionFind() {
    parent_.reserve(1024);
    size_.reserve(1024);
    parent_.push_back(0);
    size_.push_back(0);
  }

  std::uint32_t make_set() {
    const auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    size_.push_back(1);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Returns the surviving root.
  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace

Connectivity connectivity_from_int(int value) {
  switch (value) {
    case 6: return Connectivity::Six;
    case 18: return Connectivity::Eighteen;
    case 26: return Connectivity::TwentySix;
    default:
      throw std::invalid_argument("connectivity must be 6, 18 or 26, got " + std::to_string(value));
  }
}

LabelMap label_components(const Mask& mask, Connectivity conn) {
  const Grid3& grid = mask.grid();
  const auto [nx, ny, nz] = grid.dims();
  const std::size_t n = grid.voxel_count();
  if (n >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("label_components: volume too large for 32-bit labels");
  }
  const auto& bits = mask.bits();

  const auto neighbors = backward_neighbors(conn);
  std::vector<std::ptrdiff_t> linear;
  linear.reserve(neighbors.size());
  const auto sx = static_cast<std::ptrdiff_t>(nx);
  const auto sxy = static_cast<std::ptrdiff_t>(nx * ny);
  for (const auto& o : neighbors) linear.push_back(o.dx + o.dy * sx + o.dz * sxy);

  std::vector<std::uint32_t> labels(n, 0);
  UnionFind uf;

  std::size_t i = 0;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      const bool row_interior = z >= 1 && y >= 1 && y + 1 < ny;
      for (std::size_t x = 0; x < nx; ++x, ++i) {
        if (!bits[i]) continue;
        const bool interior = row_interior && x >= 1 && x + 1 < nx;
        std::uint32_t label = 0;
        for (std::size_t k = 0; k < linear.size(); ++k) {
          if (!interior) {
            const auto& o = neighbors[k];
            if ((o.dx < 0 && x == 0) || (o.dx > 0 && x + 1 == nx) || (o.dy < 0 && y == 0) ||
                (o.dy > 0 && y + 1 == ny) || (o.dz < 0 && z == 0)) {
              continue;
            }
          }
          const std::uint32_t other = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + linear[k])];
          if (other == 0) continue;
          if (label == 0) {
            label = other;
          } else if (other != label) {
            label = uf.unite(label, other);
          }
        }
        labels[i] = label != 0 ? label : uf.make_set();
      }
    }
  }

  // Resolve provisional labels to roots, then number roots by first appearance.
  std::vector<std::uint32_t> remap(uf.size(), 0);
  std::vector<std::uint64_t> sizes;
  for (auto& l : labels) {
    if (l == 0) continue;
    const std::uint32_t root = uf.find(l);
    std::uint32_t& final_id = remap[root];
    if (final_id == 0) {
      sizes.push_back(0);
      final_id = static_cast<std::uint32_t>(sizes.size());
    }
    l = final_id;
    ++sizes[final_id - 1];
  }
  return LabelMap(grid, std::move(labels), std::move(sizes));
}

std::vector<ComponentStats> component_stats(const LabelMap& labelmap) {
  const Grid3& grid = labelmap.grid();
  const std::size_t count = labelmap.count();
  std::vector<ComponentStats> out(count);
  std::vector<Vec3> sums(count, Vec3{0.0, 0.0, 0.0});
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  for (std::size_t c = 0; c < count; ++c) {
    out[c].id = static_cast<std::uint32_t>(c + 1);
    out[c].bbox_min = {kMax, kMax, kMax};
    out[c].bbox_max = {-1, -1, -1};
  }
  const auto& labels = labelmap.labels();
  const auto [nx, ny, nz] = grid.dims();
  std::size_t i = 0;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t x = 0; x < nx; ++x, ++i) {
        const std::uint32_t l = labels[i];
        if (l == 0) continue;
        auto& s = out[l - 1];
        ++s.voxels;
        const Index3 v{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y),
                       static_cast<std::int64_t>(z)};
        for (int a = 0; a < 3; ++a) {
          sums[l - 1][a] += static_cast<double>(v[a]);
          s.bbox_min[a] = std::min(s.bbox_min[a], v[a]);
          s.bbox_max[a] = std::max(s.bbox_max[a], v[a]);
        }
      }
    }
  }
  const double unit = voxel_volume_ml(grid);
  for (std::size_t c = 0; c < count; ++c) {
    auto& s = out[c];
    s.volume_ml = static_cast<double>(s.voxels) * unit;
    const double nvox = static_cast<double>(s.voxels);
    s.centroid_mm = grid.to_world({sums[c][0] / nvox, sums[c][1] / nvox, sums[c][2] / nvox});
  }
  return out;
}

std::vector<HistogramBin> size_histogram(std::span<const ComponentStats> stats,
                                         std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) {
    throw std::invalid_argument("size_histogram: need at least two bin edges");
  }
  for (std::size_t k = 1; k < bin_edges.size(); ++k) {
    if (!(bin_edges[k] > bin_edges[k - 1])) {
      throw std::invalid_argument("size_histogram: bin edges must be strictly increasing (edge " +
                                  std::to_string(k) + ")");
    }
  }
  std::vector<HistogramBin> bins;
  bins.reserve(bin_edges.size() - 1);
  for (std::size_t k = 0; k + 1 < bin_edges.size(); ++k) {
    bins.push_back({bin_edges[k], bin_edges[k + 1], 0});
  }
  for (const auto& s : stats) {
    const double v = static_cast<double>(s.voxels);
    // First edge strictly greater than v; the bin to its left holds v.
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
    if (it == bin_edges.begin() || it == bin_edges.end()) continue;
    ++bins[static_cast<std::size_t>(it - bin_edges.begin()) - 1].count;
  }
  return bins;
}

std::optional<double> median_component_size(std::span<const ComponentStats> stats) {
  if (stats.empty()) return std::nullopt;
  std::vector<double> sizes;
  sizes.reserve(stats.size());
  for (const auto& s : stats) sizes.push_back(static_cast<double>(s.voxels));
  std::sort(sizes.begin(), sizes.end());
  const std::size_t m = sizes.size() / 2;
  return sizes.size() % 2 == 1 ? sizes[m] : 0.5 * (sizes[m - 1] + sizes[m]);
}

}  // namespace lesionkit
