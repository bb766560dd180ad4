#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lesionkit/core.hpp"

namespace lesionkit {

/// Voxel neighborhood: face (6), face+edge (18) or face+edge+corner (26).
enum class Connectivity : int { Six = 6, Eighteen = 18, TwentySix = 26 };

inline constexpr Connectivity kDefaultConnectivity = Connectivity::TwentySix;

/// Throws std::invalid_argument for anything other than 6, 18 or 26.
Connectivity connectivity_from_int(int value);
inline int to_int(Connectivity c) noexcept { return static_cast<int>(c); }

/// Two-pass union-find labeling. Labels are 1..count in order of first
/// appearance in the x-fastest raster scan; background stays 0.
LabelMap label_components(const Mask& mask, Connectivity conn = kDefaultConnectivity);

struct ComponentStats {
  std::uint32_t id = 0;
  std::uint64_t voxels = 0;
  double volume_ml = 0.0;
  Vec3 centroid_mm{};
  Index3 bbox_min{};
  Index3 bbox_max{};  // inclusive
};

/// One record per component in id order.
std::vector<ComponentStats> component_stats(const LabelMap& labels);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 0;
};

/// Bins component voxel counts into half-open [lo, hi) bins. Edges must be
/// strictly increasing with at least two entries.
std::vector<HistogramBin> size_histogram(std::span<const ComponentStats> stats,
                                         std::span<const double> bin_edges);

/// Median component voxel count (mean of the middle pair for even counts);
/// empty when there are no components.
std::optional<double> median_component_size(std::span<const ComponentStats> stats);

}  // namespace lesionkit
