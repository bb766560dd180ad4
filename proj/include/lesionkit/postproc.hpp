#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesionkit/ccl.hpp"
#include "lesionkit/core.hpp"

namespace lesionkit {

/// Removes every component with fewer than min_voxels voxels. Components at
/// or above the threshold are kept unchanged; min_voxels == 0 is a no-op.
Mask filter_min_size(const Mask& mask, std::uint64_t min_voxels,
                     Connectivity conn = kDefaultConnectivity);

/// Same filter on an existing labeling of the mask.
Mask filter_min_size(const LabelMap& labels, std::uint64_t min_voxels);

/// Converts a physical minimum size to voxels for a grid, rounding up.
std::uint64_t min_voxels_for_volume(double min_ml, const Grid3& grid);

struct SweepRow {
  std::uint64_t threshold_voxels = 0;
  std::optional<double> mean_dice;
  double mean_fp_volume_ml = 0.0;
  double mean_fn_volume_ml = 0.0;
};

/// Threshold values used by default for sweeps.
inline constexpr std::uint64_t kDefaultSweepThresholds[] = {0, 5, 10, 20, 40, 80};

/// Filters every prediction at each threshold and aggregates the metrics.
/// Rows come back in ascending threshold order. `jobs` workers split the
/// cases; the result does not depend on it. Case ids only fix the
/// aggregation order; when empty, cases are aggregated in list order.
std::vector<SweepRow> threshold_sweep(std::span<const Mask> preds, std::span<const Mask> gts,
                                      std::span<const std::uint64_t> thresholds,
                                      Connectivity conn = kDefaultConnectivity,
                                      unsigned jobs = 1,
                                      std::span<const std::string> case_ids = {});

/// CSV with header threshold_voxels,mean_dice,mean_fp_volume_ml,mean_fn_volume_ml.
/// Absent Dice values are written as empty fields.
std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace lesionkit
