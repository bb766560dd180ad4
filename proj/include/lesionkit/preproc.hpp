#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesionkit/core.hpp"

namespace lesionkit {

enum class Interpolation { Trilinear, Nearest };

/// Samples src at the world-space center of every target voxel. Samples
/// outside src clamp to the nearest edge voxel.
Volume resample_to_grid(const Volume& src, const Grid3& target,
                        Interpolation mode = Interpolation::Trilinear);
/// Nearest-neighbour resampling of a mask.
Mask resample_to_grid(const Mask& src, const Grid3& target);

/// Linear-interpolation percentile, p in [0, 100]:
/// rank r = p/100 * (n-1), result v[floor r] + frac(r) * (v[floor r + 1] - v[floor r]).
double percentile(std::span<const double> values, double p);
double percentile(std::span<const float> values, double p);

struct DatasetIntensityStats {
  std::string modality = "CT";
  double percentile_lo_pct = 0.5;
  double percentile_hi_pct = 99.5;
  double clip_lo = 0.0;
  double clip_hi = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::uint64_t n_voxels_sampled = 0;

  std::string to_json() const;
  static DatasetIntensityStats from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static DatasetIntensityStats load(const std::filesystem::path& path);
};

inline constexpr double kDefaultClipLoPct = 0.5;
inline constexpr double kDefaultClipHiPct = 99.5;

/// Pools every stride-th voxel of each volume (in list order), takes the
/// percentile clip bounds of the pool, then the population mean/std of the
/// clipped pool.
DatasetIntensityStats compute_dataset_stats(std::span<const Volume> volumes, double lo_pct,
                                            double hi_pct, std::size_t stride = 1,
                                            std::string modality = "CT");
/// File-based variant; fails on the first unreadable file, naming it.
DatasetIntensityStats compute_dataset_stats(std::span<const std::filesystem::path> paths,
                                            double lo_pct, double hi_pct, std::size_t stride = 1,
                                            std::string modality = "CT");

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};
MeanStd mean_std(const Volume& vol);

Volume clip(const Volume& vol, double lo, double hi);

/// (v - mean) / sd. When sd < 1e-8 the output is all zeros and a warning
/// is logged.
Volume zscore_normalize(const Volume& vol, double mean, double sd);
/// Uses the volume's own mean and population std.
Volume zscore_normalize(const Volume& vol);

enum class PetNormalization { PerVolume, Dataset };

struct PreprocessOptions {
  PetNormalization pet_mode = PetNormalization::PerVolume;
  /// Required when pet_mode is Dataset; only mean/std are used (no clipping).
  std::optional<DatasetIntensityStats> pet_stats;
};

struct PreprocessedCase {
  Volume pet_norm;
  Volume ct_norm;
};

/// CT: trilinear resample onto the PET grid, clip to the dataset bounds,
/// Z-score with the dataset mean/std. PET: Z-score (per-volume by default).
PreprocessedCase preprocess_case(const Volume& pet, const Volume& ct,
                                 const DatasetIntensityStats& ct_stats,
                                 const PreprocessOptions& options = {});

}  // namespace lesionkit
