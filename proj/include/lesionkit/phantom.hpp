#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lesionkit/core.hpp"

namespace lesionkit {

struct PhantomSpec {
  Dims3 dims{64, 64, 64};
  Vec3 spacing{2.0, 2.0, 2.0};
  Vec3 origin{0.0, 0.0, 0.0};
  std::size_t n_lesions = 3;
  std::pair<double, double> lesion_radius_range_mm{3.0, 6.0};
  double pet_background_level = 1.0;
  double pet_lesion_uptake = 8.0;
  double noise_sigma = 0.2;
  /// Bright PET blobs that are not lesions (absent from the ground truth).
  std::size_t n_hot_spots = 0;
  std::uint64_t seed = 0;
};

struct LesionRecord {
  Vec3 center_mm{};
  Index3 center_voxel{};
  Vec3 radius_mm{};
  std::uint64_t voxels = 0;
  bool in_ground_truth = true;
};

struct Phantom {
  Volume pet;
  Volume ct;
  Mask gt;
  std::vector<LesionRecord> lesions;  // lesions first, then hot spots
};

/// Axis-aligned ellipsoid lesions centered on voxel centers, placed by
/// rejection sampling so that no two touch under 26-connectivity. Fails with
/// std::runtime_error when placement needs more than 10 attempts per object.
Phantom generate_phantom(const PhantomSpec& spec);

std::string lesions_to_json(const PhantomSpec& spec, const std::vector<LesionRecord>& lesions);

/// Seeded degradation of a ground truth into a plausible prediction.
struct CorruptionSpec {
  std::size_t spurious_blobs = 3;        // isolated false-positive blobs
  std::size_t spurious_max_voxels = 8;   // blob sizes drawn in [1, max]
  double boundary_drop = 0.2;            // chance of dropping each lesion surface voxel
  double miss_probability = 0.0;         // chance of dropping a whole lesion
  std::uint64_t seed = 0;
};

/// Spurious blobs never touch the ground truth or each other (26-connectivity),
/// so each one is a separate false-positive component.
Mask corrupt_prediction(const Mask& gt, const CorruptionSpec& spec);

}  // namespace lesionkit
