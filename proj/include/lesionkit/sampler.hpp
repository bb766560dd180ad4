#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesionkit/core.hpp"

namespace lesionkit {

struct Patch {
  std::vector<Volume> channels;  // one per input image, zero-padded
  Mask label;                    // background-padded
  Index3 corner{};               // source voxel of patch (0,0,0); may be negative
  bool contains_foreground = false;
  bool forced = false;           // drawn centered on a foreground voxel
};

struct PatchBatch {
  std::vector<Patch> patches;
  Dims3 patch_size{};
  std::uint64_t seed = 0;
  std::size_t n_forced = 0;
};

/// Copies the window starting at `corner`. Parts outside the source are
/// zero (image) / background (label). Each patch grid keeps the source
/// spacing, with its origin at the corner's world position.
Patch extract_patch(std::span<const Volume> images, const Mask& label, const Index3& corner,
                    const Dims3& patch_size);

/// Number of foreground-forced patches: ceil(fraction * batch_size).
std::size_t forced_patch_count(double oversample_fraction, std::size_t batch_size);

/// The first forced_patch_count() patches are centered on a uniformly drawn
/// foreground voxel (corner = voxel - patch_size / 2); the rest have corners
/// uniform over the valid placements. With an empty label every patch is
/// uniform and a warning is logged.
PatchBatch sample_batch(std::span<const Volume> images, const Mask& label, const Dims3& patch_size,
                        std::size_t batch_size, double oversample_fraction, std::uint64_t seed);

/// JSON manifest of corners and flags; `files` holds per-patch file names
/// (channels then label) when patches were written, otherwise may be empty.
std::string batch_manifest_json(const PatchBatch& batch, double oversample_fraction,
                                const std::vector<std::vector<std::string>>& files);

}  // namespace lesionkit
