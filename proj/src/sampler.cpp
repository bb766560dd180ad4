#include "lesionkit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lesionkit/log.hpp"
#include "lesionkit/random.hpp"

namespace lesionkit {

Patch extract_patch(std::span<const Volume> images, const Mask& label, const Index3& corner,
                    const Dims3& patch_size) {
  const Grid3& src = label.grid();
  for (int a = 0; a < 3; ++a) {
    if (patch_size[a] < 1) throw std::invalid_argument("extract_patch: patch size must be >= 1");
    if (patch_size[a] > 4 * src.dims()[a]) {
      throw std::invalid_argument("extract_patch: patch size " + std::to_string(patch_size[a]) +
                                  " on axis " + std::to_string(a) + " exceeds 4x the volume dim " +
                                  std::to_string(src.dims()[a]));
    }
  }
  for (const auto& img : images) require_same_geometry(img.grid(), src, "extract_patch");

  const Vec3 origin = src.to_world({static_cast<double>(corner[0]), static_cast<double>(corner[1]),
                                    static_cast<double>(corner[2])});
  const Grid3 grid(patch_size, src.spacing(), origin);
  const std::size_t n = grid.voxel_count();

  std::vector<std::vector<float>> channel_values(images.size(), std::vector<float>(n, 0.0f));
  std::vector<std::uint8_t> bits(n, 0);
  const auto& sd = src.dims();
  std::size_t i = 0;
  for (std::size_t z = 0; z < patch_size[2]; ++z) {
    const std::int64_t sz = corner[2] + static_cast<std::int64_t>(z);
    for (std::size_t y = 0; y < patch_size[1]; ++y, i += patch_size[0]) {
      const std::int64_t sy = corner[1] + static_cast<std::int64_t>(y);
      if (sz < 0 || sy < 0 || sz >= static_cast<std::int64_t>(sd[2]) ||
          sy >= static_cast<std::int64_t>(sd[1])) {
        continue;
      }
      // Overlap of the row [corner_x, corner_x + patch_x) with [0, dim_x).
      const std::int64_t x0 = std::max<std::int64_t>(0, -corner[0]);
      const std::int64_t x1 = std::min<std::int64_t>(static_cast<std::int64_t>(patch_size[0]),
                                                     static_cast<std::int64_t>(sd[0]) - corner[0]);
      if (x1 <= x0) continue;
      const std::size_t src_row = src.linearize(0, static_cast<std::size_t>(sy), static_cast<std::size_t>(sz));
      for (std::int64_t x = x0; x < x1; ++x) {
        const std::size_t s = src_row + static_cast<std::size_t>(corner[0] + x);
        const std::size_t d = i + static_cast<std::size_t>(x);
        bits[d] = label.bits()[s];
        for (std::size_t c = 0; c < images.size(); ++c) channel_values[c][d] = images[c].values()[s];
      }
    }
  }
  std::vector<Volume> channels;
  channels.reserve(images.size());
  for (auto& v : channel_values) channels.emplace_back(grid, std::move(v));
  Mask patch_label(grid, std::move(bits));
  const bool fg = !patch_label.empty();
  return Patch{std::move(channels), std::move(patch_label), corner, fg, false};
}

std::size_t forced_patch_count(double oversample_fraction, std::size_t batch_size) {
  if (!(oversample_fraction >= 0.0 && oversample_fraction <= 1.0)) {
    throw std::invalid_argument("oversample fraction must lie in [0, 1]");
  }
  const double raw = oversample_fraction * static_cast<double>(batch_size);
  // Guard against products like 0.1 * 30 landing a hair above an integer.
  const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(n, batch_size);
}

PatchBatch sample_batch(std::span<const Volume> images, const Mask& label, const Dims3& patch_size,
                        std::size_t batch_size, double oversample_fraction, std::uint64_t seed) {
  if (batch_size == 0) throw std::invalid_argument("sample_batch: batch size must be >= 1");
  const std::size_t n_forced = forced_patch_count(oversample_fraction, batch_size);
  const Grid3& grid = label.grid();

  std::vector<std::size_t> foreground;
  if (n_forced > 0) {
    foreground.reserve(label.foreground_count());
    const auto& bits = label.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) foreground.push_back(i);
    }
    if (foreground.empty()) {
      log::warn("sample_batch: label has no foreground; forced patches fall back to uniform sampling");
    }
  }

  Rng fg_rng(seed, streams::kSamplerForeground);
  Rng uniform_rng(seed, streams::kSamplerUniform);
  auto uniform_corner = [&] {
    Index3 c{};
    for (int a = 0; a < 3; ++a) {
      const auto span = static_cast<std::int64_t>(grid.dims()[a]) - static_cast<std::int64_t>(patch_size[a]);
      c[a] = uniform_rng.between(std::min<std::int64_t>(0, span), std::max<std::int64_t>(0, span));
    }
    return c;
  };

  PatchBatch batch;
  batch.patch_size = patch_size;
  batch.seed = seed;
  batch.n_forced = foreground.empty() ? 0 : n_forced;
  batch.patches.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const bool forced = b < n_forced && !foreground.empty();
    Index3 corner;
    if (forced) {
      const auto v = grid.delinearize(foreground[fg_rng.below(foreground.size())]);
      for (int a = 0; a < 3; ++a) {
        corner[a] = static_cast<std::int64_t>(v[a]) - static_cast<std::int64_t>(patch_size[a] / 2);
      }
    } else {
      corner = uniform_corner();
    }
    Patch p = extract_patch(images, label, corner, patch_size);
    p.forced = forced;
    batch.patches.push_back(std::move(p));
  }
  return batch;
}

std::string batch_manifest_json(const PatchBatch& batch, double oversample_fraction,
                                const std::vector<std::vector<std::string>>& files) {
  nlohmann::ordered_json j;
  j["patch_size"] = batch.patch_size;
  j["batch_size"] = batch.patches.size();
  j["oversample_fraction"] = oversample_fraction;
  j["seed"] = batch.seed;
  j["n_forced"] = batch.n_forced;
  auto patches = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < batch.patches.size(); ++k) {
    const Patch& p = batch.patches[k];
    nlohmann::ordered_json e;
    e["index"] = k;
    e["corner"] = p.corner;
    e["contains_foreground"] = p.contains_foreground;
    e["forced"] = p.forced;
    if (k < files.size()) e["files"] = files[k];
    patches.push_back(std::move(e));
  }
  j["patches"] = std::move(patches);
  return j.dump(2) + "\n";
}

}  // namespace lesionkit
