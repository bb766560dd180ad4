#include "lesionkit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lesionkit/ccl.hpp"
#include "lesionkit/random.hpp"

namespace lesionkit {
namespace {

struct Placed {
  Index3 center;
  Vec3 radius;
};

double max_radius(const Vec3& r) { return std::max({r[0], r[1], r[2]}); }

// Voxel count of an ellipsoid centered on a voxel, independent of where it sits.
std::uint64_t discrete_voxels(const Vec3& spacing, const Vec3& radius) {
  std::array<std::int64_t, 3> reach{};
  for (int a = 0; a < 3; ++a) reach[a] = static_cast<std::int64_t>(std::floor(radius[a] / spacing[a]));
  std::uint64_t n = 0;
  for (auto z = -reach[2]; z <= reach[2]; ++z) {
    for (auto y = -reach[1]; y <= reach[1]; ++y) {
      for (auto x = -reach[0]; x <= reach[0]; ++x) {
        const double dx = static_cast<double>(x) * spacing[0] / radius[0];
        const double dy = static_cast<double>(y) * spacing[1] / radius[1];
        const double dz = static_cast<double>(z) * spacing[2] / radius[2];
        if (dx * dx + dy * dy + dz * dz <= 1.0) ++n;
      }
    }
  }
  return n;
}

bool close_to_analytic(const Vec3& spacing, const Vec3& radius) {
  const double analytic = 4.0 / 3.0 * std::numbers::pi * radius[0] * radius[1] * radius[2] /
                          (spacing[0] * spacing[1] * spacing[2]);
  const double actual = static_cast<double>(discrete_voxels(spacing, radius));
  return std::abs(actual - analytic) <= 0.2 * analytic;
}

constexpr int kRadiusRedraws = 64;

// Calls fn(linear_index) for every voxel whose center lies inside the ellipsoid.
template <typename Fn>
void for_each_inside(const Grid3& grid, const Placed& e, Fn&& fn) {
  std::array<std::int64_t, 3> lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    const auto reach = static_cast<std::int64_t>(std::floor(e.radius[a] / grid.spacing()[a]));
    lo[a] = std::max<std::int64_t>(0, e.center[a] - reach);
    hi[a] = std::min<std::int64_t>(static_cast<std::int64_t>(grid.dims()[a]) - 1, e.center[a] + reach);
  }
  for (auto z = lo[2]; z <= hi[2]; ++z) {
    for (auto y = lo[1]; y <= hi[1]; ++y) {
      for (auto x = lo[0]; x <= hi[0]; ++x) {
        const std::array<std::int64_t, 3> v{x, y, z};
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = static_cast<double>(v[a] - e.center[a]) * grid.spacing()[a] / e.radius[a];
          r2 += d * d;
        }
        if (r2 <= 1.0) {
          fn(grid.linearize(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                            static_cast<std::size_t>(z)));
        }
      }
    }
  }
}

// Smooth body-like CT: soft tissue inside an elliptic cross-section, air outside.
float ct_value(const Grid3& grid, std::size_t x, std::size_t y, std::size_t z) {
  const auto& d = grid.dims();
  const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(d[0]) - 0.5;
  const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(d[1]) - 0.5;
  const double w = (static_cast<double>(z) + 0.5) / static_cast<double>(d[2]);
  const double r = std::sqrt((u / 0.42) * (u / 0.42) + (v / 0.36) * (v / 0.36));
  const double body = 1.0 / (1.0 + std::exp((r - 1.0) / 0.04));
  return static_cast<float>(-1000.0 + body * (1040.0 + 20.0 * w));
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec) {
  const Grid3 grid(spec.dims, spec.spacing, spec.origin);
  const auto [r_lo, r_hi] = spec.lesion_radius_range_mm;
  const std::size_t n_objects = spec.n_lesions + spec.n_hot_spots;
  if (n_objects > 0 && !(r_lo > 0.0 && r_hi >= r_lo)) {
    throw std::invalid_argument("phantom: lesion radius range must satisfy 0 < lo <= hi");
  }
  if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("phantom: noise sigma must be >= 0");

  Rng placement(spec.seed, streams::kPhantomPlacement);
  std::vector<Placed> placed;
  placed.reserve(n_objects);
  const double diag = std::sqrt(spec.spacing[0] * spec.spacing[0] + spec.spacing[1] * spec.spacing[1] +
                                spec.spacing[2] * spec.spacing[2]);
  const std::size_t budget = 10 * n_objects;
  std::size_t attempts = 0;
  for (std::size_t k = 0; k < n_objects; ++k) {
    Vec3 radius{};
    std::array<std::int64_t, 3> cmin{}, cmax{};
    for (int draw = 0;; ++draw) {
      if (draw == kRadiusRedraws) {
        throw std::runtime_error(
            "phantom: no radius in [" + std::to_string(r_lo) + ", " + std::to_string(r_hi) +
            "] mm gives a voxelized volume within 20% of the ellipsoid volume after " +
            std::to_string(kRadiusRedraws) + " draws; use larger radii or finer spacing");
      }
      for (int a = 0; a < 3; ++a) radius[a] = placement.uniform(r_lo, r_hi);
      if (close_to_analytic(spec.spacing, radius)) break;
    }
    for (int a = 0; a < 3; ++a) {
      const auto margin = static_cast<std::int64_t>(std::ceil(radius[a] / spec.spacing[a]));
      cmin[a] = margin;
      cmax[a] = static_cast<std::int64_t>(spec.dims[a]) - 1 - margin;
      if (cmax[a] < cmin[a]) {
        throw std::runtime_error("phantom: lesion radius " + std::to_string(radius[a]) +
                                 " mm does not fit inside axis " + std::to_string(a) + " (" +
                                 std::to_string(spec.dims[a]) + " voxels of " +
                                 std::to_string(spec.spacing[a]) + " mm)");
      }
    }
    bool ok = false;
    while (!ok) {
      if (attempts == budget) {
        throw std::runtime_error("phantom: could not place " + std::to_string(n_objects) +
                                 " non-overlapping lesions within " + std::to_string(budget) +
                                 " attempts; the volume is too small for the requested lesions");
      }
      ++attempts;
      Index3 c{};
      for (int a = 0; a < 3; ++a) c[a] = placement.between(cmin[a], cmax[a]);
      ok = std::all_of(placed.begin(), placed.end(), [&](const Placed& p) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = static_cast<double>(c[a] - p.center[a]) * spec.spacing[a];
          d2 += d * d;
        }
        const double min_gap = max_radius(radius) + max_radius(p.radius) + diag;
        return d2 > min_gap * min_gap;
      });
      if (ok) placed.push_back({c, radius});
    }
  }

  const std::size_t n = grid.voxel_count();
  std::vector<std::uint8_t> gt(n, 0);
  std::vector<float> pet(n, static_cast<float>(spec.pet_background_level));
  std::vector<LesionRecord> records;
  records.reserve(n_objects);
  for (std::size_t k = 0; k < placed.size(); ++k) {
    const bool lesion = k < spec.n_lesions;
    LesionRecord rec;
    rec.center_voxel = placed[k].center;
    rec.center_mm = grid.to_world({static_cast<double>(placed[k].center[0]),
                                   static_cast<double>(placed[k].center[1]),
                                   static_cast<double>(placed[k].center[2])});
    rec.radius_mm = placed[k].radius;
    rec.in_ground_truth = lesion;
    for_each_inside(grid, placed[k], [&](std::size_t i) {
      if (lesion) gt[i] = 1;
      pet[i] = static_cast<float>(spec.pet_background_level + spec.pet_lesion_uptake);
      ++rec.voxels;
    });
    records.push_back(rec);
  }

  if (spec.noise_sigma > 0.0) {
    Rng noise(spec.seed, streams::kPhantomNoise);
    for (auto& v : pet) v = static_cast<float>(static_cast<double>(v) + spec.noise_sigma * noise.normal());
  }

  std::vector<float> ct(n);
  std::size_t i = 0;
  for (std::size_t z = 0; z < spec.dims[2]; ++z) {
    for (std::size_t y = 0; y < spec.dims[1]; ++y) {
      for (std::size_t x = 0; x < spec.dims[0]; ++x) ct[i++] = ct_value(grid, x, y, z);
    }
  }

  return Phantom{Volume(grid, std::move(pet)), Volume(grid, std::move(ct)), Mask(grid, std::move(gt)),
                 std::move(records)};
}

std::string lesions_to_json(const PhantomSpec& spec, const std::vector<LesionRecord>& lesions) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["dims"] = spec.dims;
  j["spacing"] = spec.spacing;
  j["origin"] = spec.origin;
  j["n_lesions"] = spec.n_lesions;
  j["n_hot_spots"] = spec.n_hot_spots;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : lesions) {
    nlohmann::ordered_json e;
    e["center_mm"] = r.center_mm;
    e["center_voxel"] = r.center_voxel;
    e["radius_mm"] = r.radius_mm;
    e["voxels"] = r.voxels;
    e["in_ground_truth"] = r.in_ground_truth;
    arr.push_back(std::move(e));
  }
  j["lesions"] = std::move(arr);
  return j.dump(2) + "\n";
}

Mask corrupt_prediction(const Mask& gt, const CorruptionSpec& spec) {
  if (!(spec.boundary_drop >= 0.0 && spec.boundary_drop <= 1.0) ||
      !(spec.miss_probability >= 0.0 && spec.miss_probability <= 1.0)) {
    throw std::invalid_argument("corrupt_prediction: probabilities must lie in [0, 1]");
  }
  if (spec.spurious_blobs > 0 && spec.spurious_max_voxels == 0) {
    throw std::invalid_argument("corrupt_prediction: spurious_max_voxels must be >= 1");
  }
  const Grid3& grid = gt.grid();
  const auto [nx, ny, nz] = grid.dims();
  Rng rng(spec.seed, streams::kPhantomCorruption);

  const LabelMap components = label_components(gt, Connectivity::TwentySix);
  std::vector<std::uint8_t> keep(components.count() + 1, 1);
  for (std::size_t c = 1; c <= components.count(); ++c) {
    keep[c] = rng.uniform() < spec.miss_probability ? 0 : 1;
  }

  std::vector<std::uint8_t> out(gt.size(), 0);
  const auto& labels = components.labels();
  std::size_t i = 0;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t x = 0; x < nx; ++x, ++i) {
        const auto l = labels[i];
        if (l == 0 || !keep[l]) continue;
        const bool surface = x == 0 || y == 0 || z == 0 || x + 1 == nx || y + 1 == ny || z + 1 == nz ||
                             !gt.bits()[i - 1] || !gt.bits()[i + 1] || !gt.bits()[i - nx] ||
                             !gt.bits()[i + nx] || !gt.bits()[i - nx * ny] || !gt.bits()[i + nx * ny];
        out[i] = surface && rng.uniform() < spec.boundary_drop ? 0 : 1;
      }
    }
  }

  // Voxels within one 26-step of the ground truth or a previous blob are off limits.
  std::vector<std::uint8_t> forbidden(gt.size(), 0);
  auto forbid_around = [&](std::size_t idx) {
    const auto v = grid.delinearize(idx);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const Index3 w{static_cast<std::int64_t>(v[0]) + dx, static_cast<std::int64_t>(v[1]) + dy,
                         static_cast<std::int64_t>(v[2]) + dz};
          if (grid.contains(w)) {
            forbidden[grid.linearize(static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1]),
                                     static_cast<std::size_t>(w[2]))] = 1;
          }
        }
      }
    }
  };
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (gt.bits()[k]) forbid_around(k);
  }

  for (std::size_t b = 0; b < spec.spurious_blobs; ++b) {
    const auto target = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(spec.spurious_max_voxels)));
    std::size_t start = gt.size();
    for (int tries = 0; tries < 200 && start == gt.size(); ++tries) {
      const std::size_t cand = rng.below(gt.size());
      if (!forbidden[cand]) start = cand;
    }
    if (start == gt.size()) continue;
    std::vector<std::size_t> blob{start};
    for (int tries = 0; blob.size() < target && tries < 64; ++tries) {
      const auto v = grid.delinearize(blob[rng.below(blob.size())]);
      const int axis = static_cast<int>(rng.below(3));
      const int step = rng.below(2) == 0 ? -1 : 1;
      Index3 w{static_cast<std::int64_t>(v[0]), static_cast<std::int64_t>(v[1]), static_cast<std::int64_t>(v[2])};
      w[axis] += step;
      if (!grid.contains(w)) continue;
      const std::size_t idx = grid.linearize(static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1]),
                                             static_cast<std::size_t>(w[2]));
      if (forbidden[idx] || std::find(blob.begin(), blob.end(), idx) != blob.end()) continue;
      blob.push_back(idx);
    }
    for (auto idx : blob) out[idx] = 1;
    for (auto idx : blob) forbid_around(idx);
  }
  return Mask(grid, std::move(out));
}

}  // namespace lesionkit
