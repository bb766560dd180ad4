#include "lesionkit/preproc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lesionkit/log.hpp"
#include "lesionkit/nifti_io.hpp"

namespace lesionkit {
namespace {

struct AxisSample {
  std::size_t lo;
  std::size_t hi;
  double weight;  // of hi
  std::size_t nearest;
};

// Source sample positions along one axis for every target index.
std::vector<AxisSample> axis_samples(const Grid3& src, const Grid3& target, int axis) {
  const std::size_t n_src = src.dims()[axis];
  const std::size_t n_dst = target.dims()[axis];
  std::vector<AxisSample> out(n_dst);
  const double max_index = static_cast<double>(n_src - 1);
  for (std::size_t i = 0; i < n_dst; ++i) {
    const double world = target.origin()[axis] + static_cast<double>(i) * target.spacing()[axis];
    double c = (world - src.origin()[axis]) / src.spacing()[axis];
    const double rounded = std::round(c);
    if (std::abs(c - rounded) < 1e-9 * std::max(1.0, std::abs(c))) c = rounded;
    c = std::clamp(c, 0.0, max_index);
    const auto lo = static_cast<std::size_t>(std::floor(c));
    const std::size_t hi = std::min(lo + 1, n_src - 1);
    const double w = c - static_cast<double>(lo);
    out[i] = {lo, hi, w, w < 0.5 ? lo : hi};
  }
  return out;
}

template <typename T>
double percentile_impl(std::span<const T> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile: p must lie in [0, 100], got " + std::to_string(p));
  }
  std::vector<T> v(values.begin(), values.end());
  const std::size_t n = v.size();
  const double rank = p / 100.0 * static_cast<double>(n - 1);
  const auto k = std::min(static_cast<std::size_t>(std::floor(rank)), n - 1);
  const double frac = rank - static_cast<double>(k);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double lo = static_cast<double>(v[k]);
  if (k + 1 >= n || frac == 0.0) return lo;
  const double hi = static_cast<double>(*std::min_element(v.begin() + static_cast<std::ptrdiff_t>(k) + 1, v.end()));
  return lo + frac * (hi - lo);
}

DatasetIntensityStats stats_from_pool(std::vector<float> pool, double lo_pct, double hi_pct,
                                      std::string modality) {
  if (pool.empty()) throw std::invalid_argument("compute_dataset_stats: no voxels sampled");
  if (!(lo_pct <= hi_pct)) {
    throw std::invalid_argument("compute_dataset_stats: lower percentile exceeds upper");
  }
  DatasetIntensityStats s;
  s.modality = std::move(modality);
  s.percentile_lo_pct = lo_pct;
  s.percentile_hi_pct = hi_pct;
  s.clip_lo = percentile(std::span<const float>(pool), lo_pct);
  s.clip_hi = percentile(std::span<const float>(pool), hi_pct);
  s.n_voxels_sampled = pool.size();
  double sum = 0.0;
  for (float v : pool) sum += std::clamp(static_cast<double>(v), s.clip_lo, s.clip_hi);
  s.mean = sum / static_cast<double>(pool.size());
  double sq = 0.0;
  for (float v : pool) {
    const double d = std::clamp(static_cast<double>(v), s.clip_lo, s.clip_hi) - s.mean;
    sq += d * d;
  }
  s.std = std::sqrt(sq / static_cast<double>(pool.size()));
  return s;
}

void append_strided(std::vector<float>& pool, const Volume& vol, std::size_t stride) {
  const auto& values = vol.values();
  for (std::size_t i = 0; i < values.size(); i += stride) pool.push_back(values[i]);
}

// Clamping in double precision so clip bounds are not rounded before scaling.
Volume clip_zscore(const Volume& vol, double lo, double hi, double mean, double sd) {
  if (!(lo <= hi)) throw std::invalid_argument("clip: lo must not exceed hi");
  if (!(sd >= 0.0)) throw std::invalid_argument("zscore_normalize: std must be >= 0");
  if (sd < 1e-8) {
    log::warn("zscore_normalize: standard deviation " + std::to_string(sd) +
              " below 1e-8; output set to zero");
    return Volume(vol.grid(), 0.0f);
  }
  std::vector<float> out(vol.size());
  const auto& v = vol.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>((std::clamp(static_cast<double>(v[i]), lo, hi) - mean) / sd);
  }
  return Volume(vol.grid(), std::move(out));
}

}  // namespace

Volume resample_to_grid(const Volume& src, const Grid3& target, Interpolation mode) {
  if (src.grid() == target) return src;
  const auto sx = axis_samples(src.grid(), target, 0);
  const auto sy = axis_samples(src.grid(), target, 1);
  const auto sz = axis_samples(src.grid(), target, 2);
  const auto& v = src.values();
  const Grid3& g = src.grid();
  std::vector<float> out(target.voxel_count());
  std::size_t i = 0;
  for (const auto& z : sz) {
    for (const auto& y : sy) {
      if (mode == Interpolation::Nearest) {
        const std::size_t row = g.linearize(0, y.nearest, z.nearest);
        for (const auto& x : sx) out[i++] = v[row + x.nearest];
        continue;
      }
      const std::size_t r00 = g.linearize(0, y.lo, z.lo);
      const std::size_t r10 = g.linearize(0, y.hi, z.lo);
      const std::size_t r01 = g.linearize(0, y.lo, z.hi);
      const std::size_t r11 = g.linearize(0, y.hi, z.hi);
      for (const auto& x : sx) {
        auto lerp_x = [&](std::size_t row) {
          return (1.0 - x.weight) * static_cast<double>(v[row + x.lo]) +
                 x.weight * static_cast<double>(v[row + x.hi]);
        };
        const double c0 = (1.0 - y.weight) * lerp_x(r00) + y.weight * lerp_x(r10);
        const double c1 = (1.0 - y.weight) * lerp_x(r01) + y.weight * lerp_x(r11);
        out[i++] = static_cast<float>((1.0 - z.weight) * c0 + z.weight * c1);
      }
    }
  }
  return Volume(target, std::move(out));
}

Mask resample_to_grid(const Mask& src, const Grid3& target) {
  if (src.grid() == target) return src;
  const auto sx = axis_samples(src.grid(), target, 0);
  const auto sy = axis_samples(src.grid(), target, 1);
  const auto sz = axis_samples(src.grid(), target, 2);
  const auto& bits = src.bits();
  std::vector<std::uint8_t> out(target.voxel_count());
  std::size_t i = 0;
  for (const auto& z : sz) {
    for (const auto& y : sy) {
      const std::size_t row = src.grid().linearize(0, y.nearest, z.nearest);
      for (const auto& x : sx) out[i++] = bits[row + x.nearest];
    }
  }
  return Mask(target, std::move(out));
}

double percentile(std::span<const double> values, double p) { return percentile_impl(values, p); }
double percentile(std::span<const float> values, double p) { return percentile_impl(values, p); }

std::string DatasetIntensityStats::to_json() const {
  nlohmann::ordered_json j;
  j["modality"] = modality;
  j["percentile_lo_pct"] = percentile_lo_pct;
  j["percentile_hi_pct"] = percentile_hi_pct;
  j["clip_lo"] = clip_lo;
  j["clip_hi"] = clip_hi;
  j["mean"] = mean;
  j["std"] = std;
  j["n_voxels_sampled"] = n_voxels_sampled;
  return j.dump(2) + "\n";
}

DatasetIntensityStats DatasetIntensityStats::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DatasetIntensityStats s;
  s.modality = j.at("modality").get<std::string>();
  s.percentile_lo_pct = j.at("percentile_lo_pct").get<double>();
  s.percentile_hi_pct = j.at("percentile_hi_pct").get<double>();
  s.clip_lo = j.at("clip_lo").get<double>();
  s.clip_hi = j.at("clip_hi").get<double>();
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.n_voxels_sampled = j.at("n_voxels_sampled").get<std::uint64_t>();
  if (!(s.clip_lo <= s.clip_hi) || !(s.std >= 0.0)) {
    throw std::invalid_argument("intensity stats: require clip_lo <= clip_hi and std >= 0");
  }
  return s;
}

void DatasetIntensityStats::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

DatasetIntensityStats DatasetIntensityStats::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return from_json(os.str());
}

DatasetIntensityStats compute_dataset_stats(std::span<const Volume> volumes, double lo_pct,
                                            double hi_pct, std::size_t stride,
                                            std::string modality) {
  if (volumes.empty()) throw std::invalid_argument("compute_dataset_stats: no volumes");
  if (stride == 0) throw std::invalid_argument("compute_dataset_stats: stride must be >= 1");
  std::vector<float> pool;
  for (const auto& v : volumes) append_strided(pool, v, stride);
  return stats_from_pool(std::move(pool), lo_pct, hi_pct, std::move(modality));
}

DatasetIntensityStats compute_dataset_stats(std::span<const std::filesystem::path> paths,
                                            double lo_pct, double hi_pct, std::size_t stride,
                                            std::string modality) {
  if (paths.empty()) throw std::invalid_argument("compute_dataset_stats: no volumes");
  if (stride == 0) throw std::invalid_argument("compute_dataset_stats: stride must be >= 1");
  std::vector<float> pool;
  for (const auto& p : paths) {
    try {
      append_strided(pool, nifti::read_volume(p), stride);
    } catch (const std::exception& e) {
      throw std::runtime_error("compute_dataset_stats: cannot read '" + p.string() + "': " + e.what());
    }
  }
  return stats_from_pool(std::move(pool), lo_pct, hi_pct, std::move(modality));
}

MeanStd mean_std(const Volume& vol) {
  const auto& v = vol.values();
  double sum = 0.0;
  for (float x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (float x : v) {
    const double d = static_cast<double>(x) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

Volume clip(const Volume& vol, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clip: lo must not exceed hi");
  std::vector<float> out(vol.values());
  const auto flo = static_cast<float>(lo);
  const auto fhi = static_cast<float>(hi);
  for (auto& x : out) x = std::clamp(x, flo, fhi);
  return Volume(vol.grid(), std::move(out));
}

Volume zscore_normalize(const Volume& vol, double mean, double sd) {
  if (!(sd >= 0.0)) throw std::invalid_argument("zscore_normalize: std must be >= 0");
  if (sd < 1e-8) {
    log::warn("zscore_normalize: standard deviation " + std::to_string(sd) +
              " below 1e-8; output set to zero");
    return Volume(vol.grid(), 0.0f);
  }
  std::vector<float> out(vol.size());
  const auto& v = vol.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>((static_cast<double>(v[i]) - mean) / sd);
  }
  return Volume(vol.grid(), std::move(out));
}

Volume zscore_normalize(const Volume& vol) {
  const MeanStd s = mean_std(vol);
  return zscore_normalize(vol, s.mean, s.std);
}

PreprocessedCase preprocess_case(const Volume& pet, const Volume& ct,
                                 const DatasetIntensityStats& ct_stats,
                                 const PreprocessOptions& options) {
  const Volume ct_on_pet = resample_to_grid(ct, pet.grid(), Interpolation::Trilinear);
  Volume ct_norm = clip_zscore(ct_on_pet, ct_stats.clip_lo, ct_stats.clip_hi, ct_stats.mean,
                               ct_stats.std);
  if (options.pet_mode == PetNormalization::Dataset) {
    if (!options.pet_stats) {
      throw std::invalid_argument("preprocess_case: dataset PET normalization needs PET stats");
    }
    return {zscore_normalize(pet, options.pet_stats->mean, options.pet_stats->std),
            std::move(ct_norm)};
  }
  return {zscore_normalize(pet), std::move(ct_norm)};
}

}  // namespace lesionkit
