#include "lesionkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lesionkit/preproc.hpp"
#include "lesionkit/random.hpp"

namespace lesionkit {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_axes(const std::set<int>& axes) {
  for (int a : axes) {
    if (a < 0 || a > 2) throw std::invalid_argument("mirror axis must be 0, 1 or 2, got " + std::to_string(a));
  }
}

// Index permutation shared by volume and mask mirroring.
template <typename T>
std::vector<T> mirror_values(const std::vector<T>& in, const Grid3& grid, const std::set<int>& axes) {
  check_axes(axes);
  const auto [nx, ny, nz] = grid.dims();
  const bool fx = axes.count(0) > 0;
  const bool fy = axes.count(1) > 0;
  const bool fz = axes.count(2) > 0;
  std::vector<T> out(in.size());
  std::size_t i = 0;
  for (std::size_t z = 0; z < nz; ++z) {
    const std::size_t sz = fz ? nz - 1 - z : z;
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t sy = fy ? ny - 1 - y : y;
      const std::size_t row = grid.linearize(0, sy, sz);
      for (std::size_t x = 0; x < nx; ++x) out[i++] = in[row + (fx ? nx - 1 - x : x)];
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma_vox) {
  const auto radius = static_cast<int>(std::ceil(3.0 * sigma_vox));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma_vox * sigma_vox));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

// Convolves along one axis in place with clamp-to-edge borders.
void convolve_axis(std::vector<double>& data, const Grid3& grid, int axis,
                   const std::vector<double>& kernel) {
  const auto& d = grid.dims();
  const std::size_t n = d[axis];
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d[0] : d[0] * d[1];
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> line(n);
  std::vector<double> result(n);
  const std::size_t lines = grid.voxel_count() / n;
  for (std::size_t l = 0; l < lines; ++l) {
    // Decompose l into the base index of the line.
    std::size_t base;
    if (axis == 0) {
      base = l * d[0];
    } else if (axis == 1) {
      base = (l % d[0]) + (l / d[0]) * d[0] * d[1];
    } else {
      base = l;
    }
    for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const auto j = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + k, 0,
                                                  static_cast<std::ptrdiff_t>(n) - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * line[static_cast<std::size_t>(j)];
      }
      result[i] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = result[i];
  }
}

Volume blur(const Volume& vol, double sigma_mm) {
  std::vector<double> data(vol.values().begin(), vol.values().end());
  for (int a = 0; a < 3; ++a) {
    const double sigma_vox = sigma_mm / vol.grid().spacing()[a];
    if (sigma_vox <= 0.0 || vol.grid().dims()[a] == 1) continue;
    convolve_axis(data, vol.grid(), a, gaussian_kernel(sigma_vox));
  }
  std::vector<float> out(data.begin(), data.end());
  return Volume(vol.grid(), std::move(out));
}

Volume map_values(const Volume& vol, auto&& fn) {
  std::vector<float> out(vol.size());
  const auto& v = vol.values();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(fn(static_cast<double>(v[i])));
  return Volume(vol.grid(), std::move(out));
}

Volume low_resolution(const Volume& vol, double scale) {
  if (scale == 1.0) return vol;
  const Grid3& g = vol.grid();
  Dims3 dims{};
  Vec3 spacing{};
  Vec3 origin{};
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(g.dims()[a]) * scale)));
    // Same physical extent, voxel edges aligned with the original grid.
    spacing[a] = g.spacing()[a] * static_cast<double>(g.dims()[a]) / static_cast<double>(dims[a]);
    origin[a] = g.origin()[a] - 0.5 * g.spacing()[a] + 0.5 * spacing[a];
  }
  const Volume coarse = resample_to_grid(vol, Grid3(dims, spacing, origin), Interpolation::Trilinear);
  return resample_to_grid(coarse, g, Interpolation::Trilinear);
}

}  // namespace

void validate(const AugmentSpec& spec) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  std::visit(overloaded{
                 [&](const aug::GaussianNoise& a) {
                   require(a.sigma >= 0.0 && std::isfinite(a.sigma), "gaussian_noise: sigma must be >= 0");
                 },
                 [&](const aug::GaussianBlur& a) {
                   require(a.sigma_mm >= 0.0 && std::isfinite(a.sigma_mm), "gaussian_blur: sigma must be >= 0");
                 },
                 [&](const aug::Gamma& a) {
                   require(a.gamma > 0.0 && std::isfinite(a.gamma), "gamma: exponent must be > 0");
                 },
                 [&](const aug::Brightness& a) {
                   require(std::isfinite(a.delta), "brightness: delta must be finite");
                 },
                 [&](const aug::Contrast& a) {
                   require(a.factor > 0.0 && std::isfinite(a.factor), "contrast: factor must be > 0");
                 },
                 [&](const aug::Mirror& a) { check_axes(a.axes); },
                 [&](const aug::LowResolution& a) {
                   require(a.scale > 0.0 && a.scale <= 1.0, "low_resolution: scale must lie in (0, 1]");
                 },
             },
             spec.kind);
}

std::string describe(const AugmentSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const aug::GaussianNoise& a) { os << "gaussian_noise(sigma=" << a.sigma << ")"; },
                 [&](const aug::GaussianBlur& a) { os << "gaussian_blur(sigma_mm=" << a.sigma_mm << ")"; },
                 [&](const aug::Gamma& a) { os << "gamma(g=" << a.gamma << ")"; },
                 [&](const aug::Brightness& a) { os << "brightness(delta=" << a.delta << ")"; },
                 [&](const aug::Contrast& a) { os << "contrast(factor=" << a.factor << ")"; },
                 [&](const aug::Mirror& a) {
                   os << "mirror(axes=";
                   for (int ax : a.axes) os << ax;
                   os << ")";
                 },
                 [&](const aug::LowResolution& a) { os << "low_resolution(scale=" << a.scale << ")"; },
             },
             spec.kind);
  os << " seed=" << spec.seed;
  return os.str();
}

Volume mirror(const Volume& vol, const std::set<int>& axes) {
  return Volume(vol.grid(), mirror_values(vol.values(), vol.grid(), axes));
}

Mask apply_mirror_mask(const Mask& mask, const std::set<int>& axes) {
  return Mask(mask.grid(), mirror_values(mask.bits(), mask.grid(), axes));
}

Volume apply_augment(const Volume& vol, const AugmentSpec& spec) {
  validate(spec);
  return std::visit(
      overloaded{
          [&](const aug::GaussianNoise& a) {
            if (a.sigma == 0.0) return vol;
            Rng rng(spec.seed, streams::kAugmentNoise);
            return map_values(vol, [&](double v) { return v + a.sigma * rng.normal(); });
          },
          [&](const aug::GaussianBlur& a) { return a.sigma_mm == 0.0 ? vol : blur(vol, a.sigma_mm); },
          [&](const aug::Gamma& a) {
            const auto [lo_it, hi_it] = std::minmax_element(vol.values().begin(), vol.values().end());
            const double lo = *lo_it;
            const double range = static_cast<double>(*hi_it) - lo;
            if (range <= 0.0 || a.gamma == 1.0) return vol;
            return map_values(vol, [&](double v) { return std::pow((v - lo) / range, a.gamma) * range + lo; });
          },
          [&](const aug::Brightness& a) { return map_values(vol, [&](double v) { return v + a.delta; }); },
          [&](const aug::Contrast& a) {
            const double mean = mean_std(vol).mean;
            return map_values(vol, [&](double v) { return mean + (v - mean) * a.factor; });
          },
          [&](const aug::Mirror& a) { return mirror(vol, a.axes); },
          [&](const aug::LowResolution& a) { return low_resolution(vol, a.scale); },
      },
      spec.kind);
}

}  // namespace lesionkit
