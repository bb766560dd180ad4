#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <variant>

#include "lesionkit/core.hpp"

namespace lesionkit {

namespace aug {
struct GaussianNoise { double sigma = 0.1; };
struct GaussianBlur { double sigma_mm = 1.0; };
struct Gamma { double gamma = 1.0; };
struct Brightness { double delta = 0.0; };
struct Contrast { double factor = 1.0; };
struct Mirror { std::set<int> axes; };
struct LowResolution { double scale = 1.0; };
}  // namespace aug

using AugmentKind = std::variant<aug::GaussianNoise, aug::GaussianBlur, aug::Gamma,
                                 aug::Brightness, aug::Contrast, aug::Mirror,
                                 aug::LowResolution>;

struct AugmentSpec {
  AugmentKind kind;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument if a parameter is out of its domain.
void validate(const AugmentSpec& spec);
std::string describe(const AugmentSpec& spec);

/// Applies one augmentation. Output depends only on (vol, spec).
///
///  - noise: adds i.i.d. N(0, sigma^2) from Rng(seed, streams::kAugmentNoise)
///  - blur: separable Gaussian, sigma in mm converted per axis, kernel
///    truncated at 3 sigma and normalized, clamp-to-edge borders
///  - gamma: min-max normalize, v -> v^g, restore the range
///  - brightness: adds delta
///  - contrast: scales deviations from the volume mean by factor
///  - mirror: reverses the listed axes
///  - low resolution: trilinear downsample by scale, trilinear upsample back
Volume apply_augment(const Volume& vol, const AugmentSpec& spec);

Volume mirror(const Volume& vol, const std::set<int>& axes);
Mask apply_mirror_mask(const Mask& mask, const std::set<int>& axes);

}  // namespace lesionkit
