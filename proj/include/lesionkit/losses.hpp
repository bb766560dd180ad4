#pragma once

#include <vector>

#include "lesionkit/core.hpp"

namespace lesionkit {

inline constexpr double kDefaultDiceEps = 1e-5;
inline constexpr double kDefaultCeClip = 1e-7;
inline constexpr double kDefaultPolyExponent = 0.9;

/// Per-voxel foreground probability in [0, 1] (checked to 1e-9).
class ProbField {
 public:
  ProbField(Grid3 grid, std::vector<double> probs);

  const Grid3& grid() const noexcept { return grid_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }

 private:
  Grid3 grid_;
  std::vector<double> probs_;
};

/// 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps)
double soft_dice_loss(const ProbField& p, const Mask& g, double eps = kDefaultDiceEps);

/// Analytic gradient of soft_dice_loss with respect to each p_i.
std::vector<double> soft_dice_grad(const ProbField& p, const Mask& g, double eps = kDefaultDiceEps);

/// Mean binary cross-entropy with p clamped to [clip, 1 - clip].
double cross_entropy_loss(const ProbField& p, const Mask& g, double clip = kDefaultCeClip);

/// soft_dice_loss + cross_entropy_loss at default eps and clip.
double combined_loss(const ProbField& p, const Mask& g);

/// lr0 * (1 - epoch / max_epochs)^exponent
double poly_lr(long epoch, long max_epochs, double lr0, double exponent = kDefaultPolyExponent);

}  // namespace lesionkit
