#include "lesionkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lesionkit {
namespace {

struct DiceSums {
  double pg = 0.0;
  double p = 0.0;
  double g = 0.0;
};

DiceSums dice_sums(const ProbField& p, const Mask& g, const char* what) {
  require_same_geometry(p.grid(), g.grid(), what);
  DiceSums s;
  const auto& pv = p.probs();
  const auto& gv = g.bits();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double gi = gv[i];
    s.pg += pv[i] * gi;
    s.p += pv[i];
    s.g += gi;
  }
  return s;
}

void check_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("soft dice: eps must be > 0");
}

}  // namespace

ProbField::ProbField(Grid3 grid, std::vector<double> probs) : grid_(grid), probs_(std::move(probs)) {
  if (probs_.size() != grid_.voxel_count()) {
    throw std::invalid_argument("ProbField: expected " + std::to_string(grid_.voxel_count()) +
                                " values, got " + std::to_string(probs_.size()));
  }
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double v = probs_[i];
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
      throw std::invalid_argument("ProbField: value " + std::to_string(v) + " at voxel " +
                                  std::to_string(i) + " outside [0, 1]");
    }
  }
}

double soft_dice_loss(const ProbField& p, const Mask& g, double eps) {
  check_eps(eps);
  const DiceSums s = dice_sums(p, g, "soft_dice_loss");
  return 1.0 - (2.0 * s.pg + eps) / (s.p + s.g + eps);
}

std::vector<double> soft_dice_grad(const ProbField& p, const Mask& g, double eps) {
  check_eps(eps);
  const DiceSums s = dice_sums(p, g, "soft_dice_grad");
  const double denom = s.p + s.g + eps;
  const double numer = 2.0 * s.pg + eps;
  const double inv_sq = 1.0 / (denom * denom);
  std::vector<double> grad(p.size());
  const auto& gv = g.bits();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = -(2.0 * gv[i] * denom - numer) * inv_sq;
  }
  return grad;
}

double cross_entropy_loss(const ProbField& p, const Mask& g, double clip) {
  if (!(clip > 0.0 && clip < 0.5)) throw std::invalid_argument("cross entropy: clip must lie in (0, 0.5)");
  require_same_geometry(p.grid(), g.grid(), "cross_entropy_loss");
  const auto& pv = p.probs();
  const auto& gv = g.bits();
  double sum = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double q = std::clamp(pv[i], clip, 1.0 - clip);
    sum += gv[i] ? -std::log(q) : -std::log(1.0 - q);
  }
  return sum / static_cast<double>(pv.size());
}

double combined_loss(const ProbField& p, const Mask& g) {
  return soft_dice_loss(p, g, kDefaultDiceEps) + cross_entropy_loss(p, g, kDefaultCeClip);
}

double poly_lr(long epoch, long max_epochs, double lr0, double exponent) {
  if (max_epochs <= 0) throw std::invalid_argument("poly_lr: max_epochs must be > 0");
  if (epoch < 0 || epoch > max_epochs) {
    throw std::invalid_argument("poly_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                                std::to_string(max_epochs) + "]");
  }
  if (!(lr0 > 0.0)) throw std::invalid_argument("poly_lr: lr0 must be > 0");
  if (!(exponent > 0.0)) throw std::invalid_argument("poly_lr: exponent must be > 0");
  return lr0 * std::pow(1.0 - static_cast<double>(epoch) / static_cast<double>(max_epochs), exponent);
}

}  // namespace lesionkit
