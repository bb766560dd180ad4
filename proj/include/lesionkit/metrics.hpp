#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesionkit/ccl.hpp"
#include "lesionkit/core.hpp"

namespace lesionkit {

struct CaseMetrics {
  std::string case_id;
  std::optional<double> dice;  // absent iff ground truth is empty
  double fp_volume_ml = 0.0;
  double fn_volume_ml = 0.0;
  std::uint64_t n_pred_components = 0;
  std::uint64_t n_gt_components = 0;
  double gt_foreground_ml = 0.0;
  double pred_foreground_ml = 0.0;
};

struct AggregateReport {
  std::size_t n_cases = 0;
  std::size_t n_tumour_cases = 0;
  std::optional<double> mean_dice;  // over tumour cases only
  double mean_fp_volume_ml = 0.0;   // over all cases
  double mean_fn_volume_ml = 0.0;   // over all cases
  std::vector<CaseMetrics> cases;   // ascending case_id
};

/// Global foreground Dice; empty when gt has no foreground.
std::optional<double> dice_score(const Mask& pred, const Mask& gt);

/// Volume (mL) of predicted components that share no voxel with gt.
double false_positive_volume(const Mask& pred, const Mask& gt,
                             Connectivity conn = kDefaultConnectivity);

/// Volume (mL) of gt components that share no voxel with pred.
double false_negative_volume(const Mask& pred, const Mask& gt,
                             Connectivity conn = kDefaultConnectivity);

/// Sum of sizes of components in `labels` with no voxel in `other`, in voxels.
std::uint64_t unmatched_component_voxels(const LabelMap& labels, const Mask& other);

CaseMetrics evaluate_case(std::string case_id, const Mask& pred, const Mask& gt,
                          Connectivity conn = kDefaultConnectivity);

/// Means in ascending case_id order. Throws on an empty list or duplicate ids.
AggregateReport aggregate(std::vector<CaseMetrics> cases);

/// Report JSON with keys in a fixed order: n_cases, n_tumour_cases,
/// mean_dice, mean_fp_volume_ml, mean_fn_volume_ml, connectivity,
/// min_size_applied, cases[]. Absent Dice values serialize as null.
std::string report_to_json(const AggregateReport& report, Connectivity conn,
                           std::int64_t min_size_applied);

}  // namespace lesionkit
