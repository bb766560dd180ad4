#include "lesionkit/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lesionkit {

std::optional<double> dice_score(const Mask& pred, const Mask& gt) {
  const std::size_t both = overlap_count(pred, gt);
  if (gt.empty()) return std::nullopt;
  const double denom = static_cast<double>(pred.foreground_count() + gt.foreground_count());
  return 2.0 * static_cast<double>(both) / denom;
}

std::uint64_t unmatched_component_voxels(const LabelMap& labels, const Mask& other) {
  require_same_geometry(labels.grid(), other.grid(), "unmatched_component_voxels");
  std::vector<std::uint8_t> matched(labels.count() + 1, 0);
  const auto& l = labels.labels();
  const auto& bits = other.bits();
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (bits[i]) matched[l[i]] = 1;
  }
  std::uint64_t voxels = 0;
  for (std::size_t c = 1; c <= labels.count(); ++c) {
    if (!matched[c]) voxels += labels.sizes()[c - 1];
  }
  return voxels;
}

double false_positive_volume(const Mask& pred, const Mask& gt, Connectivity conn) {
  require_same_geometry(pred.grid(), gt.grid(), "false_positive_volume");
  const LabelMap components = label_components(pred, conn);
  return static_cast<double>(unmatched_component_voxels(components, gt)) *
         voxel_volume_ml(pred.grid());
}

double false_negative_volume(const Mask& pred, const Mask& gt, Connectivity conn) {
  require_same_geometry(pred.grid(), gt.grid(), "false_negative_volume");
  const LabelMap components = label_components(gt, conn);
  return static_cast<double>(unmatched_component_voxels(components, pred)) *
         voxel_volume_ml(gt.grid());
}

CaseMetrics evaluate_case(std::string case_id, const Mask& pred, const Mask& gt, Connectivity conn) {
  require_same_geometry(pred.grid(), gt.grid(), "evaluate_case");
  const LabelMap pred_cc = label_components(pred, conn);
  const LabelMap gt_cc = label_components(gt, conn);

  CaseMetrics m;
  m.case_id = std::move(case_id);
  m.dice = dice_score(pred, gt);
  m.fp_volume_ml =
      static_cast<double>(unmatched_component_voxels(pred_cc, gt)) * voxel_volume_ml(pred.grid());
  m.fn_volume_ml =
      static_cast<double>(unmatched_component_voxels(gt_cc, pred)) * voxel_volume_ml(gt.grid());
  m.n_pred_components = pred_cc.count();
  m.n_gt_components = gt_cc.count();
  m.gt_foreground_ml = static_cast<double>(gt.foreground_count()) * voxel_volume_ml(gt.grid());
  m.pred_foreground_ml = static_cast<double>(pred.foreground_count()) * voxel_volume_ml(pred.grid());
  return m;
}

AggregateReport aggregate(std::vector<CaseMetrics> cases) {
  if (cases.empty()) throw std::invalid_argument("aggregate: no cases");
  std::sort(cases.begin(), cases.end(),
            [](const CaseMetrics& a, const CaseMetrics& b) { return a.case_id < b.case_id; });
  for (std::size_t i = 1; i < cases.size(); ++i) {
    if (cases[i].case_id == cases[i - 1].case_id) {
      throw std::invalid_argument("aggregate: duplicate case_id '" + cases[i].case_id + "'");
    }
  }
  AggregateReport r;
  r.n_cases = cases.size();
  double dice_sum = 0.0;
  double fp_sum = 0.0;
  double fn_sum = 0.0;
  for (const auto& c : cases) {
    if (c.dice) {
      ++r.n_tumour_cases;
      dice_sum += *c.dice;
    }
    fp_sum += c.fp_volume_ml;
    fn_sum += c.fn_volume_ml;
  }
  if (r.n_tumour_cases > 0) r.mean_dice = dice_sum / static_cast<double>(r.n_tumour_cases);
  r.mean_fp_volume_ml = fp_sum / static_cast<double>(r.n_cases);
  r.mean_fn_volume_ml = fn_sum / static_cast<double>(r.n_cases);
  r.cases = std::move(cases);
  return r;
}

std::string report_to_json(const AggregateReport& report, Connectivity conn,
                           std::int64_t min_size_applied) {
  using nlohmann::ordered_json;
  auto optional_number = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["n_cases"] = report.n_cases;
  j["n_tumour_cases"] = report.n_tumour_cases;
  j["mean_dice"] = optional_number(report.mean_dice);
  j["mean_fp_volume_ml"] = report.mean_fp_volume_ml;
  j["mean_fn_volume_ml"] = report.mean_fn_volume_ml;
  j["connectivity"] = to_int(conn);
  j["min_size_applied"] = min_size_applied;
  ordered_json cases = ordered_json::array();
  for (const auto& c : report.cases) {
    ordered_json e;
    e["case_id"] = c.case_id;
    e["dice"] = optional_number(c.dice);
    e["fp_volume_ml"] = c.fp_volume_ml;
    e["fn_volume_ml"] = c.fn_volume_ml;
    e["n_pred_components"] = c.n_pred_components;
    e["n_gt_components"] = c.n_gt_components;
    cases.push_back(std::move(e));
  }
  j["cases"] = std::move(cases);
  return j.dump(2) + "\n";
}

}  // namespace lesionkit
