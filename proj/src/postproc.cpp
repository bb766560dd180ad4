#include "lesionkit/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lesionkit/metrics.hpp"
#include "lesionkit/util.hpp"

namespace lesionkit {

Mask filter_min_size(const LabelMap& labels, std::uint64_t min_voxels) {
  const auto& sizes = labels.sizes();
  std::vector<std::uint8_t> keep(sizes.size() + 1, 0);
  for (std::size_t c = 0; c < sizes.size(); ++c) keep[c + 1] = sizes[c] >= min_voxels ? 1 : 0;
  const auto& l = labels.labels();
  std::vector<std::uint8_t> bits(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) bits[i] = keep[l[i]];
  return Mask(labels.grid(), std::move(bits));
}

Mask filter_min_size(const Mask& mask, std::uint64_t min_voxels, Connectivity conn) {
  if (min_voxels == 0) return mask;
  return filter_min_size(label_components(mask, conn), min_voxels);
}

std::uint64_t min_voxels_for_volume(double min_ml, const Grid3& grid) {
  if (!(min_ml >= 0.0) || !std::isfinite(min_ml)) {
    throw std::invalid_argument("minimum size in mL must be a non-negative number");
  }
  const double voxels = min_ml / voxel_volume_ml(grid);
  // Tolerate round-off so that an exact multiple of the voxel volume is not bumped up.
  return static_cast<std::uint64_t>(std::ceil(voxels - 1e-9 * std::max(1.0, voxels)));
}

std::vector<SweepRow> threshold_sweep(std::span<const Mask> preds, std::span<const Mask> gts,
                                      std::span<const std::uint64_t> thresholds,
                                      Connectivity conn, unsigned jobs,
                                      std::span<const std::string> case_ids) {
  if (preds.size() != gts.size()) {
    throw std::invalid_argument("threshold_sweep: " + std::to_string(preds.size()) +
                                " predictions but " + std::to_string(gts.size()) +
                                " ground truths");
  }
  if (preds.empty()) throw std::invalid_argument("threshold_sweep: no cases");
  std::vector<std::uint64_t> sorted(thresholds.begin(), thresholds.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("threshold_sweep: thresholds must be distinct");
  }
  if (sorted.empty()) throw std::invalid_argument("threshold_sweep: no thresholds");
  if (!case_ids.empty() && case_ids.size() != preds.size()) {
    throw std::invalid_argument("threshold_sweep: case id count does not match case count");
  }
  for (std::size_t c = 0; c < preds.size(); ++c) {
    require_same_geometry(preds[c].grid(), gts[c].grid(),
                          ("threshold_sweep case " + std::to_string(c)).c_str());
  }

  // per_case[c][t] holds the metrics of case c at threshold index t.
  std::vector<std::vector<CaseMetrics>> per_case(preds.size());
  const int width = static_cast<int>(std::to_string(preds.size()).size());
  parallel_for(preds.size(), jobs, [&](std::size_t c) {
    std::string id;
    if (case_ids.empty()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "case_%0*zu", width, c);
      id = buf;
    } else {
      id = case_ids[c];
    }
    const LabelMap pred_cc = label_components(preds[c], conn);
    auto& row = per_case[c];
    row.reserve(sorted.size());
    for (const auto t : sorted) {
      const Mask filtered = t == 0 ? preds[c] : filter_min_size(pred_cc, t);
      row.push_back(evaluate_case(id, filtered, gts[c], conn));
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(sorted.size());
  for (std::size_t t = 0; t < sorted.size(); ++t) {
    std::vector<CaseMetrics> cases;
    cases.reserve(preds.size());
    for (auto& row : per_case) cases.push_back(row[t]);
    const AggregateReport r = aggregate(std::move(cases));
    rows.push_back({sorted[t], r.mean_dice, r.mean_fp_volume_ml, r.mean_fn_volume_ml});
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "threshold_voxels,mean_dice,mean_fp_volume_ml,mean_fn_volume_ml\n";
  for (const auto& r : rows) {
    out += std::to_string(r.threshold_voxels);
    out += ',';
    if (r.mean_dice) out += format_number(*r.mean_dice);
    out += ',';
    out += format_number(r.mean_fp_volume_ml);
    out += ',';
    out += format_number(r.mean_fn_volume_ml);
    out += '\n';
  }
  return out;
}

}  // namespace lesionkit
