#include "lesionkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "lesionkit/ccl.hpp"
#include "lesionkit/log.hpp"
#include "lesionkit/metrics.hpp"
#include "lesionkit/nifti_io.hpp"
#include "lesionkit/phantom.hpp"
#include "lesionkit/postproc.hpp"
#include "lesionkit/preproc.hpp"
#include "lesionkit/sampler.hpp"
#include "lesionkit/util.hpp"

namespace fs = std::filesystem;

namespace lesionkit::cli {
namespace {

/// Bad flags, missing files in a case layout and the like; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::optional<fs::path> find_image(const fs::path& dir, const std::string& name) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    fs::path p = dir / (name + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::set<std::string> subdirectories(const fs::path& dir) {
  std::set<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) out.insert(entry.path().filename().string());
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void require_directory(const fs::path& dir, const char* flag) {
  if (!fs::is_directory(dir)) {
    throw UsageError(std::string(flag) + " '" + dir.string() + "' is not a directory");
  }
}

std::vector<CaseFiles> paired_cases_or_throw(const fs::path& pred_dir, const fs::path& gt_dir) {
  require_directory(pred_dir, "--pred");
  require_directory(gt_dir, "--gt");
  CaseDiscovery d = discover_cases(pred_dir, "pred", gt_dir, "gt");
  if (!d.unpaired.empty()) {
    std::string msg = "unpaired cases:";
    for (const auto& u : d.unpaired) msg += "\n  " + u;
    throw UsageError(msg);
  }
  if (d.cases.empty()) throw UsageError("no cases found");
  return std::move(d.cases);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw UsageError("invalid number '" + item + "' in list '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<std::uint64_t> parse_thresholds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (double v : parse_number_list(text)) {
    if (v < 0.0 || v != std::floor(v)) {
      throw UsageError("thresholds must be non-negative integers, got '" + text + "'");
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  std::vector<std::uint64_t> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("thresholds must be distinct, got '" + text + "'");
  }
  return out;
}

struct MinSize {
  std::uint64_t voxels = 0;
  std::optional<double> ml;

  std::uint64_t for_grid(const Grid3& grid) const {
    return ml ? min_voxels_for_volume(*ml, grid) : voxels;
  }
};

void add_connectivity_option(CLI::App* cmd, int& conn) {
  cmd->add_option("--connectivity", conn, "Voxel neighbourhood: 6, 18 or 26")
      ->check(CLI::IsMember({6, 18, 26}))
      ->capture_default_str();
}

void add_min_size_options(CLI::App* cmd, std::uint64_t& voxels, double& ml) {
  auto* vox = cmd->add_option("--min-size", voxels, "Remove predicted components with fewer voxels")
                  ->capture_default_str();
  cmd->add_option("--min-size-ml", ml, "Minimum component size in mL (rounded up to voxels)")
      ->check(CLI::NonNegativeNumber)
      ->excludes(vox);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  fs::path pred, gt, out;
  int connectivity = 26;
  std::uint64_t min_size = 0;
  double min_size_ml = -1.0;
  unsigned jobs = default_jobs();
};

int cmd_eval(const EvalArgs& a) {
  const auto cases = paired_cases_or_throw(a.pred, a.gt);
  const Connectivity conn = connectivity_from_int(a.connectivity);
  MinSize min_size{a.min_size, a.min_size_ml >= 0.0 ? std::optional(a.min_size_ml) : std::nullopt};

  std::vector<CaseMetrics> results(cases.size());
  std::vector<std::uint64_t> applied(cases.size(), 0);
  parallel_for(cases.size(), a.jobs, [&](std::size_t k) {
    const auto& c = cases[k];
    Mask pred = nifti::read_mask(c.first);
    const Mask gt = nifti::read_mask(c.second);
    applied[k] = min_size.for_grid(pred.grid());
    if (applied[k] > 0) pred = filter_min_size(pred, applied[k], conn);
    results[k] = evaluate_case(c.id, pred, gt, conn);
    const auto& m = results[k];
    log::info(c.id + ": dice=" + (m.dice ? format_fixed(*m.dice, 3) : std::string("n/a")) +
              " fp=" + format_fixed(m.fp_volume_ml, 3) + " mL fn=" + format_fixed(m.fn_volume_ml, 3) +
              " mL");
  });

  std::int64_t min_size_applied = static_cast<std::int64_t>(applied.front());
  if (std::adjacent_find(applied.begin(), applied.end(), std::not_equal_to<>()) != applied.end()) {
    log::warn("--min-size-ml maps to different voxel counts across cases; report records -1");
    min_size_applied = -1;
  }
  const AggregateReport report = aggregate(std::move(results));
  write_text(a.out, report_to_json(report, conn, min_size_applied));
  log::info("cases=" + std::to_string(report.n_cases) + " tumour_cases=" +
            std::to_string(report.n_tumour_cases) + " mean_dice=" +
            (report.mean_dice ? format_fixed(*report.mean_dice, 3) : std::string("n/a")) +
            " mean_fp=" + format_fixed(report.mean_fp_volume_ml, 3) + " mL mean_fn=" +
            format_fixed(report.mean_fn_volume_ml, 3) +
            " mL (grids treated as axis-aligned; FP/FN averaged over all cases)");
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  fs::path pred, gt, out;
  std::string thresholds = "0,5,10,20,40,80";
  int connectivity = 26;
  unsigned jobs = default_jobs();
};

int cmd_sweep(const SweepArgs& a) {
  const auto thresholds = parse_thresholds(a.thresholds);
  const auto cases = paired_cases_or_throw(a.pred, a.gt);
  const Connectivity conn = connectivity_from_int(a.connectivity);
  std::vector<std::optional<Mask>> preds(cases.size()), gts(cases.size());
  parallel_for(cases.size(), a.jobs, [&](std::size_t k) {
    preds[k] = nifti::read_mask(cases[k].first);
    gts[k] = nifti::read_mask(cases[k].second);
  });
  std::vector<Mask> pred_list, gt_list;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    pred_list.push_back(std::move(*preds[k]));
    gt_list.push_back(std::move(*gts[k]));
    ids.push_back(cases[k].id);
  }
  const auto rows = threshold_sweep(pred_list, gt_list, thresholds, conn, a.jobs, ids);
  write_text(a.out, sweep_to_csv(rows));
  for (const auto& r : rows) {
    log::info("threshold=" + std::to_string(r.threshold_voxels) + " dice=" +
              (r.mean_dice ? format_fixed(*r.mean_dice, 3) : std::string("n/a")) + " fp=" +
              format_fixed(r.mean_fp_volume_ml, 3) + " fn=" + format_fixed(r.mean_fn_volume_ml, 3));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- postproc

struct PostprocArgs {
  fs::path in, out;
  std::uint64_t min_size = 0;
  double min_size_ml = -1.0;
  int connectivity = 26;
};

int cmd_postproc(const PostprocArgs& a) {
  const Mask mask = nifti::read_mask(a.in);
  MinSize min_size{a.min_size, a.min_size_ml >= 0.0 ? std::optional(a.min_size_ml) : std::nullopt};
  const std::uint64_t k = min_size.for_grid(mask.grid());
  const Mask filtered = filter_min_size(mask, k, connectivity_from_int(a.connectivity));
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  nifti::write_mask(filtered, a.out);
  log::info("kept " + std::to_string(filtered.foreground_count()) + " of " +
            std::to_string(mask.foreground_count()) + " foreground voxels (min size " +
            std::to_string(k) + " voxels)");
  return kExitOk;
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
  fs::path cases, stats, out;
  bool compute_stats = false;
  double lo_pct = kDefaultClipLoPct;
  double hi_pct = kDefaultClipHiPct;
  std::size_t stride = 1;
  std::string pet_norm = "per-volume";
  fs::path pet_stats;
  unsigned jobs = default_jobs();
};

int cmd_preprocess(const PreprocessArgs& a) {
  require_directory(a.cases, "--cases");
  CaseDiscovery d = discover_cases(a.cases, "pet", a.cases, "ct");
  if (!d.unpaired.empty()) {
    std::string msg = "incomplete cases:";
    for (const auto& u : d.unpaired) msg += "\n  " + u;
    throw UsageError(msg);
  }
  if (d.cases.empty()) throw UsageError("no cases found");
  if (!(a.lo_pct <= a.hi_pct)) throw UsageError("--lo-pct must not exceed --hi-pct");

  PreprocessOptions options;
  if (a.pet_norm == "dataset") {
    if (a.pet_stats.empty()) throw UsageError("--pet-norm dataset requires --pet-stats");
    if (!fs::exists(a.pet_stats)) throw UsageError("PET stats file '" + a.pet_stats.string() + "' not found");
    options.pet_mode = PetNormalization::Dataset;
    options.pet_stats = DatasetIntensityStats::load(a.pet_stats);
  }

  DatasetIntensityStats stats;
  if (a.compute_stats) {
    std::vector<fs::path> ct_paths;
    for (const auto& c : d.cases) ct_paths.push_back(c.second);
    stats = compute_dataset_stats(ct_paths, a.lo_pct, a.hi_pct, a.stride, "CT");
    stats.save(a.stats);
    log::info("CT stats: clip [" + format_number(stats.clip_lo) + ", " + format_number(stats.clip_hi) +
              "] mean " + format_number(stats.mean) + " std " + format_number(stats.std));
  } else {
    if (!fs::exists(a.stats)) {
      throw UsageError("stats file '" + a.stats.string() +
                       "' not found; rerun with --compute-stats to create it");
    }
    stats = DatasetIntensityStats::load(a.stats);
  }

  parallel_for(d.cases.size(), a.jobs, [&](std::size_t k) {
    const auto& c = d.cases[k];
    const Volume pet = nifti::read_volume(c.first);
    const Volume ct = nifti::read_volume(c.second);
    const PreprocessedCase out = preprocess_case(pet, ct, stats, options);
    const fs::path dir = a.out / c.id;
    fs::create_directories(dir);
    nifti::write_volume(out.pet_norm, dir / "pet_norm.nii.gz", nifti::DataType::Float32);
    nifti::write_volume(out.ct_norm, dir / "ct_norm.nii.gz", nifti::DataType::Float32);
    log::info(c.id + ": preprocessed onto " + pet.grid().describe());
  });
  return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  fs::path mask, out, hist;
  std::string bins = "1,10,100,1000,10000,100000,1000000,10000000";
  int connectivity = 26;
};

int cmd_stats(const StatsArgs& a) {
  const auto edges = parse_number_list(a.bins);
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw UsageError("--bins must be strictly increasing");
  }
  if (edges.size() < 2) throw UsageError("--bins needs at least two edges");
  const Mask mask = nifti::read_mask(a.mask);
  const auto stats = component_stats(label_components(mask, connectivity_from_int(a.connectivity)));

  std::string csv = "id,voxels,volume_ml,cx,cy,cz\n";
  for (const auto& s : stats) {
    csv += std::to_string(s.id) + "," + std::to_string(s.voxels) + "," + format_number(s.volume_ml) +
           "," + format_number(s.centroid_mm[0]) + "," + format_number(s.centroid_mm[1]) + "," +
           format_number(s.centroid_mm[2]) + "\n";
  }
  write_text(a.out, csv);

  fs::path hist_path = a.hist;
  if (hist_path.empty()) {
    hist_path = a.out;
    hist_path.replace_filename(a.out.stem().string() + "_hist" + a.out.extension().string());
  }
  std::string hist = "lo,hi,count\n";
  for (const auto& b : size_histogram(stats, edges)) {
    hist += format_number(b.lo) + "," + format_number(b.hi) + "," + std::to_string(b.count) + "\n";
  }
  write_text(hist_path, hist);

  const auto median = median_component_size(stats);
  log::info(std::to_string(stats.size()) + " components; median size " +
            (median ? format_number(*median) + " voxels" : std::string("n/a")));
  return kExitOk;
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t lesions = 3;
  std::size_t size = 64;
  double spacing = 2.0;
  double radius_min = 3.0;
  double radius_max = 6.0;
  double noise = 0.2;
  std::size_t hot_spots = 0;
  std::size_t cases = 1;
  bool pred = false;
  std::size_t spurious = 3;
  std::size_t spurious_max = 8;
  double boundary_drop = 0.2;
  double miss = 0.0;
};

int cmd_phantom(const PhantomArgs& a) {
  if (a.radius_min > a.radius_max) throw UsageError("--radius-min must not exceed --radius-max");
  const int width = std::max<int>(3, static_cast<int>(std::to_string(a.cases - 1).size()));
  for (std::size_t k = 0; k < a.cases; ++k) {
    PhantomSpec spec;
    spec.dims = {a.size, a.size, a.size};
    spec.spacing = {a.spacing, a.spacing, a.spacing};
    spec.n_lesions = a.lesions;
    spec.lesion_radius_range_mm = {a.radius_min, a.radius_max};
    spec.noise_sigma = a.noise;
    spec.n_hot_spots = a.hot_spots;
    spec.seed = a.seed + k;
    const Phantom ph = generate_phantom(spec);

    char id[32];
    std::snprintf(id, sizeof(id), "case_%0*zu", width, k);
    const fs::path dir = a.out / id;
    fs::create_directories(dir);
    nifti::write_volume(ph.pet, dir / "pet.nii.gz", nifti::DataType::Float32);
    nifti::write_volume(ph.ct, dir / "ct.nii.gz", nifti::DataType::Float32);
    nifti::write_mask(ph.gt, dir / "gt.nii.gz");
    write_text(dir / "lesions.json", lesions_to_json(spec, ph.lesions));
    if (a.pred) {
      CorruptionSpec c;
      c.spurious_blobs = a.spurious;
      c.spurious_max_voxels = a.spurious_max;
      c.boundary_drop = a.boundary_drop;
      c.miss_probability = a.miss;
      c.seed = spec.seed;
      nifti::write_mask(corrupt_prediction(ph.gt, c), dir / "pred.nii.gz");
    }
    log::info(std::string(id) + ": " + std::to_string(ph.gt.foreground_count()) + " lesion voxels");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::vector<fs::path> images;
  fs::path label, out;
  std::vector<std::size_t> patch_size{128};
  double oversample = 0.5;
  std::size_t batch = 2;
  std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& a) {
  if (a.patch_size.size() != 1 && a.patch_size.size() != 3) {
    throw UsageError("--patch-size takes one or three values");
  }
  const Dims3 patch = a.patch_size.size() == 1
                          ? Dims3{a.patch_size[0], a.patch_size[0], a.patch_size[0]}
                          : Dims3{a.patch_size[0], a.patch_size[1], a.patch_size[2]};
  std::vector<Volume> images;
  for (const auto& p : a.images) images.push_back(nifti::read_volume(p));
  const Mask label = nifti::read_mask(a.label);
  PatchBatch batch;
  try {
    batch = sample_batch(images, label, patch, a.batch, a.oversample, a.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(a.out);
  std::vector<std::vector<std::string>> files;
  for (std::size_t k = 0; k < batch.patches.size(); ++k) {
    const Patch& p = batch.patches[k];
    char stem[32];
    std::snprintf(stem, sizeof(stem), "patch_%03zu", k);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < p.channels.size(); ++c) {
      names.push_back(std::string(stem) + "_ch" + std::to_string(c) + ".nii.gz");
      nifti::write_volume(p.channels[c], a.out / names.back(), nifti::DataType::Float32);
    }
    names.push_back(std::string(stem) + "_label.nii.gz");
    nifti::write_mask(p.label, a.out / names.back());
    files.push_back(std::move(names));
  }
  write_text(a.out / "manifest.json", batch_manifest_json(batch, a.oversample, files));
  const auto n_fg = std::count_if(batch.patches.begin(), batch.patches.end(),
                                  [](const Patch& p) { return p.contains_foreground; });
  log::info(std::to_string(batch.patches.size()) + " patches, " + std::to_string(n_fg) +
            " containing foreground");
  return kExitOk;
}

}  // namespace

CaseDiscovery discover_cases(const fs::path& dir_a, const std::string& name_a, const fs::path& dir_b,
                             const std::string& name_b) {
  std::set<std::string> ids = subdirectories(dir_a);
  const auto ids_b = subdirectories(dir_b);
  ids.insert(ids_b.begin(), ids_b.end());
  CaseDiscovery d;
  for (const auto& id : ids) {
    const auto a = find_image(dir_a / id, name_a);
    const auto b = find_image(dir_b / id, name_b);
    if (a && b) {
      d.cases.push_back({id, *a, *b});
    } else if (a || b) {
      d.unpaired.push_back(id + ": missing " + (a ? (dir_b / id / (name_b + ".nii.gz")).string()
                                                  : (dir_a / id / (name_a + ".nii.gz")).string()));
    }
  }
  return d;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"lesionkit: PET/CT lesion segmentation pre/post-processing and evaluation"};
  app.name("lesionkit");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Dice / FP volume / FN volume over a case directory");
  eval_cmd->add_option("--pred", eval.pred, "Directory of <case>/pred.nii.gz")->required();
  eval_cmd->add_option("--gt", eval.gt, "Directory of <case>/gt.nii.gz")->required();
  eval_cmd->add_option("--out", eval.out, "Report JSON path")->required();
  add_connectivity_option(eval_cmd, eval.connectivity);
  add_min_size_options(eval_cmd, eval.min_size, eval.min_size_ml);
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Metrics after min-size filtering at several thresholds");
  sweep_cmd->add_option("--pred", sweep.pred, "Directory of <case>/pred.nii.gz")->required();
  sweep_cmd->add_option("--gt", sweep.gt, "Directory of <case>/gt.nii.gz")->required();
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV path")->required();
  sweep_cmd->add_option("--thresholds", sweep.thresholds, "Comma-separated voxel thresholds")
      ->capture_default_str();
  add_connectivity_option(sweep_cmd, sweep.connectivity);
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->check(CLI::PositiveNumber);

  PostprocArgs post;
  auto* post_cmd = app.add_subcommand("postproc", "Remove small connected components from a mask");
  post_cmd->add_option("--in", post.in, "Input mask")->required();
  post_cmd->add_option("--out", post.out, "Output mask")->required();
  add_min_size_options(post_cmd, post.min_size, post.min_size_ml);
  add_connectivity_option(post_cmd, post.connectivity);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Resample CT to PET and normalize both channels");
  pre_cmd->add_option("--cases", pre.cases, "Directory of <case>/{pet,ct}.nii.gz")->required();
  pre_cmd->add_option("--stats", pre.stats, "CT intensity stats JSON (read, or written with --compute-stats)")
      ->required();
  pre_cmd->add_option("--out", pre.out, "Output directory")->required();
  pre_cmd->add_flag("--compute-stats", pre.compute_stats, "Compute CT stats over all cases first");
  pre_cmd->add_option("--lo-pct", pre.lo_pct, "Lower clip percentile")->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  pre_cmd->add_option("--hi-pct", pre.hi_pct, "Upper clip percentile")->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  pre_cmd->add_option("--stride", pre.stride, "Use every k-th voxel for stats")->check(CLI::PositiveNumber)
      ->capture_default_str();
  pre_cmd->add_option("--pet-norm", pre.pet_norm, "PET Z-score statistics")
      ->check(CLI::IsMember({"per-volume", "dataset"}))
      ->capture_default_str();
  pre_cmd->add_option("--pet-stats", pre.pet_stats, "PET stats JSON for --pet-norm dataset");
  pre_cmd->add_option("--jobs", pre.jobs, "Worker threads")->check(CLI::PositiveNumber);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Connected-component statistics and size histogram");
  stats_cmd->add_option("--mask", stats.mask, "Input mask")->required();
  stats_cmd->add_option("--out", stats.out, "Component CSV path")->required();
  stats_cmd->add_option("--hist", stats.hist, "Histogram CSV path (default: <out>_hist.csv)");
  stats_cmd->add_option("--bins", stats.bins, "Comma-separated bin edges in voxels")->capture_default_str();
  add_connectivity_option(stats_cmd, stats.connectivity);

  PhantomArgs ph;
  auto* ph_cmd = app.add_subcommand("phantom", "Write synthetic PET/CT/ground-truth cases");
  ph_cmd->add_option("--out", ph.out, "Output directory")->required();
  ph_cmd->add_option("--seed", ph.seed, "Base seed (case k uses seed + k)")->capture_default_str();
  ph_cmd->add_option("--lesions", ph.lesions, "Lesions per case")->capture_default_str();
  ph_cmd->add_option("--size", ph.size, "Cube edge length in voxels")->check(CLI::Range(1, 32767))
      ->capture_default_str();
  ph_cmd->add_option("--spacing", ph.spacing, "Isotropic spacing in mm")->check(CLI::PositiveNumber)
      ->capture_default_str();
  ph_cmd->add_option("--radius-min", ph.radius_min, "Minimum lesion radius (mm)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ph_cmd->add_option("--radius-max", ph.radius_max, "Maximum lesion radius (mm)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ph_cmd->add_option("--noise", ph.noise, "PET noise sigma")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ph_cmd->add_option("--hot-spots", ph.hot_spots, "Bright non-lesion PET blobs")->capture_default_str();
  ph_cmd->add_option("--cases", ph.cases, "Number of cases")->check(CLI::PositiveNumber)
      ->capture_default_str();
  ph_cmd->add_flag("--pred", ph.pred, "Also write a corrupted prediction pred.nii.gz");
  ph_cmd->add_option("--spurious", ph.spurious, "False-positive blobs per prediction")->capture_default_str();
  ph_cmd->add_option("--spurious-max", ph.spurious_max, "Maximum blob size (voxels)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ph_cmd->add_option("--boundary-drop", ph.boundary_drop, "Probability of dropping lesion surface voxels")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ph_cmd->add_option("--miss", ph.miss, "Probability of missing a whole lesion")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a foreground-oversampled patch batch");
  sample_cmd->add_option("--image", sample.images, "Image channel (repeatable)")->required();
  sample_cmd->add_option("--label", sample.label, "Label mask")->required();
  sample_cmd->add_option("--out", sample.out, "Output directory")->required();
  sample_cmd->add_option("--patch-size", sample.patch_size, "Patch edge (one value) or three values")
      ->expected(1, 3)
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--oversample", sample.oversample, "Fraction of foreground-forced patches")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sample_cmd->add_option("--batch", sample.batch, "Patches per batch")->check(CLI::PositiveNumber)
      ->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "Random seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*eval_cmd) return cmd_eval(eval);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*post_cmd) return cmd_postproc(post);
    if (*pre_cmd) return cmd_preprocess(pre);
    if (*stats_cmd) return cmd_stats(stats);
    if (*ph_cmd) return cmd_phantom(ph);
    if (*sample_cmd) return cmd_sample(sample);
  } catch (const UsageError& e) {
    log::warn(std::string("error: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log::warn(std::string("error: ") + e.what());
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace lesionkit::cli
