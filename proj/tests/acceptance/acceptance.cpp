// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include "lesionkit/ccl.hpp"
#include "lesionkit/cli.hpp"
#include "lesionkit/log.hpp"
#include "lesionkit/losses.hpp"
#include "lesionkit/metrics.hpp"
#include "lesionkit/nifti_io.hpp"
#include "lesionkit/phantom.hpp"
#include "lesionkit/postproc.hpp"
#include "lesionkit/preproc.hpp"
#include "lesionkit/sampler.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lesionkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int quiet_cli(const std::vector<std::string>& args) {
  log::ScopedCapture capture;
  return cli::run(args);
}

// Writes `cases` phantom cases with corrupted predictions in the eval layout.
void write_eval_set(const fs::path& root, int cases, std::size_t size) {
  if (quiet_cli({"phantom", "--out", (root / "cases").string(), "--cases", std::to_string(cases), "--size",
                 std::to_string(size), "--seed", "1000", "--pred", "--lesions", "4"}) != 0) {
    throw std::runtime_error("phantom generation failed");
  }
  for (const auto& entry : fs::directory_iterator(root / "cases")) {
    const auto id = entry.path().filename();
    fs::create_directories(root / "pred" / id);
    fs::create_directories(root / "gt" / id);
    fs::rename(entry.path() / "pred.nii.gz", root / "pred" / id / "pred.nii.gz");
    fs::rename(entry.path() / "gt.nii.gz", root / "gt" / id / "gt.nii.gz");
  }
  fs::remove_all(root / "cases");
}

// 1
Outcome ccl_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> side(1, 32);
  const double densities[] = {0.05, 0.3, 0.7};
  const int conns[] = {6, 18, 26};
  int mismatches = 0;
  for (int k = 0; k < 300; ++k) {
    const Grid3 g({side(rng), side(rng), side(rng)}, {1, 1, 1});
    const Mask m = oracle::random_mask(g, densities[k % 3], rng);
    const int conn = conns[(k / 3) % 3];
    std::uint32_t n = 0;
    const auto expected = oracle::flood_fill_labels(m, conn, &n);
    const LabelMap got = label_components(m, connectivity_from_int(conn));
    if (got.count() != n || !oracle::same_partition(got.labels(), expected) || !got.consistent()) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 60.0, fmt("300 masks, %d mismatches, %.2f s (limit 60 s)", mismatches, t)};
}

// 2
Outcome metrics_oracle() {
  std::mt19937_64 rng(2);
  const Grid3 g({16, 16, 16}, {1.5, 2.0, 2.5});
  const double unit = voxel_volume_ml(g);
  double worst_dice = 0.0;
  int volume_mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const Mask pred = oracle::random_mask(g, 0.02 + 0.003 * k, rng);
    const Mask gt = oracle::random_mask(g, 0.01 + 0.002 * k, rng);
    const auto naive = oracle::naive_metrics(pred, gt, 26);
    const auto m = evaluate_case("c", pred, gt);
    if (m.dice.has_value() != naive.has_dice) return {false, fmt("dice presence differs at pair %d", k)};
    if (m.dice) worst_dice = std::max(worst_dice, std::abs(*m.dice - naive.dice));
    const LabelMap pl = label_components(pred);
    const LabelMap gl = label_components(gt);
    if (unmatched_component_voxels(pl, gt) != naive.fp_voxels) ++volume_mismatches;
    if (unmatched_component_voxels(gl, pred) != naive.fn_voxels) ++volume_mismatches;
    if (m.fp_volume_ml != static_cast<double>(naive.fp_voxels) * unit) ++volume_mismatches;
    if (m.fn_volume_ml != static_cast<double>(naive.fn_voxels) * unit) ++volume_mismatches;
  }
  return {worst_dice <= 1e-12 && volume_mismatches == 0,
          fmt("100 pairs, max |dice - oracle| = %.3g (limit 1e-12), %d volume mismatches", worst_dice,
              volume_mismatches)};
}

// 3
Outcome table3_mechanism() {
  const auto t0 = Clock::now();
  std::vector<Mask> preds, gts;
  std::vector<std::string> ids;
  std::uint64_t smallest_lesion = ~0ULL;
  for (int k = 0; k < 20; ++k) {
    PhantomSpec spec;
    spec.dims = {64, 64, 64};
    spec.n_lesions = 4;
    spec.lesion_radius_range_mm = {5.5, 9.0};
    spec.seed = 300 + k;
    const Phantom ph = generate_phantom(spec);
    for (const auto& l : ph.lesions) smallest_lesion = std::min(smallest_lesion, l.voxels);
    CorruptionSpec c;
    c.spurious_blobs = 4;
    c.spurious_max_voxels = 8;
    c.boundary_drop = 0.2;
    c.miss_probability = 0.1;
    c.seed = 300 + k;
    preds.push_back(corrupt_prediction(ph.gt, c));
    gts.push_back(ph.gt);
    ids.push_back(fmt("case_%03d", k));
  }
  if (smallest_lesion < 50) return {false, fmt("fixture invalid: lesion with %llu voxels", (unsigned long long)smallest_lesion)};
  const std::vector<std::uint64_t> thresholds(std::begin(kDefaultSweepThresholds), std::end(kDefaultSweepThresholds));
  const auto rows = threshold_sweep(preds, gts, thresholds, kDefaultConnectivity, 4, ids);
  bool fp_monotone = true, fn_monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    fp_monotone &= rows[i].mean_fp_volume_ml <= rows[i - 1].mean_fp_volume_ml;
    fn_monotone &= rows[i].mean_fn_volume_ml >= rows[i - 1].mean_fn_volume_ml;
  }
  const bool drop = rows[2].mean_fp_volume_ml < rows[0].mean_fp_volume_ml;
  std::ostringstream table;
  for (const auto& r : rows) {
    table << fmt(" %llu:(%.3f,%.4f,%.4f)", (unsigned long long)r.threshold_voxels, r.mean_dice.value_or(-1),
                 r.mean_fp_volume_ml, r.mean_fn_volume_ml);
  }
  const double t = seconds_since(t0);
  return {fp_monotone && fn_monotone && drop && t < 120.0,
          fmt("fp non-increasing=%d fn non-decreasing=%d fp@10<fp@0=%d, %.2f s (limit 120 s); rows (dice,fp,fn):",
              fp_monotone, fn_monotone, drop, t) +
              table.str()};
}

// 4
Outcome dice_gradient() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid3 g({4, 4, 4}, {1, 1, 1});
  const double h = 1e-4;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> p(64);
    for (auto& x : p) x = h + (1.0 - 2 * h) * u(rng);
    const Mask m = oracle::random_mask(g, 0.1 + 0.015 * k, rng);
    const auto grad = soft_dice_grad(ProbField(g, p), m);
    for (std::size_t i = 0; i < 64; ++i) {
      auto plus = p, minus = p;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (soft_dice_loss(ProbField(g, plus), m) - soft_dice_loss(ProbField(g, minus), m)) / (2 * h);
      worst = std::max(worst, std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-300));
    }
  }
  return {worst < 1e-4, fmt("50 instances, max relative error %.3g (limit 1e-4)", worst)};
}

// 5
Outcome poly_schedule() {
  const double mid = poly_lr(750, 1500, 0.01, 0.9);
  const double start = poly_lr(0, 1500, 0.01, 0.9);
  const double end = poly_lr(1500, 1500, 0.01, 0.9);
  const bool ok = std::abs(mid - 0.0053589) <= 1e-6 && start == 0.01 && end == 0.0;
  return {ok, fmt("poly_lr(750,1500,0.01,0.9) = %.9f (target 0.0053589 +/- 1e-6), start %.17g, end %.17g", mid,
                  start, end)};
}

// 6
Outcome resampling_exactness() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> slope(-5.0, 5.0), sp(0.6, 3.0), org(-20.0, 20.0);
  std::uniform_int_distribution<std::size_t> dim(6, 20);
  double worst = 0.0;
  std::size_t interior_points = 0;
  bool identity_ok = true;
  for (int k = 0; k < 10; ++k) {
    const double c0 = 2000.0, cx = slope(rng), cy = slope(rng), cz = slope(rng);
    const Grid3 src({dim(rng), dim(rng), dim(rng)}, {sp(rng), sp(rng), sp(rng)}, {org(rng), org(rng), org(rng)});
    std::vector<float> v(src.voxel_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto [x, y, z] = src.delinearize(i);
      const Vec3 w = src.to_world({double(x), double(y), double(z)});
      v[i] = static_cast<float>(c0 + cx * w[0] + cy * w[1] + cz * w[2]);
    }
    const Volume f(src, v);
    // target starts inside the source extent so most of its samples are interior
    std::uniform_real_distribution<double> frac(0.0, 0.4);
    Vec3 dst_origin{};
    for (int a = 0; a < 3; ++a) {
      dst_origin[a] = src.origin()[a] + frac(rng) * double(src.dims()[a] - 1) * src.spacing()[a];
    }
    const Grid3 dst({dim(rng), dim(rng), dim(rng)}, {sp(rng), sp(rng), sp(rng)}, dst_origin);
    const Volume out = resample_to_grid(f, dst);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto [x, y, z] = dst.delinearize(i);
      const Vec3 w = dst.to_world({double(x), double(y), double(z)});
      const Vec3 s = src.to_index(w);
      bool interior = true;
      for (int a = 0; a < 3; ++a) interior &= s[a] >= 0.0 && s[a] <= double(src.dims()[a] - 1);
      if (!interior) continue;
      ++interior_points;
      const double expected = c0 + cx * w[0] + cy * w[1] + cz * w[2];
      worst = std::max(worst, std::abs(out.values()[i] - expected) / std::abs(expected));
    }
    const Volume same = resample_to_grid(f, src);
    identity_ok &= std::memcmp(same.values().data(), v.data(), v.size() * sizeof(float)) == 0;
  }
  return {worst <= 1e-5 && identity_ok && interior_points >= 1000,
          fmt("10 affine fields, %zu interior points, max relative error %.3g (limit 1e-5), identity bit-identical=%d",
              interior_points, worst, identity_ok)};
}

// 7
Outcome sampler_guarantee() {
  PhantomSpec spec;
  spec.n_lesions = 1;
  spec.seed = 7;
  const Phantom ph = generate_phantom(spec);
  const std::vector<Volume> images{ph.pet};
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const PatchBatch b = sample_batch(images, ph.gt, {32, 32, 32}, 2, 0.5, seed);
    bool any = false;
    for (const auto& p : b.patches) any |= p.label.foreground_count() > 0;
    failures += any ? 0 : 1;
  }
  return {failures == 0, fmt("1000 batches (batch 2, fraction 0.5, 32^3 patches), %d without foreground", failures)};
}

// 8
Outcome nifti_round_trip() {
  oracle::TempDir dir("acc_nifti");
  std::mt19937_64 rng(8);
  const Grid3 g({9, 8, 7}, {0.9765625, 0.9765625, 3.27}, {-250.5, -180.25, 42.0});
  int failures = 0;
  struct Case {
    nifti::DataType type;
    long lo, hi;
  };
  for (const Case c : {Case{nifti::DataType::UInt8, 0, 255}, Case{nifti::DataType::Int16, -32768, 32767},
                       Case{nifti::DataType::Int32, -16777216, 16777216}, Case{nifti::DataType::Float32, 0, 0},
                       Case{nifti::DataType::Float64, 0, 0}}) {
    std::vector<float> v(g.voxel_count());
    if (c.hi > c.lo) {
      std::uniform_int_distribution<long> d(c.lo, c.hi);
      for (auto& x : v) x = static_cast<float>(d(rng));
    } else {
      std::normal_distribution<float> d(0.0f, 1e4f);
      for (auto& x : v) x = d(rng);
    }
    const Volume vol(g, v);
    for (const char* ext : {".nii", ".nii.gz"}) {
      const auto path = dir / (nifti::to_string(c.type) + ext);
      nifti::write_volume(vol, path, nifti::WriteOptions{std::string(ext) == ".nii.gz", c.type});
      const Volume back = nifti::read_volume(path);
      // pixdim and qoffset are float32 fields, so 3.27 comes back as float(3.27)
      Vec3 sp{}, org{};
      for (int a = 0; a < 3; ++a) {
        // volatile keeps GCC 11 at -O3 from folding (double)(float)x back to x
        volatile float fs = static_cast<float>(g.spacing()[a]);
        volatile float fo = static_cast<float>(g.origin()[a]);
        sp[a] = fs;
        org[a] = fo;
      }
      const auto again = dir / (std::string("again_") + nifti::to_string(c.type) + ext);
      nifti::write_volume(back, again, nifti::WriteOptions{std::string(ext) == ".nii.gz", c.type});
      const Volume back2 = nifti::read_volume(again);
      if (!(back.grid() == Grid3(g.dims(), sp, org)) || !(back2.grid() == back.grid()) ||
          std::memcmp(back.values().data(), v.data(), v.size() * sizeof(float)) != 0 ||
          back2.values() != back.values()) {
        ++failures;
      }
    }
  }
  const Volume fixture = nifti::read_volume(fs::path(LESIONKIT_FIXTURE_DIR) / "ramp_f32.nii.gz");
  bool fixture_ok = fixture.grid().dims() == Dims3{4, 4, 4} && fixture.grid().spacing() == Vec3{1, 2, 3};
  for (std::size_t i = 0; i < 64; ++i) fixture_ok &= fixture.values()[i] == static_cast<float>(i);
  return {failures == 0 && fixture_ok,
          fmt("5 dtypes x {plain, gzip}: %d mismatches; nibabel-written ramp fixture read correctly=%d", failures,
              fixture_ok)};
}

// 9 and the second half of 10 share one 50-case 128^3 set
struct EvalRuns {
  bool identical = false;
  double jobs4_seconds = 0.0;
  std::string detail;
};

EvalRuns eval_runs() {
  oracle::TempDir dir("acc_eval");
  write_eval_set(dir.path(), 50, 128);
  EvalRuns r;
  std::string reference;
  r.identical = true;
  for (int jobs : {1, 4, 8}) {
    const auto out = dir / fmt("report_%d.json", jobs);
    const auto t0 = Clock::now();
    const int rc = quiet_cli({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out",
                              out.string(), "--jobs", std::to_string(jobs)});
    const double t = seconds_since(t0);
    if (jobs == 4) r.jobs4_seconds = t;
    if (rc != 0) {
      r.identical = false;
      r.detail = fmt("eval exited %d at jobs=%d", rc, jobs);
      return r;
    }
    const std::string text = oracle::read_file(out);
    if (reference.empty()) reference = text;
    r.identical &= text == reference;
  }
  return r;
}

Outcome ccl_performance() {
  const Grid3 g({256, 256, 256}, {1, 1, 1});
  std::mt19937_64 rng(10);
  std::vector<std::uint8_t> bits(g.voxel_count());
  for (std::size_t i = 0; i < bits.size(); i += 64) {
    std::uint64_t word = rng();
    for (std::size_t b = 0; b < 64 && i + b < bits.size(); ++b) bits[i + b] = (word >> b) & 1U;
  }
  const Mask m(g, std::move(bits));
  const auto t0 = Clock::now();
  const LabelMap l = label_components(m);
  const double t = seconds_since(t0);
  return {t < 5.0, fmt("%zu components, %.2f s (limit 5 s)", l.count(), t)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };

  report(1, "connected components match flood fill", ccl_oracle);
  report(2, "metrics match naive reimplementation", metrics_oracle);
  report(3, "min-size sweep reduces false positives on phantoms", table3_mechanism);
  report(4, "soft dice gradient matches finite differences", dice_gradient);
  report(5, "poly learning-rate schedule", poly_schedule);
  report(6, "trilinear resampling exactness", resampling_exactness);
  report(7, "foreground oversampling guarantee", sampler_guarantee);
  report(8, "NIfTI round trip and external fixture", nifti_round_trip);

  EvalRuns runs;
  std::string eval_error;
  try {
    runs = eval_runs();
  } catch (const std::exception& e) {
    eval_error = std::string("exception: ") + e.what();
  }
  report(9, "eval output independent of job count", [&] {
    if (!eval_error.empty()) return Outcome{false, eval_error};
    if (!runs.detail.empty()) return Outcome{false, runs.detail};
    return Outcome{runs.identical, fmt("50 cases at 128^3, reports for jobs 1/4/8 byte-identical=%d", runs.identical)};
  });
  report(10, "performance floor", [&] {
    const Outcome ccl = ccl_performance();
    if (!eval_error.empty() || !runs.detail.empty()) return Outcome{false, ccl.detail + "; eval failed"};
    const bool eval_ok = runs.jobs4_seconds < 60.0;
    return Outcome{ccl.pass && eval_ok,
                   "256^3 at 50% density: " + ccl.detail +
                       fmt("; eval of 50 cases at 128^3, jobs=4: %.2f s (limit 60 s)", runs.jobs4_seconds)};
  });

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
