// numpy arrays cross the boundary with shape (nx, ny, nz) in Fortran order, which
// matches the x-fastest layout used by Volume and Mask.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>

#include "lesionkit/ccl.hpp"
#include "lesionkit/cli.hpp"
#include "lesionkit/losses.hpp"
#include "lesionkit/metrics.hpp"
#include "lesionkit/nifti_io.hpp"
#include "lesionkit/phantom.hpp"
#include "lesionkit/postproc.hpp"
#include "lesionkit/preproc.hpp"

namespace py = pybind11;
using namespace lesionkit;

namespace {

template <typename T>
using FArray = py::array_t<T, py::array::f_style | py::array::forcecast>;

Dims3 dims_of(const py::array& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected a 3-D array, got " + std::to_string(a.ndim()) + "-D");
  return {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
          static_cast<std::size_t>(a.shape(2))};
}

template <typename T>
FArray<T> to_array(const Dims3& d, const T* data) {
  FArray<T> out({d[0], d[1], d[2]});
  std::memcpy(out.mutable_data(), data, d[0] * d[1] * d[2] * sizeof(T));
  return out;
}

Volume to_volume(const FArray<float>& a, const Vec3& spacing, const Vec3& origin) {
  const Grid3 g(dims_of(a), spacing, origin);
  return Volume(g, std::vector<float>(a.data(), a.data() + a.size()));
}

// Any nonzero entry is foreground.
Mask to_mask(const py::array& in, const Vec3& spacing, const Vec3& origin) {
  const auto a = FArray<std::uint8_t>::ensure(in.attr("astype")("bool"));
  if (!a) throw std::invalid_argument("mask must be convertible to a boolean array");
  const Grid3 g(dims_of(a), spacing, origin);
  return Mask(g, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

FArray<float> volume_array(const Volume& v) { return to_array(v.grid().dims(), v.values().data()); }

py::array mask_array(const Mask& m) {
  return to_array(m.grid().dims(), m.bits().data()).attr("astype")("bool");
}

py::dict grid_dict(const Grid3& g) {
  py::dict d;
  d["spacing"] = g.spacing();
  d["origin"] = g.origin();
  return d;
}

py::dict metrics_dict(const CaseMetrics& m) {
  py::dict d;
  d["case_id"] = m.case_id;
  d["dice"] = m.dice;
  d["fp_volume_ml"] = m.fp_volume_ml;
  d["fn_volume_ml"] = m.fn_volume_ml;
  d["gt_foreground_ml"] = m.gt_foreground_ml;
  d["pred_foreground_ml"] = m.pred_foreground_ml;
  return d;
}

ProbField to_probs(const FArray<double>& p, const Vec3& spacing) {
  return ProbField(Grid3(dims_of(p), spacing), std::vector<double>(p.data(), p.data() + p.size()));
}

constexpr Vec3 kUnit{1.0, 1.0, 1.0};
constexpr Vec3 kZero{0.0, 0.0, 0.0};

}  // namespace

PYBIND11_MODULE(_lesionkit, m) {
  m.doc() = "Lesion segmentation evaluation and post-processing on 3-D PET/CT volumes";

  py::register_exception<GeometryMismatch>(m, "GeometryMismatch", PyExc_ValueError);
  py::register_exception<nifti::NiftiError>(m, "NiftiError", PyExc_OSError);

  m.def(
      "read_volume",
      [](const std::filesystem::path& path) {
        const Volume v = nifti::read_volume(path);
        return py::make_tuple(volume_array(v), grid_dict(v.grid()));
      },
      py::arg("path"), "Read a NIfTI-1 image. Returns (float32 array, {'spacing', 'origin'}).");
  m.def(
      "read_mask",
      [](const std::filesystem::path& path) {
        const Mask mk = nifti::read_mask(path);
        return py::make_tuple(mask_array(mk), grid_dict(mk.grid()));
      },
      py::arg("path"));
  m.def(
      "write_volume",
      [](const std::filesystem::path& path, const FArray<float>& a, const Vec3& spacing, const Vec3& origin,
         bool gzip) {
        nifti::write_volume(to_volume(a, spacing, origin), path, nifti::WriteOptions{gzip, nifti::DataType::Float32});
      },
      py::arg("path"), py::arg("array"), py::arg("spacing") = kUnit, py::arg("origin") = kZero,
      py::arg("gzip") = true);
  m.def(
      "write_mask",
      [](const std::filesystem::path& path, const py::array& a, const Vec3& spacing, const Vec3& origin, bool gzip) {
        nifti::write_mask(to_mask(a, spacing, origin), path, gzip);
      },
      py::arg("path"), py::arg("mask"), py::arg("spacing") = kUnit, py::arg("origin") = kZero,
      py::arg("gzip") = true);

  m.def(
      "label_components",
      [](const py::array& mask, int connectivity) {
        const LabelMap lm = label_components(to_mask(mask, kUnit, kZero), connectivity_from_int(connectivity));
        return py::make_tuple(to_array(lm.grid().dims(), lm.labels().data()), lm.count());
      },
      py::arg("mask"), py::arg("connectivity") = 26,
      "Label connected components. Returns (uint32 labels, count); ids follow first raster appearance.");

  m.def(
      "dice_score",
      [](const py::array& pred, const py::array& gt) {
        return dice_score(to_mask(pred, kUnit, kZero), to_mask(gt, kUnit, kZero));
      },
      py::arg("pred"), py::arg("gt"), "Dice coefficient, or None when the ground truth is empty.");
  m.def(
      "evaluate_case",
      [](const py::array& pred, const py::array& gt, const Vec3& spacing, int connectivity, std::string case_id) {
        return metrics_dict(evaluate_case(std::move(case_id), to_mask(pred, spacing, kZero),
                                          to_mask(gt, spacing, kZero), connectivity_from_int(connectivity)));
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = kUnit, py::arg("connectivity") = 26,
      py::arg("case_id") = "case");

  m.def(
      "filter_min_size",
      [](const py::array& mask, std::uint64_t min_voxels, int connectivity) {
        return mask_array(filter_min_size(to_mask(mask, kUnit, kZero), min_voxels, connectivity_from_int(connectivity)));
      },
      py::arg("mask"), py::arg("min_voxels"), py::arg("connectivity") = 26);
  m.def(
      "min_voxels_for_volume",
      [](double min_ml, const Vec3& spacing) { return min_voxels_for_volume(min_ml, Grid3({1, 1, 1}, spacing)); },
      py::arg("min_ml"), py::arg("spacing"));

  m.def(
      "resample",
      [](const FArray<float>& a, const Vec3& spacing, const Vec3& origin, const Dims3& target_dims,
         const Vec3& target_spacing, const Vec3& target_origin, bool nearest) {
        const Volume out = resample_to_grid(to_volume(a, spacing, origin), Grid3(target_dims, target_spacing, target_origin),
                                            nearest ? Interpolation::Nearest : Interpolation::Trilinear);
        return volume_array(out);
      },
      py::arg("array"), py::arg("spacing"), py::arg("origin"), py::arg("target_dims"), py::arg("target_spacing"),
      py::arg("target_origin"), py::arg("nearest") = false);
  m.def(
      "percentile",
      [](const FArray<double>& values, double p) { return percentile(std::span(values.data(), values.size()), p); },
      py::arg("values"), py::arg("p"));

  m.def(
      "generate_phantom",
      [](const Dims3& dims, const Vec3& spacing, std::size_t n_lesions, std::pair<double, double> radius_mm,
         double noise_sigma, std::size_t n_hot_spots, std::uint64_t seed) {
        PhantomSpec spec;
        spec.dims = dims;
        spec.spacing = spacing;
        spec.n_lesions = n_lesions;
        spec.lesion_radius_range_mm = radius_mm;
        spec.noise_sigma = noise_sigma;
        spec.n_hot_spots = n_hot_spots;
        spec.seed = seed;
        const Phantom ph = generate_phantom(spec);
        py::dict d;
        d["pet"] = volume_array(ph.pet);
        d["ct"] = volume_array(ph.ct);
        d["gt"] = mask_array(ph.gt);
        d["lesions_json"] = lesions_to_json(spec, ph.lesions);
        return d;
      },
      py::arg("dims") = Dims3{64, 64, 64}, py::arg("spacing") = Vec3{2.0, 2.0, 2.0}, py::arg("n_lesions") = 3,
      py::arg("radius_mm") = std::pair<double, double>{3.0, 6.0}, py::arg("noise_sigma") = 0.2,
      py::arg("n_hot_spots") = 0, py::arg("seed") = 0);

  m.def(
      "soft_dice_loss",
      [](const FArray<double>& p, const py::array& g) { return soft_dice_loss(to_probs(p, kUnit), to_mask(g, kUnit, kZero)); },
      py::arg("probs"), py::arg("target"));
  m.def(
      "soft_dice_grad",
      [](const FArray<double>& p, const py::array& g) {
        const ProbField f = to_probs(p, kUnit);
        const auto grad = soft_dice_grad(f, to_mask(g, kUnit, kZero));
        return to_array(f.grid().dims(), grad.data());
      },
      py::arg("probs"), py::arg("target"));
  m.def(
      "cross_entropy_loss",
      [](const FArray<double>& p, const py::array& g) {
        return cross_entropy_loss(to_probs(p, kUnit), to_mask(g, kUnit, kZero));
      },
      py::arg("probs"), py::arg("target"));
  m.def("poly_lr", &poly_lr, py::arg("epoch"), py::arg("max_epochs"), py::arg("lr0"),
        py::arg("exponent") = kDefaultPolyExponent);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return cli::run(args);
      },
      py::arg("args"), "Run a command-line subcommand in-process and return its exit code.");
}
