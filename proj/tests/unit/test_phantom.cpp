#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include <nlohmann/json.hpp>

#include "lesionkit/ccl.hpp"
#include "lesionkit/phantom.hpp"
#include "oracles.hpp"

using namespace lesionkit;

TEST_CASE("no lesions gives an empty ground truth") {
  PhantomSpec spec;
  spec.dims = {16, 16, 16};
  spec.n_lesions = 0;
  const Phantom ph = generate_phantom(spec);
  CHECK(ph.gt.empty());
  CHECK(ph.lesions.empty());
  double mean = 0.0;
  for (float v : ph.pet.values()) mean += v;
  CHECK(mean / ph.pet.size() == doctest::Approx(spec.pet_background_level).epsilon(0.02));
}

TEST_CASE("generation is deterministic per seed") {
  PhantomSpec spec;
  spec.dims = {32, 32, 32};
  spec.seed = 42;
  const Phantom a = generate_phantom(spec);
  const Phantom b = generate_phantom(spec);
  CHECK(std::memcmp(a.pet.values().data(), b.pet.values().data(), a.pet.size() * 4) == 0);
  CHECK(std::memcmp(a.ct.values().data(), b.ct.values().data(), a.ct.size() * 4) == 0);
  CHECK(a.gt == b.gt);
  spec.seed = 43;
  CHECK_FALSE(generate_phantom(spec).gt == a.gt);
}

TEST_CASE("lesion records agree with the ground truth") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    PhantomSpec spec;
    spec.seed = seed;
    spec.n_hot_spots = seed % 3;
    const Phantom ph = generate_phantom(spec);
    std::uint32_t count = 0;
    (void)oracle::flood_fill_labels(ph.gt, 26, &count);
    CHECK(count == spec.n_lesions);
    CHECK(label_components(ph.gt).count() == spec.n_lesions);

    std::uint64_t total = 0;
    const double voxel_mm3 = ph.gt.grid().voxel_volume_mm3();
    std::size_t n_lesion_records = 0;
    for (const auto& l : ph.lesions) {
      const Index3 c = l.center_voxel;
      if (!l.in_ground_truth) {
        CHECK_FALSE(ph.gt.at(c[0], c[1], c[2]));
        continue;
      }
      ++n_lesion_records;
      total += l.voxels;
      CHECK(ph.gt.at(c[0], c[1], c[2]));
      const double analytic = 4.0 / 3.0 * std::numbers::pi * l.radius_mm[0] * l.radius_mm[1] * l.radius_mm[2] / voxel_mm3;
      CHECK(std::abs(static_cast<double>(l.voxels) - analytic) <= 0.2 * analytic);
      for (int a = 0; a < 3; ++a) {
        CHECK(l.radius_mm[a] >= 3.0);
        CHECK(l.radius_mm[a] <= 6.0);
      }
    }
    CHECK(n_lesion_records == spec.n_lesions);
    CHECK(ph.lesions.size() == spec.n_lesions + spec.n_hot_spots);
    CHECK(total == ph.gt.foreground_count());
  }
}

TEST_CASE("lesions are brighter than background in PET") {
  PhantomSpec spec;
  spec.noise_sigma = 0.0;
  const Phantom ph = generate_phantom(spec);
  for (std::size_t i = 0; i < ph.gt.size(); ++i) {
    if (ph.gt.bits()[i]) CHECK(ph.pet.values()[i] == doctest::Approx(spec.pet_background_level + spec.pet_lesion_uptake));
  }
  CHECK(ph.ct.grid() == ph.pet.grid());
}

TEST_CASE("impossible placement names the constraint") {
  PhantomSpec spec;
  spec.dims = {8, 8, 8};
  spec.n_lesions = 50;
  try {
    (void)generate_phantom(spec);
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("place") != std::string::npos);
  }
  spec.n_lesions = 1;
  spec.lesion_radius_range_mm = {40.0, 40.0};
  CHECK_THROWS_AS(generate_phantom(spec), std::runtime_error);
  spec.lesion_radius_range_mm = {5.0, 3.0};
  CHECK_THROWS_AS(generate_phantom(spec), std::invalid_argument);
}

TEST_CASE("lesions JSON mirrors the records") {
  PhantomSpec spec;
  spec.n_hot_spots = 1;
  const Phantom ph = generate_phantom(spec);
  const auto j = nlohmann::json::parse(lesions_to_json(spec, ph.lesions));
  REQUIRE(j["lesions"].size() == ph.lesions.size());
  CHECK(j["lesions"][0]["voxels"] == ph.lesions[0].voxels);
  CHECK(j["lesions"][3]["in_ground_truth"] == false);
}

TEST_CASE("corruption adds isolated spurious blobs") {
  PhantomSpec spec;
  spec.seed = 5;
  const Phantom ph = generate_phantom(spec);
  CorruptionSpec c;
  c.spurious_blobs = 4;
  c.spurious_max_voxels = 8;
  c.boundary_drop = 0.0;
  c.seed = 9;
  const Mask pred = corrupt_prediction(ph.gt, c);
  const auto labels = label_components(pred);
  CHECK(labels.count() == spec.n_lesions + 4);
  std::size_t spurious = 0;
  for (const auto& s : component_stats(labels)) {
    const auto& b = s.bbox_min;
    const bool on_gt = ph.gt.at(b[0], b[1], b[2]) ||
                       [&] {
                         for (std::size_t i = 0; i < labels.labels().size(); ++i)
                           if (labels.labels()[i] == s.id && ph.gt.bits()[i]) return true;
                         return false;
                       }();
    if (!on_gt) {
      ++spurious;
      CHECK(s.voxels >= 1);
      CHECK(s.voxels <= 8);
    }
  }
  CHECK(spurious == 4);
  CHECK(corrupt_prediction(ph.gt, c) == pred);
}

TEST_CASE("boundary drop and misses only remove lesion voxels") {
  PhantomSpec spec;
  spec.seed = 6;
  const Phantom ph = generate_phantom(spec);
  CorruptionSpec c;
  c.spurious_blobs = 0;
  c.boundary_drop = 0.5;
  const Mask pred = corrupt_prediction(ph.gt, c);
  CHECK(pred.foreground_count() < ph.gt.foreground_count());
  for (std::size_t i = 0; i < pred.size(); ++i) CHECK(pred.bits()[i] <= ph.gt.bits()[i]);
  for (const auto& l : ph.lesions) CHECK(pred.at(l.center_voxel[0], l.center_voxel[1], l.center_voxel[2]));

  c.boundary_drop = 0.0;
  c.miss_probability = 1.0;
  CHECK(corrupt_prediction(ph.gt, c).empty());
}
