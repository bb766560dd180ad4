#include <doctest.h>

#include <cmath>
#include <limits>

#include "lesionkit/core.hpp"
#include "oracles.hpp"

using namespace lesionkit;

TEST_CASE("grid rejects degenerate geometry") {
  CHECK_THROWS_AS(Grid3({0, 4, 4}, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Grid3({4, 4, 4}, {1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Grid3({4, 4, 4}, {1, -2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Grid3({4, 4, 4}, {1, 1, 1}, {0, std::nan(""), 0}), std::invalid_argument);
}

TEST_CASE("linearize is x fastest and inverts delinearize") {
  const Grid3 g({3, 4, 5}, {1, 1, 1});
  CHECK(g.linearize(1, 0, 0) == 1);
  CHECK(g.linearize(0, 1, 0) == 3);
  CHECK(g.linearize(0, 0, 1) == 12);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const auto [x, y, z] = g.delinearize(i);
    CHECK(g.linearize(x, y, z) == i);
  }
  CHECK(g.contains({2, 3, 4}));
  CHECK_FALSE(g.contains({3, 0, 0}));
  CHECK_FALSE(g.contains({0, -1, 0}));
}

TEST_CASE("world and index coordinates are inverse") {
  const Grid3 g({8, 8, 8}, {2.0, 0.5, 3.0}, {-10.0, 4.0, 1.5});
  const Vec3 w = g.to_world({1.0, 2.0, 3.0});
  CHECK(w[0] == doctest::Approx(-8.0));
  CHECK(w[1] == doctest::Approx(5.0));
  CHECK(w[2] == doctest::Approx(10.5));
  const Vec3 back = g.to_index(w);
  CHECK(back[0] == doctest::Approx(1.0));
  CHECK(back[1] == doctest::Approx(2.0));
  CHECK(back[2] == doctest::Approx(3.0));
}

TEST_CASE("voxel volume in millilitres") {
  CHECK(voxel_volume_ml(Grid3({1, 1, 1}, {1, 1, 1})) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(voxel_volume_ml(Grid3({1, 1, 1}, {2, 2, 2})) == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(std::abs(voxel_volume_ml(Grid3({1, 1, 1}, {2.0364, 2.0364, 3.0})) - 0.012441) <= 1e-6);
}

TEST_CASE("geometry comparison uses the spacing/origin tolerance") {
  const Grid3 a({4, 4, 4}, {1, 1, 1});
  CHECK(a.same_geometry(Grid3({4, 4, 4}, {1 + 5e-5, 1, 1})));
  CHECK_FALSE(a.same_geometry(Grid3({4, 4, 4}, {1 + 5e-4, 1, 1})));
  CHECK_FALSE(a.same_geometry(Grid3({4, 4, 5}, {1, 1, 1})));
  CHECK_FALSE(a.same_geometry(Grid3({4, 4, 4}, {1, 1, 1}, {0, 0, 1e-3})));
  try {
    require_same_geometry(a, Grid3({4, 4, 5}, {1, 1, 1}), "test");
    FAIL("expected GeometryMismatch");
  } catch (const GeometryMismatch& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(4,4,4)") != std::string::npos);
    CHECK(msg.find("(4,4,5)") != std::string::npos);
  }
}

TEST_CASE("volume validates size and finiteness") {
  const Grid3 g = oracle::cube(2);
  CHECK_THROWS_AS(Volume(g, std::vector<float>(7, 0.0f)), std::invalid_argument);
  std::vector<float> v(8, 1.0f);
  v[3] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(Volume(g, v), std::invalid_argument);
  v[3] = std::nanf("");
  CHECK_THROWS_AS(Volume(g, v), std::invalid_argument);
  const Volume filled(g, 2.5f);
  CHECK(filled.at(1, 1, 1) == 2.5f);
}

TEST_CASE("mask binarizes and counts foreground") {
  const Grid3 g = oracle::cube(2);
  const Mask m(g, {0, 3, 0, 255, 1, 0, 0, 0});
  CHECK(m.foreground_count() == 3);
  CHECK(m.bits()[1] == 1);
  CHECK(m.bits()[3] == 1);
  CHECK(Mask(g).empty());
  CHECK_THROWS_AS(Mask(g, std::vector<std::uint8_t>(9, 0)), std::invalid_argument);
}

TEST_CASE("overlap count") {
  const Grid3 g = oracle::cube(4);
  const Mask a = oracle::mask_from_voxels(g, {{0, 0, 0}, {1, 0, 0}});
  const Mask b = oracle::mask_from_voxels(g, {{1, 0, 0}, {2, 0, 0}});
  CHECK(overlap_count(a, b) == 1);
  CHECK(overlap_count(Mask(g), b) == 0);
  CHECK(overlap_count(a, a) == 2);
  CHECK_THROWS_AS(overlap_count(a, Mask(oracle::cube(3))), GeometryMismatch);
}

TEST_CASE("label map consistency check") {
  const Grid3 g({4, 1, 1}, {1, 1, 1});
  CHECK(LabelMap(g, {1, 0, 2, 2}, {1, 2}).consistent());
  CHECK_FALSE(LabelMap(g, {1, 0, 3, 3}, {1, 2}).consistent());
  CHECK_FALSE(LabelMap(g, {1, 0, 2, 0}, {1, 2}).consistent());
  CHECK_THROWS_AS(LabelMap(g, {1, 0, 2}, {1, 1}), std::invalid_argument);
}
