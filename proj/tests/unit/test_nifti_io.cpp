#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "lesionkit/log.hpp"
#include "lesionkit/nifti_io.hpp"
#include "oracles.hpp"

using namespace lesionkit;
using nifti::DataType;
using nifti::ErrorKind;
using nifti::NiftiError;

namespace {

const std::filesystem::path kFixtures = LESIONKIT_FIXTURE_DIR;

ErrorKind error_kind_of(const std::filesystem::path& path) {
  try {
    (void)nifti::read_volume(path);
  } catch (const NiftiError& e) {
    return e.kind();
  }
  FAIL("expected NiftiError for " << path);
  return ErrorKind::IoError;
}

void patch_file(const std::filesystem::path& path, std::size_t offset, const void* bytes, std::size_t n) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(n));
}

Volume ramp_volume(const Grid3& g) {
  std::vector<float> v(g.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  return Volume(g, std::move(v));
}

// volatile keeps GCC 11 at -O3 from folding (double)(float)x back to x
double to_float32(double x) {
  volatile float f = static_cast<float>(x);
  return f;
}

Grid3 float32_grid(const Grid3& g) {
  Vec3 sp{}, org{};
  for (int a = 0; a < 3; ++a) {
    sp[a] = to_float32(g.spacing()[a]);
    org[a] = to_float32(g.origin()[a]);
  }
  return Grid3(g.dims(), sp, org);
}

}  // namespace

TEST_CASE("fixture written by nibabel: float32 ramp with spacing and origin") {
  const Volume v = nifti::read_volume(kFixtures / "ramp_f32.nii.gz");
  CHECK(v.grid().dims() == Dims3{4, 4, 4});
  CHECK(v.grid().spacing() == Vec3{1, 2, 3});
  CHECK(v.grid().origin() == Vec3{10.0, -5.0, 2.5});
  for (std::size_t z = 0; z < 4; ++z)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) CHECK(v.at(x, y, z) == static_cast<float>(x + 4 * y + 16 * z));
}

TEST_CASE("fixture written by nibabel: int16, big-endian and scaled files") {
  const Volume i16 = nifti::read_volume(kFixtures / "ramp_i16.nii");
  const Volume be = nifti::read_volume(kFixtures / "ramp_be.nii");
  CHECK(nifti::read_header(kFixtures / "ramp_be.nii").big_endian);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(i16.values()[i] == static_cast<float>(i));
    CHECK(be.values()[i] == static_cast<float>(i));
  }
  CHECK(be.grid().spacing() == Vec3{1, 2, 3});

  const Volume scaled = nifti::read_volume(kFixtures / "scaled_u8.nii");
  CHECK(scaled.at(0, 0, 0) == 20.0f);
  CHECK(scaled.at(1, 0, 0) == 10.0f);
}

TEST_CASE("4D file is rejected as non-3D") {
  try {
    (void)nifti::read_volume(kFixtures / "two_timepoints.nii");
    FAIL("expected error");
  } catch (const NiftiError& e) {
    CHECK(e.kind() == ErrorKind::NonThreeD);
    CHECK(std::string(e.what()).find("non-3D image") != std::string::npos);
  }
}

TEST_CASE("mask reading thresholds and warns on non-binary values") {
  log::ScopedCapture capture;
  const Mask m = nifti::read_mask(kFixtures / "labels_012.nii.gz");
  CHECK(m.foreground_count() == 2);
  CHECK(m.at(0, 0, 0));
  CHECK(m.at(2, 2, 2));
  REQUIRE(capture.warnings().size() == 1);
  CHECK(capture.warnings()[0].find("0 1 2") != std::string::npos);
}

TEST_CASE("binary and empty masks read back without warnings") {
  oracle::TempDir dir("nifti_mask");
  log::ScopedCapture capture;
  const Grid3 g({5, 4, 3}, {0.5, 1, 2});
  const Mask three = oracle::mask_from_voxels(g, {{0, 0, 0}, {4, 3, 2}, {2, 1, 1}});
  nifti::write_mask(three, dir / "m.nii");
  CHECK(nifti::read_mask(dir / "m.nii") == three);
  nifti::write_mask(Mask(g), dir / "e.nii.gz");
  CHECK(nifti::read_mask(dir / "e.nii.gz").foreground_count() == 0);
  CHECK(capture.warnings().empty());
}

TEST_CASE("round trip is bit-identical for every datatype, plain and gzip") {
  oracle::TempDir dir("nifti_rt");
  const Grid3 g({8, 7, 6}, {0.8, 1.25, 3.0}, {-12.5, 40.0, 7.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> real(-1000.0f, 1000.0f);
  std::vector<float> floats(g.voxel_count());
  for (auto& v : floats) v = real(rng);
  const Volume random_floats(g, floats);

  struct Case {
    DataType type;
    float lo, hi;
  };
  for (const Case c : {Case{DataType::UInt8, 0, 255}, Case{DataType::Int16, -32768, 32767},
                       Case{DataType::Int32, -16777216, 16777216}, Case{DataType::Float32, 0, 0},
                       Case{DataType::Float64, 0, 0}}) {
    std::vector<float> values = floats;
    if (c.hi > c.lo) {
      std::uniform_int_distribution<long> ints(static_cast<long>(c.lo), static_cast<long>(c.hi));
      for (auto& v : values) v = static_cast<float>(ints(rng));
      values[0] = c.lo;
      values[1] = c.hi;
    }
    const Volume vol(g, values);
    for (bool gz : {false, true}) {
      const auto path = dir / (nifti::to_string(c.type) + (gz ? ".nii.gz" : ".nii"));
      nifti::write_volume(vol, path, nifti::WriteOptions{gz, c.type});
      const Volume back = nifti::read_volume(path);
      CAPTURE(path);
      // header geometry is stored as float32
      CHECK(back.grid() == float32_grid(g));
      const auto again = dir / ("again_" + path.filename().string());
      nifti::write_volume(back, again, nifti::WriteOptions{gz, c.type});
      CHECK(nifti::read_volume(again).grid() == back.grid());
      CHECK(std::memcmp(back.values().data(), vol.values().data(), vol.size() * sizeof(float)) == 0);
      CHECK(nifti::read_header(path).datatype == static_cast<std::int16_t>(c.type));
    }
  }
}

TEST_CASE("gzip output starts with the gzip magic and plain output with a header") {
  oracle::TempDir dir("nifti_gz");
  const Volume v = ramp_volume(oracle::cube(4));
  nifti::write_volume(v, dir / "a.nii.gz", DataType::Float32);
  nifti::write_volume(v, dir / "a.nii", DataType::Float32);
  const std::string gz = oracle::read_file(dir / "a.nii.gz");
  const std::string plain = oracle::read_file(dir / "a.nii");
  CHECK(static_cast<unsigned char>(gz[0]) == 0x1f);
  CHECK(static_cast<unsigned char>(gz[1]) == 0x8b);
  CHECK(plain.size() == 352 + 64 * 4);
  CHECK(plain.compare(344, 4, std::string("n+1\0", 4)) == 0);
}

TEST_CASE("integer datatypes refuse values they cannot store") {
  oracle::TempDir dir("nifti_int");
  const Grid3 g = oracle::cube(2);
  CHECK_THROWS(nifti::write_volume(Volume(g, 0.5f), dir / "a.nii", DataType::Int16));
  CHECK_THROWS(nifti::write_volume(Volume(g, 256.0f), dir / "b.nii", DataType::UInt8));
  CHECK_THROWS(nifti::write_volume(Volume(g, -1.0f), dir / "c.nii", DataType::UInt8));
}

TEST_CASE("malformed files map to distinct error kinds") {
  oracle::TempDir dir("nifti_bad");
  const Volume v = ramp_volume(oracle::cube(4));

  CHECK(error_kind_of(dir / "missing.nii") == ErrorKind::IoError);

  nifti::write_volume(v, dir / "magic.nii", DataType::Float32);
  patch_file(dir / "magic.nii", 344, "ni1\0", 4);
  CHECK(error_kind_of(dir / "magic.nii") == ErrorKind::BadMagic);

  nifti::write_volume(v, dir / "dtype.nii", DataType::Float32);
  const std::int16_t complex64 = 32;
  patch_file(dir / "dtype.nii", 70, &complex64, 2);
  CHECK(error_kind_of(dir / "dtype.nii") == ErrorKind::UnsupportedDatatype);

  nifti::write_volume(v, dir / "short.nii", DataType::Float32);
  std::filesystem::resize_file(dir / "short.nii", 352 + 100);
  CHECK(error_kind_of(dir / "short.nii") == ErrorKind::TruncatedPayload);

  std::ofstream(dir / "tiny.nii") << "not a nifti file";
  CHECK(error_kind_of(dir / "tiny.nii") == ErrorKind::BadHeader);
}
