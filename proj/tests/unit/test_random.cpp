#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "lesionkit/random.hpp"

using lesionkit::Rng;

TEST_CASE("same seed and stream give the same sequence") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams and seeds are distinct") {
  Rng a(42, 1), b(42, 2), c(43, 1);
  const auto x = a.next_u64();
  CHECK(x != b.next_u64());
  CHECK(x != c.next_u64());
}

TEST_CASE("engine seeding follows the documented derivation") {
  CHECK(lesionkit::splitmix64(0) == 0xe220a8397b1dcdafULL);
  for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
    for (std::uint64_t stream : {0ULL, 10ULL, 22ULL}) {
      std::mt19937_64 reference(lesionkit::splitmix64(seed ^ lesionkit::splitmix64(stream + 1)));
      Rng r(seed, stream);
      for (int i = 0; i < 5; ++i) CHECK(r.next_u64() == reference());
    }
  }
}

TEST_CASE("uniform and below stay in range") {
  Rng r(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto k = r.below(6);
    CHECK(k < 6);
    seen.insert(k);
    const auto b = r.between(-2, 2);
    CHECK(b >= -2);
    CHECK(b <= 2);
  }
  CHECK(seen.size() == 6);
  CHECK_THROWS(r.below(0));
  CHECK_THROWS(r.between(3, 2));
  CHECK(r.between(5, 5) == 5);
}

TEST_CASE("normal deviates have unit moments") {
  Rng r(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}
