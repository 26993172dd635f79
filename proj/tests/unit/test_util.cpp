#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/parallel.hpp"
#include "pulsediff/rng.hpp"
#include "pulsediff/stats.hpp"

using namespace pulsediff;

TEST_CASE("median and lower median") {
  const std::vector<double> odd{5, 1, 3};
  const std::vector<double> even{4, 1, 3, 2};
  CHECK(stats::median(odd) == 3.0);
  CHECK(stats::median(even) == 2.5);
  CHECK(stats::lower_median(even) == 2.0);
  CHECK(stats::lower_median(odd) == 3.0);
  CHECK_THROWS_AS(stats::median(std::vector<double>{}), Error);
}

TEST_CASE("percentile interpolates between order statistics") {
  const std::vector<double> xs{10, 0, 30, 20};
  CHECK(stats::percentile(xs, 0) == 0.0);
  CHECK(stats::percentile(xs, 100) == 30.0);
  // rank 0.5 * 3 = 1.5 between 10 and 20
  CHECK(stats::percentile(xs, 50) == doctest::Approx(15.0));
  // rank 0.97 * 3 = 2.91
  CHECK(stats::percentile(xs, 97) == doctest::Approx(29.1));
  CHECK(stats::quantile(xs, 0.25) == doctest::Approx(7.5));
  CHECK_THROWS_AS(stats::percentile(xs, 101), Error);
}

TEST_CASE("mean and population standard deviation") {
  const std::vector<double> xs{80, 80, 120, 80};
  CHECK(stats::mean(xs) == 90.0);
  CHECK(stats::population_stddev(xs) == doctest::Approx(std::sqrt(300.0)).epsilon(1e-12));
}

TEST_CASE("derived seeds are stable and separate streams") {
  static_assert(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a", {0}) != derive_seed(1, "a", {1}));
  CHECK(derive_seed(1, "a", {0, 1}) != derive_seed(1, "a", {1, 0}));
  auto r1 = make_rng(5, "x", {3});
  auto r2 = make_rng(5, "x", {3});
  CHECK(r1() == r2());
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  for (std::size_t threads : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, threads);
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(
                        10, [](std::size_t i) {
                          if (i == 7) throw Error(Errc::degenerate, "boom");
                        },
                        threads),
                    Error);
  }
  parallel_for(0, [](std::size_t) { FAIL("called"); });
}

TEST_CASE("byte writer and reader round trip little endian") {
  io::ByteWriter w;
  w.put_bytes("AB");
  w.put_u8(7);
  w.put_u32(0x01020304u);
  w.put_u64(0x0102030405060708ull);
  w.put_f32(1.5f);
  const auto& b = w.bytes();
  CHECK(b.size() == 2 + 1 + 4 + 8 + 4);
  CHECK(static_cast<unsigned char>(b[3]) == 0x04);
  io::ByteReader r(b);
  CHECK(r.get_bytes(2) == "AB");
  CHECK(r.get_u8() == 7);
  CHECK(r.get_u32() == 0x01020304u);
  CHECK(r.get_u64() == 0x0102030405060708ull);
  CHECK(r.get_f32() == 1.5f);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.get_u8(), Error);
}

TEST_CASE("shortest decimal text round trips") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = u(g);
    CHECK(io::parse_double(io::format_double(v)) == v);
    const float f = static_cast<float>(v);
    CHECK(static_cast<float>(io::parse_double(io::format_float(f))) == f);
  }
  CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("strict field parsing") {
  CHECK(io::parse_int("42") == 42);
  CHECK(io::parse_double("-2.5") == -2.5);
  CHECK_THROWS_AS(io::parse_int("4x"), Error);
  CHECK_THROWS_AS(io::parse_double(""), Error);
  CHECK_THROWS_AS(io::parse_double("1.0 "), Error);
  const auto parts = io::split("a,b,,c", ',');
  REQUIRE(parts.size() == 4);
  CHECK(parts[2].empty());
}
