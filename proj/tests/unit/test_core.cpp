#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/core/interpolate.hpp"
#include "pulsediff/core/missingness.hpp"
#include "pulsediff/core/recording.hpp"
#include "pulsediff/core/recording_io.hpp"
#include "pulsediff/core/synth.hpp"
#include "pulsediff/error.hpp"

using namespace pulsediff;
using namespace pulsediff::core;

namespace {

Recording ramp(std::size_t n, double fs = 100.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.01 * static_cast<double>(i);
  return Recording::fully_observed(std::move(v), fs);
}

Recording with_missing(std::vector<double> values, std::vector<std::uint8_t> mask) {
  return Recording::fully_observed(std::move(values), 100.0).with_mask(std::move(mask));
}

}  // namespace

TEST_CASE("recording invariants are enforced") {
  CHECK_THROWS_AS(Recording({}, {}, {}, 100.0), Error);
  CHECK_THROWS_AS(Recording({1.0, 2.0}, {1}, {0.0, 0.01}, 100.0), Error);
  CHECK_THROWS_AS(Recording({1.0, 2.0}, {1, 2}, {0.0, 0.01}, 100.0), Error);
  CHECK_THROWS_AS(Recording({1.0, 2.0}, {1, 1}, {0.0, 0.02}, 100.0), Error);
  CHECK_THROWS_AS(Recording({1.0}, {1}, {0.0}, 0.0), Error);
  const auto r = Recording({1.0, 2.0, 3.0}, {1, 0, 1}, {5.0, 5.01, 5.02}, 100.0);
  CHECK(r.observed_count() == 2);
  CHECK(r.missing_count() == 1);
  CHECK_FALSE(r.fully_observed());
  CHECK(r.zero_filled() == std::vector<double>{1.0, 0.0, 3.0});
  CHECK(r.values()[1] == 2.0);  // ground truth kept under the mask
}

TEST_CASE("beat sequences must be strictly increasing and inside the recording") {
  CHECK_NOTHROW(BeatSequence({0, 5, 9}, 10));
  CHECK_THROWS_AS(BeatSequence({0, 5, 5}, 10), Error);
  CHECK_THROWS_AS(BeatSequence({0, 10}, 10), Error);
  const BeatSequence b({0, 80, 200}, 300);
  CHECK(b.intervals() == std::vector<double>{80.0, 120.0});
  CHECK(b.imputed_count() == 0);
}

TEST_CASE("apply_missingness removes the documented sample count") {
  const auto rec = ramp(1000);

  SUBCASE("zero percent is a no-op") {
    const auto out = apply_missingness(rec, {MissingKind::transient, 0.0, 5, 1});
    CHECK(out.fully_observed());
  }
  SUBCASE("30 percent transient gives 60 disjoint packets") {
    const auto out = apply_missingness(rec, {MissingKind::transient, 0.30, 5, 1});
    CHECK(out.missing_count() == 300);
    const auto m = out.mask();
    std::size_t packets = 0;
    for (std::size_t i = 0; i < m.size(); i += 5) {
      const auto zeros = std::count(m.begin() + i, m.begin() + i + 5, 0);
      CHECK((zeros == 0 || zeros == 5));
      packets += zeros == 5;
    }
    CHECK(packets == 60);
    CHECK(std::equal(out.values().begin(), out.values().end(), rec.values().begin()));
    CHECK(std::equal(out.timestamps().begin(), out.timestamps().end(), rec.timestamps().begin()));
  }
  SUBCASE("transient count rounds down to whole packets") {
    const auto out = apply_missingness(rec, {MissingKind::transient, 0.123, 5, 2});
    CHECK(out.missing_count() == 120);
    CHECK(missing_sample_count({MissingKind::transient, 0.123, 5, 2}, 1000) == 120);
  }
  SUBCASE("extended block is contiguous") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto out = apply_missingness(rec, {MissingKind::extended, 0.37, 5, seed});
      CHECK(out.missing_count() == 370);
      const auto m = out.mask();
      const auto first = std::find(m.begin(), m.end(), 0);
      CHECK(std::all_of(first, first + 370, [](auto v) { return v == 0; }));
    }
  }
  SUBCASE("full extended missingness") {
    const auto out = apply_missingness(rec, {MissingKind::extended, 1.0, 5, 3});
    CHECK(out.observed_count() == 0);
  }
  SUBCASE("deterministic in the seed") {
    const MissingnessSpec spec{MissingKind::transient, 0.4, 5, 11};
    const auto a = apply_missingness(rec, spec);
    const auto b = apply_missingness(rec, spec);
    CHECK(std::equal(a.mask().begin(), a.mask().end(), b.mask().begin()));
    auto other = spec;
    other.seed = 12;
    const auto c = apply_missingness(rec, other);
    CHECK_FALSE(std::equal(a.mask().begin(), a.mask().end(), c.mask().begin()));
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(apply_missingness(rec, {MissingKind::transient, 1.5, 5, 0}), Error);
    CHECK_THROWS_AS(apply_missingness(rec, {MissingKind::transient, 0.3, 0, 0}), Error);
    const auto masked = apply_missingness(rec, {MissingKind::transient, 0.3, 5, 0});
    CHECK_THROWS_AS(apply_missingness(masked, {MissingKind::transient, 0.3, 5, 0}), Error);
  }
}

TEST_CASE("missing kind names") {
  CHECK(parse_missing_kind("transient") == MissingKind::transient);
  CHECK(parse_missing_kind("extended") == MissingKind::extended);
  CHECK(to_string(MissingKind::extended) == "extended");
  CHECK_THROWS_AS(parse_missing_kind("burst"), Error);
}

TEST_CASE("linear interpolation") {
  CHECK(linear_interpolate(Recording::fully_observed({1, 2, 3}, 100)) == std::vector<double>{1, 2, 3});
  CHECK(linear_interpolate(with_missing({0, 9, 2}, {1, 0, 1})) == std::vector<double>{0, 1, 2});
  CHECK(linear_interpolate(with_missing({9, 9, 4, 9, 8}, {0, 0, 1, 0, 1})) == std::vector<double>{4, 4, 4, 6, 8});
  CHECK_THROWS_AS(linear_interpolate(with_missing({1, 2}, {0, 0})), Error);

  // Observed samples kept; filled values stay between their bracketing neighbours.
  std::mt19937_64 g(4);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(40);
    std::vector<std::uint8_t> m(40);
    for (auto& x : v) x = n(g);
    for (auto& x : m) x = g() % 3 != 0;
    m[g() % 40] = 1;
    const auto out = linear_interpolate(with_missing(v, m));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (m[i]) {
        CHECK(out[i] == v[i]);
        continue;
      }
      std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(i), hi = static_cast<std::ptrdiff_t>(i);
      while (lo >= 0 && !m[lo]) --lo;
      while (hi < 40 && !m[hi]) ++hi;
      const double a = lo >= 0 ? v[lo] : v[hi];
      const double b = hi < 40 ? v[hi] : v[lo];
      CHECK(out[i] >= std::min(a, b) - 1e-12);
      CHECK(out[i] <= std::max(a, b) + 1e-12);
    }
  }
}

TEST_CASE("synthetic recordings") {
  SynthConfig cfg;

  SUBCASE("jitter-free gaps are exact") {
    cfg.interval_jitter_frac = 0.0;
    cfg.noise_std = 0.0;
    const auto [rec, beats] = synth_ecg(cfg, 5);
    for (double gap : beats.intervals()) CHECK(gap == 80.0);
  }
  SUBCASE("10 s at 0.8 s gives 12 or 13 beats") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto [rec, beats] = synth_ecg(cfg, seed);
      CHECK(rec.size() == 1000);
      CHECK(rec.sample_rate_hz() == 100.0);
      CHECK(beats.size() >= 12);
      CHECK(beats.size() <= 13);
      CHECK(beats.recording_len == 1000);
      for (std::size_t i = 1; i < beats.size(); ++i) CHECK(beats.onsets[i] > beats.onsets[i - 1]);
      CHECK(beats.onsets.back() < 1000);
    }
  }
  SUBCASE("no amplitude jitter gives equal peaks") {
    cfg.amplitude_jitter_frac = 0.0;
    cfg.noise_std = 0.0;
    const auto [rec, beats] = synth_ecg(cfg, 9);
    const double first = rec.values()[beats.onsets[0] + 25];
    for (auto o : beats.onsets) CHECK(rec.values()[o + 25] == doctest::Approx(first).epsilon(1e-12));
  }
  SUBCASE("deterministic in the seed") {
    const auto a = synth_ecg(cfg, 3);
    const auto b = synth_ecg(cfg, 3);
    CHECK(std::equal(a.first.values().begin(), a.first.values().end(), b.first.values().begin()));
    CHECK(a.second.onsets == b.second.onsets);
  }
  SUBCASE("single beat peaks at the documented offset") {
    const auto beat = synth_beat(cfg, 80);
    CHECK(std::max_element(beat.begin(), beat.end()) - beat.begin() == 25);
  }
  SUBCASE("validation") {
    cfg.interval_jitter_frac = 1.0;
    CHECK_THROWS_AS(synth_ecg(cfg, 0), Error);
  }
}

TEST_CASE("recording CSV round trip") {
  const auto [clean, beats] = synth_ecg(SynthConfig{}, 2);
  const auto rec = apply_missingness(clean, {MissingKind::transient, 0.3, 5, 2});
  const auto text = recording_to_csv(rec);
  CHECK(text.rfind("index,timestamp_s,value_mv,mask\n", 0) == 0);
  const auto back = recording_from_csv(text);
  CHECK(back.size() == 1000);
  CHECK(back.sample_rate_hz() == 100.0);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(back.values()[i] == static_cast<double>(static_cast<float>(rec.values()[i])));
    CHECK(back.mask()[i] == rec.mask()[i]);
    CHECK(back.timestamps()[i] == rec.timestamps()[i]);
  }
  CHECK(recording_to_csv(back) == text);
}

TEST_CASE("recording CSV errors name the row") {
  const std::string good = "index,timestamp_s,value_mv,mask\n0,0,1,1\n1,0.01,2,1\n2,0.02,3,1\n";
  CHECK(recording_from_csv(good).size() == 3);

  auto expect = [](const std::string& text, const std::string& needle) {
    try {
      (void)recording_from_csv(text);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::parse);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect("index,timestamp_s,value_mv,mask\n0,0,1,1\n1,0.01,2,2\n", "row 3");
  expect("index,timestamp_s,value_mv,mask\n0,0,1,1\n1,0.01,abc,1\n", "row 3");
  expect("index,timestamp_s,value_mv,mask\n0,0,1,1\n1,0.01,2\n", "row 3");
  expect("index,value\n0,1\n", "row 1");
  expect("index,timestamp_s,value_mv,mask\n0,0,1,1\n1,0.01,2,1\n2,0.05,3,1\n", "");
}

TEST_CASE("recording binary round trip") {
  const auto [clean, beats] = synth_ecg(SynthConfig{}, 4);
  const auto rec = apply_missingness(clean, {MissingKind::extended, 0.2, 5, 4});
  const auto bytes = recording_to_binary(rec);
  CHECK(bytes.size() == 16 + 1000 * 4 + 1000);
  CHECK(bytes.substr(0, 4) == "PDR1");
  const auto back = recording_from_binary(bytes);
  CHECK(back.sample_rate_hz() == 100.0);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(back.values()[i] == static_cast<double>(static_cast<float>(rec.values()[i])));
    CHECK(back.mask()[i] == rec.mask()[i]);
  }
  CHECK_THROWS_AS(recording_from_binary(bytes.substr(0, 100)), Error);
  CHECK_THROWS_AS(recording_from_binary("XXXX" + bytes.substr(4)), Error);

  const auto dir = std::filesystem::temp_directory_path() / "pulsediff_core_io";
  std::filesystem::create_directories(dir);
  save_recording(rec, dir / "r.bin");
  save_recording(rec, dir / "r.csv");
  CHECK(recording_to_binary(load_recording(dir / "r.bin")) == bytes);
  CHECK(load_recording(dir / "r.csv").size() == 1000);
  std::filesystem::remove_all(dir);
}

TEST_CASE("beat CSV round trip") {
  const BeatSequence b({3, 80, 161}, {BeatSequence::Source::detected, BeatSequence::Source::imputed,
                                      BeatSequence::Source::detected},
                       200);
  const auto text = beats_to_csv(b);
  const auto back = beats_from_csv(text);
  CHECK(back.onsets == b.onsets);
  CHECK(back.provenance == b.provenance);
  CHECK(back.recording_len == 200);
  CHECK_THROWS_AS(beats_from_csv("onset,source\n3,detected\n"), Error);
}
