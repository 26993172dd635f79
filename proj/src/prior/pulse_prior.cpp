#include "pulsediff/prior/pulse_prior.hpp"

#include <algorithm>
#include <string>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/prior/rhythm.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::prior {

namespace {
constexpr std::string_view kPriorMagic = "PDP1";
}

void PriorConfig::validate() const {
  if (loc_shift_M < 0) throw Error(Errc::invalid_argument, "location shift M must be >= 0");
  if (!(amp_shift_A >= 0.0)) throw Error(Errc::invalid_argument, "amplitude shift A must be >= 0");
  if (k < 1) throw Error(Errc::invalid_argument, "prior needs K >= 1 rows");
}

std::vector<double> place_templates(const PulseTemplate& tmpl, std::span<const std::size_t> onsets,
                                    std::span<const int> shifts, std::span<const double> amp_offsets,
                                    std::size_t length) {
  if (shifts.size() != onsets.size() || amp_offsets.size() != onsets.size()) {
    throw Error(Errc::invalid_argument, "one shift and amplitude offset per onset required");
  }
  std::vector<double> out(length, 0.0);
  const auto len = static_cast<long>(length);
  const auto width = static_cast<long>(tmpl.size());
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    const long start = static_cast<long>(onsets[i]) + shifts[i];
    long end = start + width;
    if (i + 1 < onsets.size()) end = std::min(end, static_cast<long>(onsets[i + 1]) + shifts[i + 1]);
    for (long t = std::max(start, 0L); t < std::min(end, len); ++t) {
      out[static_cast<std::size_t>(t)] = amp_offsets[i] + tmpl.waveform[static_cast<std::size_t>(t - start)];
    }
  }
  return out;
}

std::vector<double> fixed_prior(const PulseTemplate& tmpl, std::span<const std::size_t> onsets,
                                std::size_t length) {
  const std::vector<int> no_shift(onsets.size(), 0);
  const std::vector<double> no_offset(onsets.size(), 0.0);
  return place_templates(tmpl, onsets, no_shift, no_offset, length);
}

PulsePrior build_prior(const PulseTemplate& tmpl, const core::BeatSequence& beats, std::size_t length,
                       const PriorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PulsePrior p;
  p.k = cfg.k;
  p.length = length;
  p.loc_shift_M = cfg.loc_shift_M;
  p.amp_shift_A = cfg.amp_shift_A;
  p.threshold_r = cfg.threshold_r;
  p.confidence_R = rhythm_confidence(beats);
  p.used_imputed_beats = p.confidence_R < cfg.threshold_r;
  // A finite score implies at least three onsets, which imputation needs.
  p.onsets = p.used_imputed_beats ? impute_beats(beats).onsets : beats.onsets;

  const std::size_t n = p.onsets.size();
  p.shifts.assign(cfg.k * n, 0);
  p.amp_offsets.assign(cfg.k * n, 0.0);
  p.rows.reserve(cfg.k * length);

  Rng rng = make_rng(seed, "prior.augment");
  std::uniform_int_distribution<int> shift_dist(-cfg.loc_shift_M, cfg.loc_shift_M);
  std::uniform_real_distribution<double> amp_dist(-cfg.amp_shift_A, cfg.amp_shift_A);
  for (std::size_t row = 0; row < cfg.k; ++row) {
    const std::span<int> shifts(p.shifts.data() + row * n, n);
    const std::span<double> amps(p.amp_offsets.data() + row * n, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.loc_shift_M > 0) shifts[i] = shift_dist(rng);
      if (cfg.amp_shift_A > 0.0) amps[i] = amp_dist(rng);
    }
    const auto placed = place_templates(tmpl, p.onsets, shifts, amps, length);
    p.rows.insert(p.rows.end(), placed.begin(), placed.end());
  }
  return p;
}

std::string prior_to_binary(const PulsePrior& p) {
  io::ByteWriter w;
  w.put_bytes(kPriorMagic);
  w.put_u32(static_cast<std::uint32_t>(p.k));
  w.put_u32(static_cast<std::uint32_t>(p.length));
  w.put_f32(static_cast<float>(p.loc_shift_M));
  w.put_f32(static_cast<float>(p.amp_shift_A));
  w.put_f32(static_cast<float>(p.confidence_R));
  w.put_u8(p.used_imputed_beats ? 1 : 0);
  for (double v : p.rows) w.put_f32(static_cast<float>(v));
  return w.bytes();
}

PulsePrior prior_from_binary(std::string_view bytes) {
  io::ByteReader r{std::string(bytes)};
  if (r.get_bytes(4) != kPriorMagic) throw Error(Errc::parse, "bad prior magic");
  PulsePrior p;
  p.k = r.get_u32();
  p.length = r.get_u32();
  p.loc_shift_M = static_cast<int>(r.get_f32());
  p.amp_shift_A = r.get_f32();
  p.confidence_R = r.get_f32();
  const std::uint8_t used = r.get_u8();
  if (used > 1) throw Error(Errc::parse, "used_imputed_beats flag is not boolean");
  p.used_imputed_beats = used == 1;
  if (r.remaining() != p.k * p.length * 4) throw Error(Errc::parse, "prior payload size mismatch");
  p.rows.resize(p.k * p.length);
  for (auto& v : p.rows) v = r.get_f32();
  return p;
}

void save_prior(const PulsePrior& p, const std::filesystem::path& path) {
  io::write_file_atomic(path, prior_to_binary(p));
}

PulsePrior load_prior(const std::filesystem::path& path) {
  try {
    return prior_from_binary(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace pulsediff::prior
