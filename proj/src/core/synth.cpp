#include "pulsediff/core/synth.hpp"

#include <array>
#include <cmath>
#include <string>

#include "pulsediff/error.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::core {

namespace {

struct Wave {
  double amplitude;
  double center_s;  // relative to beat onset
  double width_s;   // Gaussian standard deviation
};

constexpr std::array<Wave, 5> kPqrst{{
    {0.15, 0.10, 0.025},
    {-0.12, 0.22, 0.010},
    {1.00, kSynthPeakOffsetS, 0.012},
    {-0.25, 0.28, 0.012},
    {0.30, 0.55, 0.050},
}};

constexpr std::array<Wave, 3> kTriphasic{{
    {-0.30, 0.22, 0.012},
    {1.00, kSynthPeakOffsetS, 0.012},
    {-0.30, 0.28, 0.012},
}};

std::span<const Wave> waves_for(Morphology m) {
  if (m == Morphology::triphasic) return kTriphasic;
  return kPqrst;
}

void render_beat(const SynthConfig& cfg, double onset, double scale, std::vector<double>& out) {
  const double fs = cfg.sample_rate_hz;
  const auto n = static_cast<double>(out.size());
  for (const Wave& w : waves_for(cfg.morphology)) {
    const double center = onset + w.center_s * fs;
    const double sigma = w.width_s * fs * cfg.width_scale;
    const double lo = std::max(0.0, std::ceil(center - 5.0 * sigma));
    const double hi = std::min(n - 1.0, std::floor(center + 5.0 * sigma));
    for (double j = lo; j <= hi; j += 1.0) {
      const double z = (j - center) / sigma;
      out[static_cast<std::size_t>(j)] += scale * w.amplitude * std::exp(-0.5 * z * z);
    }
  }
}

}  // namespace

Morphology parse_morphology(std::string_view name) {
  if (name == "gaussian_qrs") return Morphology::gaussian_qrs;
  if (name == "triphasic") return Morphology::triphasic;
  throw Error(Errc::invalid_argument, "unknown morphology '" + std::string(name) + "'");
}

std::string_view to_string(Morphology m) {
  return m == Morphology::triphasic ? "triphasic" : "gaussian_qrs";
}

void SynthConfig::validate() const {
  if (!(duration_s > 0.0)) throw Error(Errc::invalid_argument, "duration_s must be positive");
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::invalid_argument, "sample_rate_hz must be positive");
  if (!(mean_interval_s > 0.0)) throw Error(Errc::invalid_argument, "mean_interval_s must be positive");
  if (!(interval_jitter_frac >= 0.0 && interval_jitter_frac < 1.0)) {
    throw Error(Errc::invalid_argument, "interval_jitter_frac must lie in [0, 1)");
  }
  if (!(amplitude_jitter_frac >= 0.0)) throw Error(Errc::invalid_argument, "amplitude_jitter_frac must be >= 0");
  if (!(noise_std >= 0.0)) throw Error(Errc::invalid_argument, "noise_std must be >= 0");
  if (!(width_scale > 0.0)) throw Error(Errc::invalid_argument, "width_scale must be positive");
  if (std::lround(duration_s * sample_rate_hz) < 1) throw Error(Errc::invalid_argument, "recording shorter than one sample");
  if (std::lround(mean_interval_s * sample_rate_hz) < 1) {
    throw Error(Errc::invalid_argument, "mean interval shorter than one sample");
  }
}

std::vector<double> synth_beat(const SynthConfig& cfg, std::size_t length) {
  std::vector<double> out(length, 0.0);
  render_beat(cfg, 0.0, 1.0, out);
  return out;
}

std::pair<Recording, BeatSequence> synth_ecg(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const double fs = cfg.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::lround(cfg.duration_s * fs));
  const auto peak_offset = static_cast<std::size_t>(std::lround(kSynthPeakOffsetS * fs));
  const long nominal_gap = std::lround(cfg.mean_interval_s * fs);

  Rng onset_rng = make_rng(seed, "synth.onsets");
  Rng amp_rng = make_rng(seed, "synth.amplitude");
  Rng noise_rng = make_rng(seed, "synth.noise");

  std::vector<double> values(n, 0.0);
  std::vector<std::size_t> truth;
  std::uniform_int_distribution<long> phase(0, nominal_gap - 1);
  std::uniform_real_distribution<double> interval_u(-cfg.interval_jitter_frac, cfg.interval_jitter_frac);
  std::uniform_real_distribution<double> amp_u(-cfg.amplitude_jitter_frac, cfg.amplitude_jitter_frac);

  long onset = phase(onset_rng);
  while (onset < static_cast<long>(n)) {
    const double scale = cfg.amplitude_jitter_frac > 0.0 ? 1.0 + amp_u(amp_rng) : 1.0;
    render_beat(cfg, static_cast<double>(onset), scale, values);
    if (static_cast<std::size_t>(onset) + peak_offset < n) truth.push_back(static_cast<std::size_t>(onset));
    const double u = cfg.interval_jitter_frac > 0.0 ? interval_u(onset_rng) : 0.0;
    onset += std::max(1L, std::lround(cfg.mean_interval_s * (1.0 + u) * fs));
  }

  if (cfg.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : values) v += noise(noise_rng);
  }
  return {Recording::fully_observed(std::move(values), fs), BeatSequence(std::move(truth), n)};
}

}  // namespace pulsediff::core
