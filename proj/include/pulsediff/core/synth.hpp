#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "pulsediff/core/recording.hpp"

namespace pulsediff::core {

enum class Morphology {
  gaussian_qrs,  // P, Q, R, S and T waves
  triphasic,     // Q, R, S only
};

Morphology parse_morphology(std::string_view name);
std::string_view to_string(Morphology m);

struct SynthConfig {
  double duration_s = 10.0;
  double sample_rate_hz = 100.0;
  double mean_interval_s = 0.8;
  double interval_jitter_frac = 0.05;
  double amplitude_jitter_frac = 0.05;
  double noise_std = 0.05;
  Morphology morphology = Morphology::gaussian_qrs;
  /// Scales every wave width; used to simulate subjects whose beats differ
  /// from the population template.
  double width_scale = 1.0;

  void validate() const;
};

/// Offset from a beat onset to its R peak in the generated morphology.
constexpr double kSynthPeakOffsetS = 0.25;

/// One noise-free beat of unit amplitude sampled at offsets [0, length).
std::vector<double> synth_beat(const SynthConfig& cfg, std::size_t length);

/// Quasiperiodic ECG-like signal. Onsets start at a random phase within the
/// first mean interval; beats are rendered for every onset inside the
/// recording, while the returned ground truth lists only beats whose R peak
/// also falls inside it.
std::pair<Recording, BeatSequence> synth_ecg(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace pulsediff::core
