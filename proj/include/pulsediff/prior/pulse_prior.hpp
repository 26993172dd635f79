#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/prior/template.hpp"

namespace pulsediff::prior {

struct PriorConfig {
  int loc_shift_M = 2;         // samples
  double amp_shift_A = 0.01;   // millivolts
  std::size_t k = 16;
  double threshold_r = 1.0;

  void validate() const;
};

/// K augmented template placements, stored row-major as a K x L matrix.
struct PulsePrior {
  std::vector<double> rows;
  std::size_t k = 0;
  std::size_t length = 0;
  int loc_shift_M = 0;
  double amp_shift_A = 0.0;
  double confidence_R = std::numeric_limits<double>::infinity();
  double threshold_r = 1.0;
  bool used_imputed_beats = false;

  /// Onsets the templates were placed at, and the per-row draws. Not stored
  /// in the binary format.
  std::vector<std::size_t> onsets;
  std::vector<int> shifts;             // k x onsets
  std::vector<double> amp_offsets;     // k x onsets

  std::span<const double> row(std::size_t i) const { return {rows.data() + i * length, length}; }
};

/// Template placed at every onset: each placement writes
/// [onset + shift, onset + shift + W) plus its amplitude offset, truncated at
/// the next placement's start and at the recording bounds. Uncovered samples
/// are zero.
std::vector<double> place_templates(const PulseTemplate& tmpl, std::span<const std::size_t> onsets,
                                    std::span<const int> shifts, std::span<const double> amp_offsets,
                                    std::size_t length);

/// Template at every onset with no shift or amplitude offset.
std::vector<double> fixed_prior(const PulseTemplate& tmpl, std::span<const std::size_t> onsets,
                                std::size_t length);

/// Augmented prior. Beats are imputed first when the rhythm confidence is
/// below threshold_r. Shifts are integers from {-M..M}, amplitude offsets
/// uniform in (-A, A). M = 0, A = 0, K = 1 gives the fixed prior.
PulsePrior build_prior(const PulseTemplate& tmpl, const core::BeatSequence& beats, std::size_t length,
                       const PriorConfig& cfg, std::uint64_t seed);

/// `PDP1` header (u32 K, u32 L, f32 M, f32 A, f32 R, u8 used_imputed_beats)
/// followed by K*L little-endian f32 values.
std::string prior_to_binary(const PulsePrior& p);
PulsePrior prior_from_binary(std::string_view bytes);
void save_prior(const PulsePrior& p, const std::filesystem::path& path);
PulsePrior load_prior(const std::filesystem::path& path);

}  // namespace pulsediff::prior
