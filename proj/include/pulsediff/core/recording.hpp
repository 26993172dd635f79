#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pulsediff::core {

/// A single-channel recording: samples, observation mask (1 = observed,
/// 0 = missing) and uniformly spaced timestamps. Values at missing positions
/// are retained so that simulated missingness keeps its ground truth.
class Recording {
 public:
  /// Validates the invariants: equal non-zero lengths, binary mask and
  /// timestamps advancing by 1/sample_rate_hz.
  Recording(std::vector<double> values, std::vector<std::uint8_t> mask,
            std::vector<double> timestamps, double sample_rate_hz);

  static Recording fully_observed(std::vector<double> values, double sample_rate_hz,
                                  double start_time_s = 0.0);

  Recording with_mask(std::vector<std::uint8_t> mask) const;
  Recording with_values(std::vector<double> values) const;

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::span<const double> timestamps() const { return timestamps_; }
  double sample_rate_hz() const { return sample_rate_hz_; }

  std::size_t observed_count() const;
  std::size_t missing_count() const { return size() - observed_count(); }
  bool fully_observed() const { return observed_count() == size(); }

  /// Values with missing positions replaced by zero.
  std::vector<double> zero_filled() const;

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  std::vector<double> timestamps_;
  double sample_rate_hz_;
};

/// Sorted beat onset indices with per-onset provenance.
struct BeatSequence {
  enum class Source : std::uint8_t { detected, imputed };

  std::vector<std::size_t> onsets;
  std::vector<Source> provenance;
  std::size_t recording_len = 0;

  BeatSequence() = default;
  BeatSequence(std::vector<std::size_t> onsets, std::size_t recording_len,
               Source source = Source::detected);
  BeatSequence(std::vector<std::size_t> onsets, std::vector<Source> provenance,
               std::size_t recording_len);

  std::size_t size() const { return onsets.size(); }
  bool empty() const { return onsets.empty(); }
  std::size_t imputed_count() const;
  /// Consecutive onset differences.
  std::vector<double> intervals() const;
};

}  // namespace pulsediff::core
