#include "pulsediff/core/recording.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsediff/error.hpp"

namespace pulsediff::core {

namespace {

void check_timestamps(std::span<const double> ts, double fs) {
  const double dt = 1.0 / fs;
  const double tol = 1e-4 * dt;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double expected = ts[0] + static_cast<double>(i) * dt;
    if (!std::isfinite(ts[i]) || std::abs(ts[i] - expected) > tol) {
      throw Error(Errc::invalid_argument,
                  "timestamps not uniform at sample " + std::to_string(i));
    }
  }
}

}  // namespace

Recording::Recording(std::vector<double> values, std::vector<std::uint8_t> mask,
                     std::vector<double> timestamps, double sample_rate_hz)
    : values_(std::move(values)),
      mask_(std::move(mask)),
      timestamps_(std::move(timestamps)),
      sample_rate_hz_(sample_rate_hz) {
  if (values_.empty()) throw Error(Errc::invalid_argument, "recording must have at least one sample");
  if (mask_.size() != values_.size() || timestamps_.size() != values_.size()) {
    throw Error(Errc::invalid_argument, "values, mask and timestamps differ in length");
  }
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(Errc::invalid_argument, "sample rate must be positive");
  }
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] > 1) throw Error(Errc::invalid_argument, "mask is not binary at sample " + std::to_string(i));
  }
  check_timestamps(timestamps_, sample_rate_hz_);
}

Recording Recording::fully_observed(std::vector<double> values, double sample_rate_hz,
                                    double start_time_s) {
  std::vector<double> ts(values.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ts[i] = start_time_s + static_cast<double>(i) / sample_rate_hz;
  }
  std::vector<std::uint8_t> mask(values.size(), 1);
  return Recording(std::move(values), std::move(mask), std::move(ts), sample_rate_hz);
}

Recording Recording::with_mask(std::vector<std::uint8_t> mask) const {
  return Recording(values_, std::move(mask), timestamps_, sample_rate_hz_);
}

Recording Recording::with_values(std::vector<double> values) const {
  return Recording(std::move(values), mask_, timestamps_, sample_rate_hz_);
}

std::size_t Recording::observed_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::vector<double> Recording::zero_filled() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask_[i] ? values_[i] : 0.0;
  return out;
}

BeatSequence::BeatSequence(std::vector<std::size_t> onsets_in, std::size_t len, Source source)
    : BeatSequence(onsets_in, std::vector<Source>(onsets_in.size(), source), len) {}

BeatSequence::BeatSequence(std::vector<std::size_t> onsets_in, std::vector<Source> prov,
                           std::size_t len)
    : onsets(std::move(onsets_in)), provenance(std::move(prov)), recording_len(len) {
  if (provenance.size() != onsets.size()) {
    throw Error(Errc::invalid_argument, "beat provenance length mismatch");
  }
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    if (onsets[i] >= recording_len) throw Error(Errc::invalid_argument, "beat onset outside recording");
    if (i > 0 && onsets[i] <= onsets[i - 1]) {
      throw Error(Errc::invalid_argument, "beat onsets not strictly increasing");
    }
  }
}

std::size_t BeatSequence::imputed_count() const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), Source::imputed));
}

std::vector<double> BeatSequence::intervals() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < onsets.size(); ++i) {
    out.push_back(static_cast<double>(onsets[i] - onsets[i - 1]));
  }
  return out;
}

}  // namespace pulsediff::core
