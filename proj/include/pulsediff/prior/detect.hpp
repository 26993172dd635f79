#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/prior/template.hpp"

namespace pulsediff::prior {

/// Christov's combined adaptive threshold QRS detector.
///
/// The signal is band-limited by two moving averages (20 ms, 28 ms), turned
/// into a slope envelope |y[i+1] - y[i-1]|, and smoothed again (40 ms). A beat
/// fires when the envelope exceeds M + F + R, where M is a steep-slope
/// threshold learned from recent QRS maxima, F follows high-frequency noise
/// and R lowers the threshold as the next beat becomes due. Each firing is
/// refined to the largest |x| within 100 ms, giving R-peak indices.
///
/// Throws when the signal is shorter than one second.
std::vector<std::size_t> christov_detect(std::span<const double> signal, double fs);

/// c(t) = sum_m x(t + m) h(m), with x zero-extended past its end. Output has
/// the length of the signal.
std::vector<double> cross_correlate(std::span<const double> signal, std::span<const double> kernel);

/// Matched-filter beat detection: correlation values at or above the 97th
/// percentile are accepted greedily in descending order (ties by lower
/// index) while staying at least 400 ms from every accepted beat.
core::BeatSequence matched_filter_detect(std::span<const double> signal, const PulseTemplate& tmpl,
                                         double fs);

inline constexpr double kDetectionPercentile = 97.0;
inline constexpr double kMinBeatSeparationS = 0.400;

}  // namespace pulsediff::prior
