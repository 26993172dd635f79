#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/prior/template.hpp"

namespace pulsediff::prior {

/// Onsets sit this far before the detected QRS peak so the P wave is included.
inline constexpr double kPreQrsOffsetS = 0.250;

/// Population template from fully observed recordings: Christov R peaks moved
/// back by 250 ms (clamped at 0), the signal split at those onsets, segments
/// truncated to the median segment length and averaged by elementwise median.
PulseTemplate build_external_template(std::span<const core::Recording> recordings);

/// Subject template: window length is the median inter-onset gap and every
/// offset takes the median over segments observed there. Offsets observed in
/// no segment are 0.
PulseTemplate extract_template(std::span<const double> x_obl, std::span<const std::uint8_t> mask,
                               const core::BeatSequence& beats, double fs,
                               std::size_t pre_peak_offset_samples = 0);

struct SubjectTemplate {
  PulseTemplate tmpl;
  core::BeatSequence beats;
  /// Set when detection collapsed and the external template was returned.
  bool degraded = false;
};

/// Two matched-filter passes: the first with the external template, the
/// second with the intermediate subject template it produces.
SubjectTemplate two_pass_template(const core::Recording& rec, const PulseTemplate& ext);

}  // namespace pulsediff::prior
