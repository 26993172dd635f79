#pragma once

#include "pulsediff/core/recording.hpp"

namespace pulsediff::prior {

/// Population standard deviation of the inter-beat intervals over their
/// median. Fewer than two intervals gives +infinity.
double rhythm_confidence(const core::BeatSequence& beats);

/// Fills gaps longer than 1.5 d (d = lower median interval) with
/// round(g / d) - 1 evenly spaced onsets, then extends at spacing d towards
/// both recording edges. Inserted onsets are flagged imputed.
core::BeatSequence impute_beats(const core::BeatSequence& beats);

}  // namespace pulsediff::prior
