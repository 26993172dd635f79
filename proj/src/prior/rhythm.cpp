#include "pulsediff/prior/rhythm.hpp"

#include <cmath>
#include <limits>

#include "pulsediff/error.hpp"
#include "pulsediff/stats.hpp"

namespace pulsediff::prior {

double rhythm_confidence(const core::BeatSequence& beats) {
  const auto gaps = beats.intervals();
  if (gaps.size() < 2) return std::numeric_limits<double>::infinity();
  return stats::population_stddev(gaps) / stats::median(gaps);
}

core::BeatSequence impute_beats(const core::BeatSequence& beats) {
  if (beats.size() < 3) throw Error(Errc::invalid_argument, "beat imputation needs at least 3 onsets");
  using Source = core::BeatSequence::Source;
  const auto gaps = beats.intervals();
  const auto d = static_cast<std::size_t>(stats::lower_median(gaps));
  const auto dd = static_cast<double>(d);
  const std::size_t len = beats.recording_len;

  std::vector<std::size_t> onsets;
  std::vector<Source> prov;
  for (std::size_t first = beats.onsets.front(); first >= d;) {
    first -= d;
    onsets.insert(onsets.begin(), first);
    prov.insert(prov.begin(), Source::imputed);
  }
  for (std::size_t i = 0; i < beats.size(); ++i) {
    onsets.push_back(beats.onsets[i]);
    prov.push_back(beats.provenance[i]);
    if (i + 1 == beats.size()) break;
    const auto g = static_cast<double>(beats.onsets[i + 1] - beats.onsets[i]);
    if (g <= 1.5 * dd) continue;
    const auto extra = static_cast<std::size_t>(std::floor(g / dd + 0.5)) - 1;
    for (std::size_t k = 1; k <= extra; ++k) {
      const double step = g * static_cast<double>(k) / static_cast<double>(extra + 1);
      onsets.push_back(beats.onsets[i] + static_cast<std::size_t>(std::lround(step)));
      prov.push_back(Source::imputed);
    }
  }
  while (onsets.back() + d < len) {
    onsets.push_back(onsets.back() + d);
    prov.push_back(Source::imputed);
  }
  return core::BeatSequence(std::move(onsets), std::move(prov), len);
}

}  // namespace pulsediff::prior
