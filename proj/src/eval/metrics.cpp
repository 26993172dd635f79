#include "pulsediff/eval/metrics.hpp"

#include <string>

#include "pulsediff/error.hpp"

namespace pulsediff::eval {

double masked_mse(std::span<const double> imputed, std::span<const double> truth, std::span<const std::uint8_t> mask) {
  if (imputed.size() != truth.size() || truth.size() != mask.size())
    throw Error(Errc::invalid_argument, "masked_mse: length mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) continue;
    const double d = imputed[i] - truth[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw Error(Errc::invalid_argument, "masked_mse: no missing positions to score");
  return sum / static_cast<double>(n);
}

std::vector<double> template_baseline_impute(const core::Recording& rec, const prior::PulsePrior& fixed) {
  if (fixed.k == 0) throw Error(Errc::invalid_argument, "template baseline needs at least one prior row");
  if (fixed.length != rec.size())
    throw Error(Errc::invalid_argument, "template baseline: prior length " + std::to_string(fixed.length) +
                                            " does not match recording length " + std::to_string(rec.size()));
  if (fixed.loc_shift_M != 0 || fixed.amp_shift_A != 0.0)
    throw Error(Errc::invalid_argument, "template baseline needs a fixed prior (M = 0, A = 0)");
  const auto row = fixed.row(0);
  const auto values = rec.values();
  const auto mask = rec.mask();
  std::vector<double> out(rec.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? values[i] : row[i];
  return out;
}

BeatMatch match_beats(const core::BeatSequence& pred, const core::BeatSequence& truth, std::size_t tol_samples) {
  BeatMatch m;
  const auto& p = pred.onsets;
  std::vector<bool> used(p.size(), false);
  // Predictions left of the current window can never match a later truth,
  // so the scan start only moves forward.
  std::size_t first = 0;
  for (std::size_t t : truth.onsets) {
    const std::size_t lo = t >= tol_samples ? t - tol_samples : 0;
    const std::size_t hi = t + tol_samples;
    while (first < p.size() && p[first] < lo) ++first;
    for (std::size_t j = first; j < p.size() && p[j] <= hi; ++j) {
      if (!used[j]) {
        used[j] = true;
        ++m.tp;
        break;
      }
    }
  }
  m.fp = p.size() - m.tp;
  m.fn = truth.size() - m.tp;
  return m;
}

double f1_score(double precision, double sensitivity) {
  const double den = precision + sensitivity;
  return den > 0.0 ? 2.0 * precision * sensitivity / den : 0.0;
}

BeatScores beat_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  BeatScores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = f1_score(s.precision, s.sensitivity);
  return s;
}

}  // namespace pulsediff::eval
