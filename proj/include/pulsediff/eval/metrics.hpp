#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/prior/pulse_prior.hpp"

namespace pulsediff::eval {

/// Mean squared error over positions with mask = 0.
double masked_mse(std::span<const double> imputed, std::span<const double> truth, std::span<const std::uint8_t> mask);

/// Observed samples kept, missing samples taken from row 0 of a fixed
/// (M = 0, A = 0) prior.
std::vector<double> template_baseline_impute(const core::Recording& rec, const prior::PulsePrior& fixed);

struct BeatMatch {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// One-to-one matching within +-tol_samples. True beats are visited in
/// ascending order and each takes the earliest unmatched prediction inside
/// its window, which yields a maximum matching for equal-width windows.
BeatMatch match_beats(const core::BeatSequence& pred, const core::BeatSequence& truth, std::size_t tol_samples);

struct BeatScores {
  double f1 = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
};

/// Zero denominators give zero scores.
BeatScores beat_metrics(std::size_t tp, std::size_t fp, std::size_t fn);

/// Harmonic mean of precision and sensitivity, 0 when both are 0.
double f1_score(double precision, double sensitivity);

inline constexpr double kBeatToleranceS = 0.050;

}  // namespace pulsediff::eval
