#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pulsediff/core/missingness.hpp"
#include "pulsediff/core/recording.hpp"
#include "pulsediff/eval/imputers.hpp"
#include "pulsediff/prior/template.hpp"

namespace pulsediff::eval {

struct RecordingRow {
  std::size_t index = 0;
  double mse = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::string error;  // non-empty when the model failed on this recording
};

/// Unweighted means over the successful recordings; f1 is recomputed from
/// the mean precision and sensitivity.
struct EvalReport {
  std::string model;
  core::MissingKind kind = core::MissingKind::transient;
  double pct = 0.0;
  double mse = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
  std::size_t n_recordings = 0;
  std::vector<RecordingRow> rows;
  std::string error;
};

EvalReport aggregate(std::string model, core::MissingKind kind, double pct, std::vector<RecordingRow> rows);

/// Scores one imputed signal against ground truth values and beats. Beats
/// are detected with the matched filter and the subject template.
RecordingRow score_recording(std::size_t index, std::span<const double> imputed, const core::Recording& masked,
                             const core::BeatSequence& truth, const prior::PulseTemplate& subject_template);

struct SweepConfig {
  std::vector<core::MissingKind> kinds{core::MissingKind::transient, core::MissingKind::extended};
  std::vector<double> percentages{0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t packet_len_samples = 5;
  std::uint64_t seed = 0;
};

/// For every (kind, percentage): masks each recording deterministically,
/// extracts the subject template, imputes with every model and scores the
/// result. Rows are ordered kind, percentage, model. truths may be empty, in
/// which case beats detected on the clean recording serve as ground truth.
std::vector<EvalReport> run_sweep(std::span<const Imputer* const> models, std::span<const core::Recording> dataset,
                                  std::span<const core::BeatSequence> truths, const prior::PulseTemplate& external,
                                  const SweepConfig& cfg);

/// `model,kind,pct,mse,f1,precision,sensitivity,n_recordings`.
std::string reports_to_csv(std::span<const EvalReport> reports);

/// One row per percentage, one column per model, for a metric
/// (mse, f1, precision or sensitivity) and missingness kind.
std::string plot_csv(std::span<const EvalReport> reports, std::string_view metric, core::MissingKind kind);

/// Static line chart of the same series.
std::string plot_svg(std::span<const EvalReport> reports, std::string_view metric, core::MissingKind kind);

}  // namespace pulsediff::eval
