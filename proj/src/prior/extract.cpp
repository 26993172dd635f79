#include "pulsediff/prior/extract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsediff/core/interpolate.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/prior/detect.hpp"
#include "pulsediff/stats.hpp"

namespace pulsediff::prior {

namespace {


// Column-wise median over ragged segments; a column no segment reaches is 0.
std::vector<double> ragged_median(const std::vector<std::vector<double>>& columns) {
  std::vector<double> out(columns.size(), 0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!columns[j].empty()) out[j] = stats::median(columns[j]);
  }
  return out;
}

}  // namespace

PulseTemplate build_external_template(std::span<const core::Recording> recordings) {
  if (recordings.empty()) throw Error(Errc::invalid_argument, "external template needs at least one recording");
  const double fs = recordings.front().sample_rate_hz();
  const auto offset = static_cast<std::size_t>(std::lround(kPreQrsOffsetS * fs));

  std::vector<std::span<const double>> segments;
  std::vector<double> lengths;
  for (const auto& rec : recordings) {
    if (!rec.fully_observed()) throw Error(Errc::invalid_argument, "external template recordings must be fully observed");
    if (rec.sample_rate_hz() != fs) throw Error(Errc::invalid_argument, "external template recordings differ in sample rate");
    const auto peaks = christov_detect(rec.values(), fs);
    std::vector<std::size_t> onsets;
    for (std::size_t p : peaks) {
      const std::size_t o = p > offset ? p - offset : 0;
      if (onsets.empty() || o > onsets.back()) onsets.push_back(o);
    }
    for (std::size_t i = 0; i < onsets.size(); ++i) {
      const std::size_t end = i + 1 < onsets.size() ? onsets[i + 1] : rec.size();
      segments.push_back(rec.values().subspan(onsets[i], end - onsets[i]));
      lengths.push_back(static_cast<double>(end - onsets[i]));
    }
  }
  if (segments.empty()) throw Error(Errc::degenerate, "no beats detected in the external template recordings");

  const auto width = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(stats::median(lengths))));
  std::vector<std::vector<double>> columns(width);
  for (const auto& seg : segments) {
    for (std::size_t j = 0; j < std::min(width, seg.size()); ++j) columns[j].push_back(seg[j]);
  }
  return PulseTemplate(ragged_median(columns), fs, offset);
}

PulseTemplate extract_template(std::span<const double> x_obl, std::span<const std::uint8_t> mask,
                               const core::BeatSequence& beats, double fs, std::size_t pre_peak_offset_samples) {
  if (beats.size() < 2) throw Error(Errc::degenerate, "template extraction needs at least 2 beats");
  if (x_obl.size() != mask.size()) throw Error(Errc::invalid_argument, "signal and mask differ in length");
  const auto gaps = beats.intervals();
  const auto width = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(stats::median(gaps))));
  const std::size_t n = x_obl.size();

  std::vector<std::vector<double>> columns(width);
  for (std::size_t onset : beats.onsets) {
    for (std::size_t j = 0; j < width && onset + j < n; ++j) {
      if (mask[onset + j]) columns[j].push_back(x_obl[onset + j]);
    }
  }
  return PulseTemplate(ragged_median(columns), fs, pre_peak_offset_samples);
}

SubjectTemplate two_pass_template(const core::Recording& rec, const PulseTemplate& ext) {
  const double fs = rec.sample_rate_hz();
  const auto x_obl = core::linear_interpolate(rec);

  auto first = matched_filter_detect(x_obl, ext, fs);
  if (first.size() < 2) return {ext, std::move(first), true};
  const auto intermediate = extract_template(x_obl, rec.mask(), first, fs, ext.pre_peak_offset_samples);

  auto second = matched_filter_detect(x_obl, intermediate, fs);
  if (second.size() < 2) return {ext, std::move(first), true};
  auto final_tmpl = extract_template(x_obl, rec.mask(), second, fs, ext.pre_peak_offset_samples);
  return {std::move(final_tmpl), std::move(second), false};
}

}  // namespace pulsediff::prior
