#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pulsediff::prior {

/// A median beat waveform. pre_peak_offset_samples is the distance from the
/// first sample to the nominal QRS peak.
struct PulseTemplate {
  std::vector<double> waveform;
  double sample_rate_hz = 0.0;
  std::size_t pre_peak_offset_samples = 0;

  PulseTemplate() = default;
  PulseTemplate(std::vector<double> waveform, double sample_rate_hz, std::size_t pre_peak_offset_samples);

  std::size_t size() const { return waveform.size(); }
};

/// `# fs=<hz> pre_peak=<samples>` comment, then `offset,value_mv` rows.
std::string template_to_csv(const PulseTemplate& t);
PulseTemplate template_from_csv(std::string_view text);
void save_template(const PulseTemplate& t, const std::filesystem::path& path);
PulseTemplate load_template(const std::filesystem::path& path);

}  // namespace pulsediff::prior
