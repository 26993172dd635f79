#include "pulsediff/prior/template.hpp"

#include <cmath>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"

namespace pulsediff::prior {

PulseTemplate::PulseTemplate(std::vector<double> wf, double fs, std::size_t pre_peak)
    : waveform(std::move(wf)), sample_rate_hz(fs), pre_peak_offset_samples(pre_peak) {
  if (waveform.size() < 2) throw Error(Errc::invalid_argument, "template needs at least 2 samples");
  for (double v : waveform) {
    if (!std::isfinite(v)) throw Error(Errc::invalid_argument, "template contains non-finite values");
  }
  if (!(sample_rate_hz > 0.0)) throw Error(Errc::invalid_argument, "template sample rate must be positive");
}

std::string template_to_csv(const PulseTemplate& t) {
  std::string out = "# fs=" + io::format_double(t.sample_rate_hz) +
                    " pre_peak=" + std::to_string(t.pre_peak_offset_samples) + "\noffset,value_mv\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += std::to_string(i) + ',' + io::format_double(t.waveform[i]) + '\n';
  }
  return out;
}

PulseTemplate template_from_csv(std::string_view text) {
  auto lines = io::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2) throw Error(Errc::parse, "template file too short");
  const std::string_view meta = lines[0];
  const auto fs_pos = meta.find("fs=");
  const auto pre_pos = meta.find(" pre_peak=");
  if (!meta.starts_with("# ") || fs_pos == std::string_view::npos || pre_pos == std::string_view::npos ||
      pre_pos < fs_pos) {
    throw Error(Errc::parse, "template comment must read '# fs=<hz> pre_peak=<samples>'");
  }
  const double fs = io::parse_double(meta.substr(fs_pos + 3, pre_pos - fs_pos - 3));
  const long long pre = io::parse_int(meta.substr(pre_pos + 10));
  if (pre < 0) throw Error(Errc::parse, "negative pre_peak offset");
  if (lines[1] != "offset,value_mv") throw Error(Errc::parse, "expected header 'offset,value_mv'");
  std::vector<double> wf;
  for (std::size_t li = 2; li < lines.size(); ++li) {
    const auto fields = io::split(lines[li], ',');
    if (fields.size() != 2 || io::parse_int(fields[0]) != static_cast<long long>(li - 2)) {
      throw Error(Errc::parse, "row " + std::to_string(li + 1) + ": malformed template row");
    }
    wf.push_back(io::parse_double(fields[1]));
  }
  return PulseTemplate(std::move(wf), fs, static_cast<std::size_t>(pre));
}

void save_template(const PulseTemplate& t, const std::filesystem::path& path) {
  io::write_file_atomic(path, template_to_csv(t));
}

PulseTemplate load_template(const std::filesystem::path& path) {
  try {
    return template_from_csv(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace pulsediff::prior
