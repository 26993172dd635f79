#include "pulsediff/core/recording_io.hpp"

#include <cmath>
#include <string>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"

namespace pulsediff::core {

namespace {

constexpr std::string_view kCsvHeader = "index,timestamp_s,value_mv,mask";
constexpr std::string_view kBinaryMagic = "PDR1";

Error row_error(std::size_t line, const std::string& what) {
  return Error(Errc::parse, "row " + std::to_string(line) + ": " + what);
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

double infer_sample_rate(const std::vector<double>& ts) {
  const double span = ts.back() - ts.front();
  if (!(span > 0.0)) throw Error(Errc::parse, "timestamps do not increase");
  const double fs = static_cast<double>(ts.size() - 1) / span;
  const double rounded = std::round(fs);
  return std::abs(fs - rounded) < 1e-6 * fs ? rounded : fs;
}

}  // namespace

std::string recording_to_csv(const Recording& rec) {
  std::string out(kCsvHeader);
  out += '\n';
  const auto values = rec.values();
  const auto mask = rec.mask();
  const auto ts = rec.timestamps();
  for (std::size_t i = 0; i < rec.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += io::format_double(ts[i]);
    out += ',';
    out += io::format_float(static_cast<float>(values[i]));
    out += ',';
    out += mask[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

Recording recording_from_csv(std::string_view text, std::optional<double> sample_rate_hz) {
  auto lines = io::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || strip_cr(lines[0]) != kCsvHeader) {
    throw row_error(1, "expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<double> values, ts;
  std::vector<std::uint8_t> mask;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const auto fields = io::split(strip_cr(lines[li]), ',');
    if (fields.size() != 4) throw row_error(line_no, "expected 4 fields");
    try {
      if (io::parse_int(fields[0]) != static_cast<long long>(li - 1)) {
        throw row_error(line_no, "index out of sequence");
      }
      ts.push_back(io::parse_double(fields[1]));
      values.push_back(static_cast<float>(io::parse_double(fields[2])));
      const long long m = io::parse_int(fields[3]);
      if (m != 0 && m != 1) throw row_error(line_no, "mask value " + std::to_string(m) + " is not binary");
      mask.push_back(static_cast<std::uint8_t>(m));
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("row ")) throw;
      throw row_error(line_no, e.what());
    }
  }
  if (values.empty()) throw Error(Errc::parse, "recording has no rows");

  double fs = 0.0;
  if (sample_rate_hz) {
    fs = *sample_rate_hz;
  } else if (ts.size() >= 2) {
    fs = infer_sample_rate(ts);
  } else {
    throw Error(Errc::parse, "cannot infer the sample rate from a single row");
  }
  const double dt = 1.0 / fs;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (std::abs(ts[i] - (ts[0] + static_cast<double>(i) * dt)) > 1e-4 * dt) {
      throw row_error(i + 2, "timestamp breaks uniform spacing");
    }
  }
  return Recording(std::move(values), std::move(mask), std::move(ts), fs);
}

std::string recording_to_binary(const Recording& rec) {
  io::ByteWriter w;
  w.put_bytes(kBinaryMagic);
  w.put_u32(static_cast<std::uint32_t>(rec.size()));
  w.put_f32(static_cast<float>(rec.sample_rate_hz()));
  w.put_u32(0);
  for (double v : rec.values()) w.put_f32(static_cast<float>(v));
  for (std::uint8_t m : rec.mask()) w.put_u8(m);
  return w.bytes();
}

Recording recording_from_binary(std::string_view bytes) {
  io::ByteReader r{std::string(bytes)};
  if (r.get_bytes(4) != kBinaryMagic) throw Error(Errc::parse, "bad recording magic");
  const std::uint32_t n = r.get_u32();
  const double fs = r.get_f32();
  r.get_u32();
  if (r.remaining() != static_cast<std::size_t>(n) * 5) throw Error(Errc::parse, "recording payload size mismatch");
  std::vector<double> values(n);
  for (auto& v : values) v = r.get_f32();
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = r.get_u8();
    if (mask[i] > 1) throw Error(Errc::parse, "mask byte " + std::to_string(i) + " is not binary");
  }
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / fs;
  return Recording(std::move(values), std::move(mask), std::move(ts), fs);
}

void save_recording(const Recording& rec, const std::filesystem::path& path) {
  io::write_file_atomic(path, path.extension() == ".bin" ? recording_to_binary(rec) : recording_to_csv(rec));
}

Recording load_recording(const std::filesystem::path& path) {
  const std::string contents = io::read_file(path);
  try {
    if (path.extension() == ".bin") return recording_from_binary(contents);
    return recording_from_csv(contents);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string beats_to_csv(const BeatSequence& beats) {
  std::string out = "# recording_len=" + std::to_string(beats.recording_len) + "\nonset,source\n";
  for (std::size_t i = 0; i < beats.size(); ++i) {
    out += std::to_string(beats.onsets[i]);
    out += beats.provenance[i] == BeatSequence::Source::imputed ? ",imputed\n" : ",detected\n";
  }
  return out;
}

BeatSequence beats_from_csv(std::string_view text) {
  auto lines = io::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  constexpr std::string_view kLenPrefix = "# recording_len=";
  if (lines.size() < 2 || !strip_cr(lines[0]).starts_with(kLenPrefix) || strip_cr(lines[1]) != "onset,source") {
    throw Error(Errc::parse, "malformed beat file header");
  }
  const auto len = static_cast<std::size_t>(io::parse_int(strip_cr(lines[0]).substr(kLenPrefix.size())));
  std::vector<std::size_t> onsets;
  std::vector<BeatSequence::Source> prov;
  for (std::size_t li = 2; li < lines.size(); ++li) {
    const auto fields = io::split(strip_cr(lines[li]), ',');
    if (fields.size() != 2) throw row_error(li + 1, "expected 2 fields");
    const long long onset = io::parse_int(fields[0]);
    if (onset < 0) throw row_error(li + 1, "negative onset");
    onsets.push_back(static_cast<std::size_t>(onset));
    if (fields[1] == "detected") {
      prov.push_back(BeatSequence::Source::detected);
    } else if (fields[1] == "imputed") {
      prov.push_back(BeatSequence::Source::imputed);
    } else {
      throw row_error(li + 1, "unknown beat source '" + std::string(fields[1]) + "'");
    }
  }
  return BeatSequence(std::move(onsets), std::move(prov), len);
}

}  // namespace pulsediff::core
