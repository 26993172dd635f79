#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pulsediff/core/recording.hpp"

namespace pulsediff::core {

/// CSV with header `index,timestamp_s,value_mv,mask`. Values are written as
/// 32-bit floats, timestamps at full double precision.
std::string recording_to_csv(const Recording& rec);

/// The sample rate is inferred from timestamp spacing; single-row files need
/// an explicit rate.
Recording recording_from_csv(std::string_view text,
                             std::optional<double> sample_rate_hz = std::nullopt);

/// `PDR1` binary: 16-byte header, L f32 values, L u8 mask bytes.
std::string recording_to_binary(const Recording& rec);
Recording recording_from_binary(std::string_view bytes);

/// Dispatches on extension: `.bin` is binary, anything else CSV.
void save_recording(const Recording& rec, const std::filesystem::path& path);
Recording load_recording(const std::filesystem::path& path);

/// Beat list CSV with header `onset,source`.
std::string beats_to_csv(const BeatSequence& beats);
/// A leading `# recording_len=<L>` comment carries the recording length.
BeatSequence beats_from_csv(std::string_view text);

}  // namespace pulsediff::core
