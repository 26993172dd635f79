#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "pulsediff/core/recording.hpp"

namespace pulsediff::core {

enum class MissingKind { transient, extended };

MissingKind parse_missing_kind(std::string_view name);
std::string_view to_string(MissingKind kind);

struct MissingnessSpec {
  MissingKind kind = MissingKind::transient;
  double percentage = 0.3;
  std::size_t packet_len_samples = 5;  // 50 ms at 100 Hz
  std::uint64_t seed = 0;

  void validate() const;
};

/// Number of samples apply_missingness removes from a length-n recording.
std::size_t missing_sample_count(const MissingnessSpec& spec, std::size_t n);

/// Masks out floor(percentage * L) samples of a fully observed recording.
/// Transient: packets of packet_len_samples drawn without replacement from a
/// packet-aligned grid (count rounded down to whole packets). Extended: one
/// contiguous block at a uniformly random start.
Recording apply_missingness(const Recording& rec, const MissingnessSpec& spec);

}  // namespace pulsediff::core
