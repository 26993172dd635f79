#include "pulsediff/core/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pulsediff/error.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::core {

MissingKind parse_missing_kind(std::string_view name) {
  if (name == "transient") return MissingKind::transient;
  if (name == "extended") return MissingKind::extended;
  throw Error(Errc::invalid_argument, "unknown missingness kind '" + std::string(name) + "'");
}

std::string_view to_string(MissingKind kind) {
  return kind == MissingKind::transient ? "transient" : "extended";
}

void MissingnessSpec::validate() const {
  if (!(percentage >= 0.0 && percentage <= 1.0)) {
    throw Error(Errc::invalid_argument, "missingness percentage must lie in [0, 1]");
  }
  if (packet_len_samples < 1) throw Error(Errc::invalid_argument, "packet length must be >= 1");
}

std::size_t missing_sample_count(const MissingnessSpec& spec, std::size_t n) {
  // The small epsilon keeps products such as 0.3 * 1000 from flooring to 299.
  const auto raw = static_cast<std::size_t>(std::floor(spec.percentage * static_cast<double>(n) + 1e-9));
  const std::size_t total = std::min(raw, n);
  if (spec.kind == MissingKind::transient) {
    return total / spec.packet_len_samples * spec.packet_len_samples;
  }
  return total;
}

Recording apply_missingness(const Recording& rec, const MissingnessSpec& spec) {
  spec.validate();
  if (!rec.fully_observed()) {
    throw Error(Errc::invalid_argument, "recording already has missing samples");
  }
  const std::size_t n = rec.size();
  const std::size_t count = missing_sample_count(spec, n);
  std::vector<std::uint8_t> mask(n, 1);
  Rng rng(derive_seed(spec.seed, "missingness"));

  if (spec.kind == MissingKind::transient) {
    const std::size_t packet = spec.packet_len_samples;
    const std::size_t slots = n / packet;
    const std::size_t packets = count / packet;
    std::vector<std::size_t> grid(slots);
    std::iota(grid.begin(), grid.end(), 0);
    // Partial Fisher-Yates: the first `packets` entries are a uniform sample
    // without replacement.
    for (std::size_t i = 0; i < packets; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, slots - 1);
      std::swap(grid[i], grid[pick(rng)]);
      std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(grid[i] * packet), packet, 0);
    }
  } else if (count > 0) {
    std::uniform_int_distribution<std::size_t> start_dist(0, n - count);
    const std::size_t start = start_dist(rng);
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(start), count, 0);
  }
  return rec.with_mask(std::move(mask));
}

}  // namespace pulsediff::core
