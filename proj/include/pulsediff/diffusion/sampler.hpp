#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/diffusion/denoiser.hpp"
#include "pulsediff/diffusion/schedule.hpp"
#include "pulsediff/prior/pulse_prior.hpp"

namespace pulsediff::diffusion {

inline constexpr double kDefaultQuantileValues[] = {0.05, 0.95};
inline constexpr std::span<const double> kDefaultQuantiles{kDefaultQuantileValues};

struct ImputationResult {
  enum class Status { ok, nothing_missing };

  Status status = Status::ok;
  std::size_t n_samples = 0;
  std::size_t length = 0;
  std::vector<double> samples;          // n_samples x length, row-major
  std::vector<double> point_estimate;   // median across draws
  std::vector<double> quantile_levels;
  std::vector<double> quantile_bands;   // levels x length, row-major

  std::span<const double> sample(std::size_t i) const { return {samples.data() + i * length, length}; }
  std::span<const double> band(std::size_t i) const { return {quantile_bands.data() + i * length, length}; }
};

/// Ancestral sampling from x_T ~ N(0, I) with the denoiser conditioned on the
/// observed values, the mask and the prior rows. Observed positions of every
/// draw are reset to the recorded values afterwards. A recording without
/// missing samples is returned unchanged with status nothing_missing.
ImputationResult impute(const core::Recording& rec, const prior::PulsePrior* prior, const DenoiserParams& params,
                        const NoiseSchedule& sched, std::size_t n_samples, std::uint64_t seed,
                        std::span<const double> quantile_levels = kDefaultQuantiles);

}  // namespace pulsediff::diffusion
