#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pulsediff/rng.hpp"

namespace pulsediff::diffusion {

enum class ScheduleKind { quadratic, linear };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// beta_1..beta_T with alpha_t = 1 - beta_t and alpha_bar_t the running
/// product. Vectors are indexed from 0, so beta(t) reads betas[t - 1].
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::quadratic;
  std::size_t steps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  double beta(std::size_t t) const { return betas[t - 1]; }
  double alpha(std::size_t t) const { return alphas[t - 1]; }
  /// alpha_bar(0) is 1 by convention.
  double alpha_bar(std::size_t t) const { return t == 0 ? 1.0 : alpha_bars[t - 1]; }
};

/// linear: beta_t = b1 + (t-1)/(T-1) (bT - b1).
/// quadratic: interpolates linearly in sqrt(beta) and squares.
NoiseSchedule make_schedule(ScheduleKind kind, std::size_t steps, double beta_start, double beta_end);

/// Quadratic, T = 50, 1e-4 to 0.5.
NoiseSchedule csdi_schedule();
/// Linear, T = 200, 1e-4 to 0.02.
NoiseSchedule sssd_schedule();
/// Resolves "csdi" or "sssd".
NoiseSchedule schedule_preset(std::string_view name);

/// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
std::vector<double> forward_sample(std::span<const double> x0, std::size_t t, std::span<const double> eps,
                                   const NoiseSchedule& sched);

/// Posterior variance ((1 - alpha_bar_{t-1}) / (1 - alpha_bar_t)) beta_t.
double posterior_variance(const NoiseSchedule& sched, std::size_t t);

/// One ancestral step: mean (x_t - beta_t / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t)
/// plus sigma_t z. The final step (t = 1) returns the mean and ignores z.
std::vector<double> reverse_step(std::span<const double> x_t, std::size_t t, std::span<const double> eps_hat,
                                 const NoiseSchedule& sched, std::span<const double> z);

/// Same step with z drawn from rng.
std::vector<double> reverse_step(std::span<const double> x_t, std::size_t t, std::span<const double> eps_hat,
                                 const NoiseSchedule& sched, Rng& rng);

}  // namespace pulsediff::diffusion
