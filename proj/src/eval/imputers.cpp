#include "pulsediff/eval/imputers.hpp"

#include <string>
#include <utility>

#include "pulsediff/core/interpolate.hpp"
#include "pulsediff/diffusion/sampler.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/eval/metrics.hpp"

namespace pulsediff::eval {

std::vector<double> ZeroFillImputer::impute(const core::Recording& masked, const prior::SubjectTemplate&,
                                            std::uint64_t) const {
  return masked.zero_filled();
}

std::vector<double> LinearImputer::impute(const core::Recording& masked, const prior::SubjectTemplate&,
                                          std::uint64_t) const {
  return core::linear_interpolate(masked);
}

std::vector<double> TemplateImputer::impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                                            std::uint64_t seed) const {
  prior::PriorConfig cfg;
  cfg.loc_shift_M = 0;
  cfg.amp_shift_A = 0.0;
  cfg.k = 1;
  cfg.threshold_r = threshold_r_;
  const auto p = prior::build_prior(subject.tmpl, subject.beats, masked.size(), cfg, seed);
  return template_baseline_impute(masked, p);
}

DiffusionImputer::DiffusionImputer(std::string label, diffusion::DenoiserParams params,
                                   diffusion::NoiseSchedule sched, prior::PriorConfig prior_cfg,
                                   std::size_t n_samples)
    : label_(std::move(label)),
      params_(std::move(params)),
      sched_(std::move(sched)),
      prior_cfg_(prior_cfg),
      n_samples_(n_samples) {
  prior_cfg_.validate();
  if (params_.config.prior_mode == diffusion::PriorMode::input && prior_cfg_.k != params_.config.prior_channels)
    throw Error(Errc::invalid_argument, "prior k = " + std::to_string(prior_cfg_.k) + " but the model expects " +
                                            std::to_string(params_.config.prior_channels) + " prior channels");
}

std::vector<double> DiffusionImputer::impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                                             std::uint64_t seed) const {
  if (params_.config.prior_mode == diffusion::PriorMode::none) {
    auto r = diffusion::impute(masked, nullptr, params_, sched_, n_samples_, derive_seed(seed, "eval.sample"));
    return r.point_estimate;
  }
  const auto p = prior::build_prior(subject.tmpl, subject.beats, masked.size(), prior_cfg_,
                                    derive_seed(seed, "eval.prior"));
  auto r = diffusion::impute(masked, &p, params_, sched_, n_samples_, derive_seed(seed, "eval.sample"));
  return r.point_estimate;
}

}  // namespace pulsediff::eval
