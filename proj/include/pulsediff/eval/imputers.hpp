#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pulsediff/core/recording.hpp"
#include "pulsediff/diffusion/denoiser.hpp"
#include "pulsediff/diffusion/schedule.hpp"
#include "pulsediff/prior/extract.hpp"
#include "pulsediff/prior/pulse_prior.hpp"

namespace pulsediff::eval {

/// A method that fills the missing samples of a recording. The subject
/// template and its beats are computed once per recording and shared.
class Imputer {
 public:
  virtual ~Imputer() = default;
  virtual std::string label() const = 0;
  virtual std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                                     std::uint64_t seed) const = 0;
};

class ZeroFillImputer final : public Imputer {
 public:
  std::string label() const override { return "ZeroFill"; }
  std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                             std::uint64_t seed) const override;
};

class LinearImputer final : public Imputer {
 public:
  std::string label() const override { return "Linear"; }
  std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                             std::uint64_t seed) const override;
};

/// Missing samples set to the fixed pulse prior (rhythm score enabled).
class TemplateImputer final : public Imputer {
 public:
  explicit TemplateImputer(double threshold_r = 1.0) : threshold_r_(threshold_r) {}
  std::string label() const override { return "Template"; }
  std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                             std::uint64_t seed) const override;

 private:
  double threshold_r_;
};

/// Median of n_samples reverse-process draws of a trained denoiser, with the
/// prior rebuilt per recording from prior_cfg.
class DiffusionImputer final : public Imputer {
 public:
  DiffusionImputer(std::string label, diffusion::DenoiserParams params, diffusion::NoiseSchedule sched,
                   prior::PriorConfig prior_cfg, std::size_t n_samples);
  std::string label() const override { return label_; }
  std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate& subject,
                             std::uint64_t seed) const override;

 private:
  std::string label_;
  diffusion::DenoiserParams params_;
  diffusion::NoiseSchedule sched_;
  prior::PriorConfig prior_cfg_;
  std::size_t n_samples_;
};

}  // namespace pulsediff::eval
