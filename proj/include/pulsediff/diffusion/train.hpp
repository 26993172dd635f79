#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pulsediff/core/missingness.hpp"
#include "pulsediff/core/recording.hpp"
#include "pulsediff/diffusion/denoiser.hpp"
#include "pulsediff/diffusion/schedule.hpp"
#include "pulsediff/prior/pulse_prior.hpp"

namespace pulsediff::diffusion {

struct LrDecay {
  double at_fraction;  // of total epochs
  double factor;       // multiplies the base learning rate
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::vector<LrDecay> lr_decay{{0.75, 0.1}, {0.9, 0.01}};
  /// Applied to recordings that arrive fully observed.
  core::MissingnessSpec missingness{};
  /// Supervise only masked positions; false uses every sample.
  bool target_only_loss = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  double lr_at_epoch(std::size_t epoch) const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;
};

/// One supervised example: ground truth x0, its training mask and prior.
struct TrainingItem {
  std::span<const double> x0;
  std::span<const std::uint8_t> mask;
  std::span<const double> prior_rows;
  std::size_t prior_k = 0;
  std::uint64_t seed = 0;
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
  std::size_t used_items = 0;
};

/// Builds the network inputs for one item: the x_t channel is zeroed where
/// the mask is observed and x_obs is zeroed where it is missing.
Conditioning item_conditioning(const TrainingItem& item, std::vector<double>& x_obs_storage);

/// Per item: t ~ U{1..T}, eps ~ N(0, I), x_t from the closed-form forward
/// process, squared error between eps and the estimate averaged over target
/// positions (or all positions). Items without targets are skipped; the
/// batch mean is returned.
double training_loss(const DenoiserParams& params, const NoiseSchedule& sched, std::span<const TrainingItem> batch,
                     bool target_only = true);

LossGrad training_loss_and_grad(const DenoiserParams& params, const NoiseSchedule& sched,
                                std::span<const TrainingItem> batch, bool target_only = true);

struct LossRecord {
  std::size_t step;
  std::size_t epoch;
  double loss;
  double lr;
};

struct TrainResult {
  DenoiserParams params;
  AdamState adam;
  std::vector<LossRecord> trace;
  /// Set when a non-finite loss stopped training; params hold the last
  /// finite state.
  bool diverged = false;
};

/// Adam over shuffled mini-batches with step decays at epoch boundaries.
/// priors[i] belongs to dataset[i]; priors may be empty for prior_mode=none.
TrainResult train(std::span<const core::Recording> dataset, std::span<const prior::PulsePrior> priors,
                  const DenoiserConfig& model_cfg, const TrainConfig& cfg, const NoiseSchedule& sched);

/// Adam update with bias correction.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, double lr, double beta1,
               double beta2, double eps);

/// CSV `step,epoch,loss,lr`.
std::string loss_trace_to_csv(std::span<const LossRecord> trace);

}  // namespace pulsediff::diffusion
