#include "pulsediff/diffusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/parallel.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::diffusion {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(Errc::invalid_argument, "learning_rate must be positive");
  if (batch_size < 1) throw Error(Errc::invalid_argument, "batch_size must be >= 1");
  for (const auto& d : lr_decay) {
    if (!(d.at_fraction >= 0.0 && d.at_fraction <= 1.0) || !(d.factor > 0.0)) {
      throw Error(Errc::invalid_argument, "lr decay points need a fraction in [0, 1] and a positive factor");
    }
  }
  missingness.validate();
}

double TrainConfig::lr_at_epoch(std::size_t epoch) const {
  double factor = 1.0;
  double reached = -1.0;
  for (const auto& d : lr_decay) {
    if (static_cast<double>(epoch) >= d.at_fraction * static_cast<double>(epochs) && d.at_fraction > reached) {
      factor = d.factor;
      reached = d.at_fraction;
    }
  }
  return learning_rate * factor;
}

Conditioning item_conditioning(const TrainingItem& item, std::vector<double>& x_obs_storage) {
  x_obs_storage.resize(item.x0.size());
  for (std::size_t i = 0; i < item.x0.size(); ++i) x_obs_storage[i] = item.mask[i] ? item.x0[i] : 0.0;
  return Conditioning{x_obs_storage, item.mask, item.prior_rows, item.prior_k};
}

namespace {

struct ItemResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
  bool used = false;
};

ItemResult item_loss(const DenoiserParams& params, const NoiseSchedule& sched, const TrainingItem& item,
                     bool target_only, bool with_grad) {
  const std::size_t n = item.x0.size();
  if (item.mask.size() != n) throw Error(Errc::invalid_argument, "training mask length mismatch");
  std::size_t targets = 0;
  for (std::uint8_t m : item.mask) targets += m ? 0 : 1;
  const std::size_t supervised = target_only ? targets : n;
  ItemResult res;
  if (supervised == 0) return res;

  Rng rng = make_rng(item.seed, "train.item");
  std::uniform_int_distribution<std::size_t> step_dist(1, sched.steps);
  const std::size_t t = step_dist(rng);
  std::normal_distribution<double> normal;
  std::vector<double> eps(n);
  for (double& e : eps) e = normal(rng);

  std::vector<double> x_t = forward_sample(item.x0, t, eps, sched);
  for (std::size_t i = 0; i < n; ++i) {
    if (item.mask[i]) x_t[i] = 0.0;
  }
  std::vector<double> x_obs;
  const Conditioning cond = item_conditioning(item, x_obs);
  const double norm = 1.0 / static_cast<double>(supervised);
  auto supervises = [&](std::size_t i) { return !target_only || !item.mask[i]; };

  auto loss_of = [&](std::span<const double> out) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (supervises(i)) acc += (out[i] - eps[i]) * (out[i] - eps[i]);
    }
    return acc * norm;
  };

  res.used = true;
  if (!with_grad) {
    res.loss = loss_of(denoiser_forward(params, x_t, t, cond));
    return res;
  }
  auto fg = denoiser_forward_backward(params, x_t, t, cond, [&](std::span<const double> out) {
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (supervises(i)) g[i] = 2.0 * (out[i] - eps[i]) * norm;
    }
    return g;
  });
  res.loss = loss_of(fg.output);
  res.grad = std::move(fg.grad);
  return res;
}

LossGrad batch_loss(const DenoiserParams& params, const NoiseSchedule& sched, std::span<const TrainingItem> batch,
                    bool target_only, bool with_grad) {
  std::vector<ItemResult> results(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    results[i] = item_loss(params, sched, batch[i], target_only, with_grad);
  });
  LossGrad out;
  if (with_grad) out.grad = Eigen::VectorXd::Zero(params.theta.size());
  for (const auto& r : results) {
    if (!r.used) continue;
    out.loss += r.loss;
    if (with_grad) out.grad += r.grad;
    ++out.used_items;
  }
  if (out.used_items > 0) {
    const double inv = 1.0 / static_cast<double>(out.used_items);
    out.loss *= inv;
    if (with_grad) out.grad *= inv;
  }
  return out;
}

}  // namespace

double training_loss(const DenoiserParams& params, const NoiseSchedule& sched, std::span<const TrainingItem> batch,
                     bool target_only) {
  return batch_loss(params, sched, batch, target_only, false).loss;
}

LossGrad training_loss_and_grad(const DenoiserParams& params, const NoiseSchedule& sched,
                                std::span<const TrainingItem> batch, bool target_only) {
  return batch_loss(params, sched, batch, target_only, true);
}

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
  if (state.m.size() != theta.size()) state.m = Eigen::VectorXd::Zero(theta.size());
  if (state.v.size() != theta.size()) state.v = Eigen::VectorXd::Zero(theta.size());
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  theta.array() -= lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

TrainResult train(std::span<const core::Recording> dataset, std::span<const prior::PulsePrior> priors,
                  const DenoiserConfig& model_cfg, const TrainConfig& cfg, const NoiseSchedule& sched) {
  cfg.validate();
  model_cfg.validate();
  if (dataset.empty()) throw Error(Errc::invalid_argument, "training set is empty");
  const bool with_prior = model_cfg.prior_mode == PriorMode::input;
  if (with_prior && priors.size() != dataset.size()) {
    throw Error(Errc::invalid_argument, "one prior per training recording required");
  }

  // Recordings without missing samples get a fixed self-supervised mask.
  std::vector<std::vector<std::uint8_t>> masks(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& rec = dataset[i];
    if (with_prior && (priors[i].length != rec.size() || priors[i].k != model_cfg.prior_channels)) {
      throw Error(Errc::invalid_argument, "prior " + std::to_string(i) + " does not match its recording or the model");
    }
    if (rec.fully_observed()) {
      core::MissingnessSpec spec = cfg.missingness;
      spec.seed = derive_seed(cfg.seed, "train.mask", {i});
      const auto masked = core::apply_missingness(rec, spec);
      masks[i].assign(masked.mask().begin(), masked.mask().end());
    } else {
      masks[i].assign(rec.mask().begin(), rec.mask().end());
    }
  }

  TrainResult result{init_params(model_cfg, derive_seed(cfg.seed, "train.init")), {}, {}, false};
  result.adam.m = Eigen::VectorXd::Zero(result.params.theta.size());
  result.adam.v = Eigen::VectorXd::Zero(result.params.theta.size());

  std::vector<std::size_t> order(dataset.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(cfg.seed, "train.shuffle", {epoch});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = cfg.lr_at_epoch(epoch);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<TrainingItem> batch;
      for (std::size_t pos = start; pos < end; ++pos) {
        const std::size_t idx = order[pos];
        TrainingItem item;
        item.x0 = dataset[idx].values();
        item.mask = masks[idx];
        if (with_prior) {
          item.prior_rows = priors[idx].rows;
          item.prior_k = priors[idx].k;
        }
        item.seed = derive_seed(cfg.seed, "train.noise", {epoch, idx});
        batch.push_back(item);
      }
      auto lg = training_loss_and_grad(result.params, sched, batch, cfg.target_only_loss);
      if (lg.used_items == 0) continue;
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
        result.diverged = true;
        return result;
      }
      Eigen::VectorXd theta = result.params.theta;
      AdamState adam = result.adam;
      adam_step(theta, lg.grad, adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
      if (!theta.allFinite()) {
        result.diverged = true;
        return result;
      }
      result.params.theta = std::move(theta);
      result.adam = std::move(adam);
      result.trace.push_back({step, epoch, lg.loss, lr});
      ++step;
    }
  }
  return result;
}

std::string loss_trace_to_csv(std::span<const LossRecord> trace) {
  std::string out = "step,epoch,loss,lr\n";
  for (const auto& r : trace) {
    out += std::to_string(r.step) + ',' + std::to_string(r.epoch) + ',' + io::format_double(r.loss) + ',' +
           io::format_double(r.lr) + '\n';
  }
  return out;
}

}  // namespace pulsediff::diffusion
