#include "pulsediff/diffusion/sampler.hpp"

#include <string>

#include "pulsediff/error.hpp"
#include "pulsediff/parallel.hpp"
#include "pulsediff/rng.hpp"
#include "pulsediff/stats.hpp"

namespace pulsediff::diffusion {

ImputationResult impute(const core::Recording& rec, const prior::PulsePrior* prior, const DenoiserParams& params,
                        const NoiseSchedule& sched, std::size_t n_samples, std::uint64_t seed,
                        std::span<const double> quantile_levels) {
  const std::size_t n = rec.size();
  const auto values = rec.values();
  const auto mask = rec.mask();
  ImputationResult res;
  res.length = n;
  res.quantile_levels.assign(quantile_levels.begin(), quantile_levels.end());

  if (rec.fully_observed()) {
    res.status = ImputationResult::Status::nothing_missing;
    res.n_samples = 1;
    res.samples.assign(values.begin(), values.end());
    res.point_estimate.assign(values.begin(), values.end());
    for (std::size_t q = 0; q < res.quantile_levels.size(); ++q) {
      res.quantile_bands.insert(res.quantile_bands.end(), values.begin(), values.end());
    }
    return res;
  }
  if (n_samples < 1) throw Error(Errc::invalid_argument, "need at least one imputation draw");

  Conditioning cond;
  const std::vector<double> x_obs = rec.zero_filled();
  cond.x_obs = x_obs;
  cond.mask = mask;
  if (params.config.prior_mode == PriorMode::input) {
    if (prior == nullptr) throw Error(Errc::invalid_argument, "model expects a prior but none was given");
    if (prior->k != params.config.prior_channels || prior->length != n) {
      throw Error(Errc::invalid_argument, "prior shape " + std::to_string(prior->k) + "x" +
                                              std::to_string(prior->length) + " does not match the model");
    }
    cond.prior_rows = prior->rows;
    cond.prior_k = prior->k;
  }

  res.n_samples = n_samples;
  res.samples.assign(n_samples * n, 0.0);
  parallel_for(n_samples, [&](std::size_t draw) {
    Rng rng = make_rng(seed, "impute.draw", {draw});
    std::normal_distribution<double> normal;
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    std::vector<double> x_in(n);
    for (std::size_t t = sched.steps; t >= 1; --t) {
      for (std::size_t i = 0; i < n; ++i) x_in[i] = mask[i] ? 0.0 : x[i];
      const auto eps_hat = denoiser_forward(params, x_in, t, cond);
      x = reverse_step(x, t, eps_hat, sched, rng);
    }
    double* row = res.samples.data() + draw * n;
    for (std::size_t i = 0; i < n; ++i) row[i] = mask[i] ? values[i] : x[i];
  });

  res.point_estimate.resize(n);
  res.quantile_bands.assign(res.quantile_levels.size() * n, 0.0);
  std::vector<double> column(n_samples);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < n_samples; ++d) column[d] = res.samples[d * n + i];
    res.point_estimate[i] = mask[i] ? values[i] : stats::median(column);
    for (std::size_t q = 0; q < res.quantile_levels.size(); ++q) {
      res.quantile_bands[q * n + i] = stats::quantile(column, res.quantile_levels[q]);
    }
  }
  return res;
}

}  // namespace pulsediff::diffusion
