#include "pulsediff/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "pulsediff/error.hpp"

namespace pulsediff::diffusion {

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "quadratic") return ScheduleKind::quadratic;
  if (name == "linear") return ScheduleKind::linear;
  throw Error(Errc::invalid_argument, "unknown schedule kind '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) { return kind == ScheduleKind::quadratic ? "quadratic" : "linear"; }

NoiseSchedule make_schedule(ScheduleKind kind, std::size_t steps, double beta_start, double beta_end) {
  if (steps < 1) throw Error(Errc::invalid_argument, "schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0)) {
    throw Error(Errc::invalid_argument, "schedule requires 0 < beta_1 < beta_T < 1");
  }
  NoiseSchedule s{kind, steps, beta_start, beta_end, {}, {}, {}};
  s.betas.resize(steps);
  if (steps == 1) {
    s.betas[0] = beta_start;
  } else {
    for (std::size_t i = 0; i < steps; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(steps - 1);
      if (kind == ScheduleKind::linear) {
        s.betas[i] = beta_start + frac * (beta_end - beta_start);
      } else {
        const double root = std::sqrt(beta_start) + frac * (std::sqrt(beta_end) - std::sqrt(beta_start));
        s.betas[i] = root * root;
      }
    }
    // Pin the endpoints against rounding in the square-root round trip.
    s.betas.front() = beta_start;
    s.betas.back() = beta_end;
  }
  s.alphas.resize(steps);
  s.alpha_bars.resize(steps);
  double prod = 1.0;
  for (std::size_t i = 0; i < steps; ++i) {
    s.alphas[i] = 1.0 - s.betas[i];
    prod *= s.alphas[i];
    s.alpha_bars[i] = prod;
  }
  return s;
}

NoiseSchedule csdi_schedule() { return make_schedule(ScheduleKind::quadratic, 50, 1e-4, 0.5); }
NoiseSchedule sssd_schedule() { return make_schedule(ScheduleKind::linear, 200, 1e-4, 0.02); }

NoiseSchedule schedule_preset(std::string_view name) {
  if (name == "csdi") return csdi_schedule();
  if (name == "sssd") return sssd_schedule();
  throw Error(Errc::invalid_argument, "unknown schedule preset '" + std::string(name) + "'");
}

namespace {
void check_step(const NoiseSchedule& sched, std::size_t t) {
  if (t < 1 || t > sched.steps) {
    throw Error(Errc::invalid_argument, "diffusion step " + std::to_string(t) + " outside [1, " +
                                            std::to_string(sched.steps) + "]");
  }
}
}  // namespace

std::vector<double> forward_sample(std::span<const double> x0, std::size_t t, std::span<const double> eps,
                                   const NoiseSchedule& sched) {
  check_step(sched, t);
  if (eps.size() != x0.size()) throw Error(Errc::invalid_argument, "noise and signal differ in length");
  const double a = std::sqrt(sched.alpha_bar(t));
  const double b = std::sqrt(1.0 - sched.alpha_bar(t));
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

double posterior_variance(const NoiseSchedule& sched, std::size_t t) {
  check_step(sched, t);
  return (1.0 - sched.alpha_bar(t - 1)) / (1.0 - sched.alpha_bar(t)) * sched.beta(t);
}

std::vector<double> reverse_step(std::span<const double> x_t, std::size_t t, std::span<const double> eps_hat,
                                 const NoiseSchedule& sched, std::span<const double> z) {
  check_step(sched, t);
  if (eps_hat.size() != x_t.size()) throw Error(Errc::invalid_argument, "noise estimate and x_t differ in length");
  if (t > 1 && z.size() != x_t.size()) throw Error(Errc::invalid_argument, "z and x_t differ in length");
  const double coef = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double sigma = t > 1 ? std::sqrt(posterior_variance(sched, t)) : 0.0;
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (x_t[i] - coef * eps_hat[i]) * inv_sqrt_alpha;
    if (t > 1) out[i] += sigma * z[i];
  }
  return out;
}

std::vector<double> reverse_step(std::span<const double> x_t, std::size_t t, std::span<const double> eps_hat,
                                 const NoiseSchedule& sched, Rng& rng) {
  std::vector<double> z;
  if (t > 1) {
    std::normal_distribution<double> normal;
    z.resize(x_t.size());
    for (double& v : z) v = normal(rng);
  }
  return reverse_step(x_t, t, eps_hat, sched, z);
}

}  // namespace pulsediff::diffusion
