#include "pulsediff/prior/detect.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "pulsediff/error.hpp"
#include "pulsediff/stats.hpp"

namespace pulsediff::prior {

namespace {

// Causal moving average with zero initial state, the FIR ones(w)/w.
std::vector<double> moving_average(std::span<const double> x, std::size_t w) {
  std::vector<double> out(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= w) acc -= x[i - w];
    out[i] = acc / static_cast<double>(w);
  }
  return out;
}

std::size_t samples(double seconds, double fs) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(seconds * fs));
}

double mean_of(const std::deque<double>& d) {
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

}  // namespace

std::vector<std::size_t> christov_detect(std::span<const double> signal, double fs) {
  if (!(fs > 0.0)) throw Error(Errc::invalid_argument, "sample rate must be positive");
  const std::size_t n = signal.size();
  if (static_cast<double>(n) < fs) {
    throw Error(Errc::invalid_argument, "signal shorter than the one second detector warm-up");
  }

  const std::size_t w1 = samples(0.020, fs);
  const std::size_t w2 = samples(0.028, fs);
  const std::size_t w3 = samples(0.040, fs);
  const auto ma1 = moving_average(signal, w1);
  const auto ma2 = moving_average(ma1, w2);
  std::vector<double> slope(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) slope[i] = std::abs(ma2[i + 1] - ma2[i - 1]);
  auto env = moving_average(slope, w3);
  std::fill_n(env.begin(), std::min(n, w1 + w2 + w3), 0.0);

  const std::size_t ms50 = samples(0.050, fs);
  const std::size_t ms200 = samples(0.200, fs);
  const std::size_t ms350 = samples(0.350, fs);
  const std::size_t ms1200 = samples(1.200, fs);

  // Steep-slope threshold M starts at 0.6 of the envelope maximum over the
  // first 5 s and is then refreshed from the maxima following each QRS.
  const std::size_t learn = std::min(n, samples(5.0, fs));
  const double m0 = 0.6 * *std::max_element(env.begin(), env.begin() + static_cast<std::ptrdiff_t>(learn));
  std::deque<double> mm(5, m0);
  double m = m0;
  double new_m5 = 0.0;
  double f = 0.0;
  double r = 0.0;
  double rm = 0.0;  // mean of the last five RR intervals
  std::deque<double> rr;
  std::vector<std::size_t> crossings;

  for (std::size_t i = 0; i < n; ++i) {
    if (!crossings.empty()) {
      const std::size_t q = crossings.back();
      if (i < q + ms200) {
        new_m5 = 0.6 * *std::max_element(env.begin() + static_cast<std::ptrdiff_t>(q),
                                         env.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        if (new_m5 > 1.5 * mm.back()) new_m5 = 1.1 * mm.back();
      } else if (i == q + ms200) {
        if (new_m5 == 0.0) new_m5 = mm.back();
        mm.push_back(new_m5);
        mm.pop_front();
        m = mean_of(mm);
      } else if (i < q + ms1200) {
        const double frac = static_cast<double>(i - q - ms200) / static_cast<double>(ms1200 - ms200);
        m = mean_of(mm) * (1.0 - 0.4 * frac);
      } else {
        m = 0.6 * mean_of(mm);
      }

      // R lowers the threshold over the last third of the expected interval,
      // reaching M / 1.4 when the next beat is due.
      if (rm > 0.0) {
        const double start = static_cast<double>(q) + 2.0 * rm / 3.0;
        const double end = static_cast<double>(q) + rm;
        const auto di = static_cast<double>(i);
        if (di <= start) {
          r = 0.0;
        } else if (di <= end) {
          r = -(m - m / 1.4) * (di - start) / (end - start);
        }
      }
    }

    // F tracks the growth of the envelope maximum across a 350 ms window.
    if (i >= ms350) {
      const auto base = env.begin() + static_cast<std::ptrdiff_t>(i - ms350);
      const double latest = *std::max_element(base + static_cast<std::ptrdiff_t>(ms350 - ms50),
                                              base + static_cast<std::ptrdiff_t>(ms350));
      const double earliest = *std::max_element(base, base + static_cast<std::ptrdiff_t>(ms50));
      f += (latest - earliest) / 150.0;
    }

    const double threshold = m + f + r;
    const bool refractory = !crossings.empty() && i <= crossings.back() + ms200;
    if (!refractory && env[i] > threshold) {
      if (!crossings.empty()) {
        rr.push_back(static_cast<double>(i - crossings.back()));
        if (rr.size() > 5) rr.pop_front();
        rm = mean_of(rr);
      }
      crossings.push_back(i);
      new_m5 = 0.0;
    }
  }

  const std::size_t half = static_cast<std::size_t>(std::lround(0.100 * fs));
  std::vector<std::size_t> peaks;
  for (std::size_t c : crossings) {
    const std::size_t lo = c > half ? c - half : 0;
    const std::size_t hi = std::min(n - 1, c + half);
    std::size_t best = lo;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (std::abs(signal[j]) > std::abs(signal[best])) best = j;
    }
    if (peaks.empty() || best > peaks.back()) peaks.push_back(best);
  }
  return peaks;
}

std::vector<double> cross_correlate(std::span<const double> signal, std::span<const double> kernel) {
  if (kernel.empty()) throw Error(Errc::invalid_argument, "cross-correlation kernel is empty");
  const std::size_t n = signal.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t span = std::min(kernel.size(), n - t);
    double acc = 0.0;
    for (std::size_t m = 0; m < span; ++m) acc += signal[t + m] * kernel[m];
    out[t] = acc;
  }
  return out;
}

core::BeatSequence matched_filter_detect(std::span<const double> signal, const PulseTemplate& tmpl,
                                         double fs) {
  const std::size_t n = signal.size();
  if (n == 0) return core::BeatSequence({}, 0);
  const auto c = cross_correlate(signal, tmpl.waveform);
  const double threshold = stats::percentile(c, kDetectionPercentile);
  const auto separation = static_cast<std::size_t>(std::lround(kMinBeatSeparationS * fs));

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] >= threshold) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });

  std::vector<std::size_t> accepted;
  for (std::size_t cand : candidates) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      const std::size_t d = cand > a ? cand - a : a - cand;
      return d < separation;
    });
    if (clear) accepted.push_back(cand);
  }
  std::sort(accepted.begin(), accepted.end());
  return core::BeatSequence(std::move(accepted), n);
}

}  // namespace pulsediff::prior
