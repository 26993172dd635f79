#include "pulsediff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsediff/error.hpp"

namespace pulsediff::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw Error(Errc::invalid_argument, std::string(what) + " of an empty sequence");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double median(std::span<const double> xs) {
  const auto v = sorted_copy(xs, "median");
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double lower_median(std::span<const double> xs) {
  const auto v = sorted_copy(xs, "median");
  return v[(v.size() - 1) / 2];
}

double quantile(std::span<const double> xs, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(Errc::invalid_argument, "quantile outside [0, 1]");
  const auto v = sorted_copy(xs, "quantile");
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double percentile(std::span<const double> xs, double p) { return quantile(xs, p / 100.0); }

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(Errc::invalid_argument, "mean of an empty sequence");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_stddev(std::span<const double> xs) {
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace pulsediff::stats
