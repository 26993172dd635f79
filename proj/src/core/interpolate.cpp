#include "pulsediff/core/interpolate.hpp"

#include "pulsediff/error.hpp"

namespace pulsediff::core {

std::vector<double> linear_interpolate(const Recording& rec) {
  const auto values = rec.values();
  const auto mask = rec.mask();
  const std::size_t n = rec.size();
  std::vector<double> out(values.begin(), values.end());

  std::size_t prev = n;  // index of the last observed sample, n while none seen
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (prev == n) {
      for (std::size_t j = 0; j < i; ++j) out[j] = values[i];
    } else if (i > prev + 1) {
      const double span = static_cast<double>(i - prev);
      for (std::size_t j = prev + 1; j < i; ++j) {
        const double w = static_cast<double>(j - prev) / span;
        out[j] = values[prev] + w * (values[i] - values[prev]);
      }
    }
    prev = i;
  }
  if (prev == n) throw Error(Errc::invalid_argument, "cannot interpolate a recording with no observed samples");
  for (std::size_t j = prev + 1; j < n; ++j) out[j] = values[prev];
  return out;
}

}  // namespace pulsediff::core
