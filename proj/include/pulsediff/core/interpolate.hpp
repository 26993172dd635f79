#pragma once

#include <vector>

#include "pulsediff/core/recording.hpp"

namespace pulsediff::core {

/// Fills missing runs by linear interpolation between the bracketing observed
/// samples; leading and trailing runs repeat the nearest observed value.
std::vector<double> linear_interpolate(const Recording& rec);

}  // namespace pulsediff::core
