#pragma once

#include <span>
#include <vector>

namespace pulsediff::stats {

/// Median with the two middle order statistics averaged for even counts.
double median(std::span<const double> xs);

/// Lower median: the smaller middle order statistic for even counts, so the
/// result is always one of the inputs.
double lower_median(std::span<const double> xs);

/// Percentile in [0, 100] by linear interpolation between order statistics
/// (rank = p/100 * (n-1)).
double percentile(std::span<const double> xs, double p);

/// Quantile in [0, 1], same interpolation as percentile().
double quantile(std::span<const double> xs, double q);

double mean(std::span<const double> xs);

/// Population standard deviation (divides by n).
double population_stddev(std::span<const double> xs);

}  // namespace pulsediff::stats
