#pragma once

#include <span>
#include <vector>

namespace propml {
namespace stats {

double mean(std::span<const double> v);

// Population variance (divides by n).
double variance(std::span<const double> v);

// Quantile with midpoint interpolation: position h = (n-1)*p on the sorted
// values; fractional h averages the two surrounding order statistics.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> v, double p);
double median(std::vector<double> v);

// Pearson correlation; the caller guarantees nonzero variance on both sides.
double pearson(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation with midrank ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace stats
}  // namespace propml
