#pragma once

#include <span>
#include <vector>

namespace engage {

double mean(std::span<const double> xs);
// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> xs);

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile(std::vector<double> xs, double q);

}  // namespace engage
