#pragma once

// Scalar summary statistics shared by the estimator and simulation modules.

#include <span>
#include <vector>

namespace un {

double mean(std::span<const double> x);

// Sample standard deviation with the n-1 denominator. Returns 0 for n < 2.
double sample_sd(std::span<const double> x);

// Linear-interpolation percentile (quantile type 7): for sorted x and
// probability q in [0, 1], h = q * (n - 1), result interpolates between
// floor(h) and ceil(h). The input need not be sorted; a sorted copy is made.
double percentile(std::span<const double> x, double q);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double p025 = 0.0;
  double p975 = 0.0;
};

Summary summarize(std::span<const double> x);

}  // namespace un
