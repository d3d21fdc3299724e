#include "un/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "un/kernels.hpp"

namespace un {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty range");
  return kernels::sum(x) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double percentile(std::span<const double> x, double q) {
  if (x.empty()) throw std::invalid_argument("percentile of empty range");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("percentile: q outside [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double h = q * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = h - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

Summary summarize(std::span<const double> x) {
  Summary s;
  s.mean = mean(x);
  s.sd = sample_sd(x);
  s.p025 = percentile(x, 0.025);
  s.p975 = percentile(x, 0.975);
  return s;
}

}  // namespace un
