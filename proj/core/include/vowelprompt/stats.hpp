#pragma once

#include <cstdint>
#include <span>

namespace vowelprompt {

/// Mean and population standard deviation of a sample.
struct MomentStats {
  double mean = 0.0;
  double std = 0.0;
  std::int64_t count = 0;

  bool operator==(const MomentStats&) const = default;
};

/// Two-pass moments. The mean is accumulated as offsets from the first value,
/// so a constant sample yields exactly that constant and std 0.
MomentStats moments(std::span<const double> values);

/// Linear-interpolation percentile over an ascending-sorted sample:
/// h = p * (n - 1), result = v[floor h] + frac(h) * (v[floor h + 1] - v[floor h]).
double percentile_sorted(std::span<const double> sorted, double p);

/// Same rule at p = num / den, with h = num * (n - 1) / den formed from
/// integers so that edges landing on an order statistic are exact.
double quantile_at(std::span<const double> sorted, std::int64_t num, std::int64_t den);

/// Ordinary least squares slope of y on x. Returns 0 when x has no spread.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vowelprompt
