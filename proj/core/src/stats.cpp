#include "vowelprompt/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace vowelprompt {

MomentStats moments(std::span<const double> values) {
  MomentStats s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  const double pivot = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - pivot;
  s.mean = pivot + shift / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

namespace {

double interpolate_at(std::span<const double> sorted, double h) {
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  return interpolate_at(sorted, p * static_cast<double>(sorted.size() - 1));
}

double quantile_at(std::span<const double> sorted, std::int64_t num, std::int64_t den) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (den <= 0 || num < 0 || num > den) throw std::invalid_argument("quantile fraction out of range");
  const auto n1 = static_cast<std::int64_t>(sorted.size()) - 1;
  return interpolate_at(sorted, static_cast<double>(num * n1) / static_cast<double>(den));
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const MomentStats mx = moments(x);
  const MomentStats my = moments(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace vowelprompt
