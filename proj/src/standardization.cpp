#include "heppo/standardization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heppo/error.hpp"

namespace heppo {

RunningStats RunningStats::update(double r) const {
  if (!std::isfinite(r)) throw ValidationError("reward is not finite");
  RunningStats next = *this;
  next.count_ = count_ + 1;
  const double prev_mean = mean_;
  next.mean_ = prev_mean + (r - prev_mean) / static_cast<double>(next.count_);
  next.agg_ = agg_ + (r - prev_mean) * (r - next.mean_);
  return next;
}

double RunningStats::stddev() const {
  if (count_ == 0) throw ValidationError("running std is undefined before the first reward");
  return std::sqrt(agg_ / static_cast<double>(count_));
}

RunningStats running_update(const RunningStats& stats, double r) { return stats.update(r); }

double running_std(const RunningStats& stats) { return stats.stddev(); }

std::pair<RunningStats, std::vector<double>> dynamic_standardize(const RunningStats& stats,
                                                                 std::span<const double> rewards) {
  RunningStats next = stats;
  for (double r : rewards) next = next.update(r);

  std::vector<double> z(rewards.size());
  if (!rewards.empty()) {
    const double mean = next.mean();
    const double sigma = std::max(next.stddev(), kSigmaFloor);
    for (std::size_t i = 0; i < rewards.size(); ++i) z[i] = (rewards[i] - mean) / sigma;
  }
  return {next, std::move(z)};
}

BlockStats block_stats(std::span<const double> values) {
  if (values.empty()) throw ValidationError("block must be nonempty");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError("values[" + std::to_string(i) + "] is not finite");
    }
    sum += values[i];
  }
  const double n = static_cast<double>(values.size());
  const double mu = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mu) * (v - mu);
  return {mu, std::sqrt(sq / n), values.size()};
}

std::vector<double> block_standardize(std::span<const double> values, const BlockStats& stats) {
  const double sigma = std::max(stats.sigma, kSigmaFloor);
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - stats.mu) / sigma;
  return z;
}

std::vector<double> block_destandardize(std::span<const double> z, const BlockStats& stats) {
  std::vector<double> v(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = z[i] * stats.sigma + stats.mu;
  return v;
}

} // namespace heppo
