#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace heppo {

/// Floor applied to standard deviations before dividing. Constant streams
/// standardize to zero instead of blowing up.
inline constexpr double kSigmaFloor = 1e-8;

/*
 * Welford accumulator over every reward ever seen.
 *
 *   M_n = M_{n-1} + (r - M_{n-1}) / n
 *   S_n = S_{n-1} + (r - M_{n-1}) * (r - M_n)
 *   std = sqrt(S_n / n)            (population form)
 *
 * Values are immutable: update() returns a new accumulator.
 */
class RunningStats {
public:
  RunningStats() = default;

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double agg() const { return agg_; }

  RunningStats update(double r) const;
  double stddev() const;

  friend bool operator==(const RunningStats&, const RunningStats&) = default;

private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double agg_ = 0.0;
};

struct BlockStats {
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation
  std::size_t count = 0;
};

RunningStats running_update(const RunningStats& stats, double r);
double running_std(const RunningStats& stats);

// Folds `rewards` into the history first (arrival order), then standardizes
// each reward against the updated statistics.
std::pair<RunningStats, std::vector<double>> dynamic_standardize(const RunningStats& stats,
                                                                 std::span<const double> rewards);

BlockStats block_stats(std::span<const double> values);
std::vector<double> block_standardize(std::span<const double> values, const BlockStats& stats);
std::vector<double> block_destandardize(std::span<const double> z, const BlockStats& stats);

} // namespace heppo
