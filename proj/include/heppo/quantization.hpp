#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "heppo/gae.hpp"
#include "heppo/standardization.hpp"

namespace heppo {

using Code = std::uint16_t;

inline constexpr int kDefaultBits = 8;
inline constexpr double kDefaultRange = 4.0;

// Symmetric uniform quantizer over [-range, range) with 2^bits floor bins,
// bin-center reconstruction and saturating clamp.
class QuantScheme {
public:
  QuantScheme(int bits = kDefaultBits, double range = kDefaultRange);

  int bits() const { return bits_; }
  double range() const { return range_; }
  std::uint32_t levels() const { return std::uint32_t{1} << bits_; }
  double step() const { return 2.0 * range_ / static_cast<double>(levels()); }
  Code max_code() const { return static_cast<Code>(levels() - 1); }
  /// Code of the bin whose lower edge is 0.
  Code zero_code() const { return static_cast<Code>(levels() / 2); }

  friend bool operator==(const QuantScheme&, const QuantScheme&) = default;

private:
  int bits_;
  double range_;
};

Code quantize(double x, const QuantScheme& scheme);
double dequantize(Code code, const QuantScheme& scheme);

std::vector<Code> quantize_all(std::span<const double> xs, const QuantScheme& scheme);
std::vector<double> dequantize_all(std::span<const Code> codes, const QuantScheme& scheme);

// Rewards stay in standardized units after decoding.
struct QuantizedRewards {
  std::vector<Code> codes;
  QuantScheme scheme;
};

struct QuantizedValueBlock {
  std::vector<Code> codes;
  QuantScheme scheme;
  BlockStats stats;
};

std::pair<RunningStats, QuantizedRewards> encode_rewards(std::span<const double> rewards,
                                                         const RunningStats& stats,
                                                         const QuantScheme& scheme);
std::vector<double> decode_rewards(const QuantizedRewards& q);

QuantizedValueBlock encode_values(std::span<const double> values, const QuantScheme& scheme);
/// Decoded codes without the final de-standardization step.
std::vector<double> decode_values_standardized(const QuantizedValueBlock& q);
std::vector<double> decode_values(const QuantizedValueBlock& q);

// The five datapath configurations compared in the experiments, numbered 1..5.
enum class DatapathVariant {
  Baseline = 1,                 // no standardization, no quantization
  DynStdRewards = 2,            // dynamic reward standardization only
  BlockBothDestd = 3,           // block std + quantize both, rewards de-standardized
  BlockBothNoDestdRewards = 4,  // as 3, rewards left standardized
  DynRewardsBlockValues = 5,    // dynamic std + quantized rewards, block values
};

inline constexpr DatapathVariant kAllVariants[] = {
    DatapathVariant::Baseline, DatapathVariant::DynStdRewards, DatapathVariant::BlockBothDestd,
    DatapathVariant::BlockBothNoDestdRewards, DatapathVariant::DynRewardsBlockValues};

int variant_index(DatapathVariant v);
DatapathVariant variant_from_index(int index);
std::string_view variant_name(DatapathVariant v);

struct ProcessedTrajectory {
  RunningStats stats;
  Trajectory traj;  // reward/value streams that feed GAE; bootstrap passes through
  /// Same pipeline with quantization bypassed; equals `traj` for variants 1 and 2.
  Trajectory unquantized;
};

ProcessedTrajectory process_trajectory(const Trajectory& traj, DatapathVariant variant,
                                       const QuantScheme& scheme, const RunningStats& stats);

} // namespace heppo
