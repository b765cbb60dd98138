#include "heppo/quantization.hpp"

#include <cmath>
#include <string>

#include "heppo/error.hpp"

namespace heppo {

QuantScheme::QuantScheme(int bits, double range) : bits_(bits), range_(range) {
  if (bits < 2 || bits > 16) throw ValidationError("bits must lie in [2, 16]");
  if (!(range > 0.0) || !std::isfinite(range)) throw ValidationError("range must be positive and finite");
}

Code quantize(double x, const QuantScheme& scheme) {
  if (!std::isfinite(x)) throw ValidationError("cannot quantize a non-finite value");
  const double range = scheme.range();
  const double step = scheme.step();
  const double max_code = static_cast<double>(scheme.max_code());

  double bin = std::floor((x + range) / step);
  if (bin <= 0.0) return 0;
  if (bin >= max_code) return scheme.max_code();

  // x + range may round across a bin edge; re-check against the exact edges.
  const double lower = -range + bin * step;
  if (x < lower) {
    bin -= 1.0;
  } else if (x >= lower + step) {
    bin += 1.0;
  }
  return static_cast<Code>(bin);
}

double dequantize(Code code, const QuantScheme& scheme) {
  if (code > scheme.max_code()) {
    throw ValidationError("code " + std::to_string(code) + " out of range for " +
                          std::to_string(scheme.bits()) + "-bit scheme");
  }
  return -scheme.range() + (static_cast<double>(code) + 0.5) * scheme.step();
}

std::vector<Code> quantize_all(std::span<const double> xs, const QuantScheme& scheme) {
  std::vector<Code> codes(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) codes[i] = quantize(xs[i], scheme);
  return codes;
}

std::vector<double> dequantize_all(std::span<const Code> codes, const QuantScheme& scheme) {
  std::vector<double> xs(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) xs[i] = dequantize(codes[i], scheme);
  return xs;
}

std::pair<RunningStats, QuantizedRewards> encode_rewards(std::span<const double> rewards,
                                                         const RunningStats& stats,
                                                         const QuantScheme& scheme) {
  auto [next, z] = dynamic_standardize(stats, rewards);
  return {next, QuantizedRewards{quantize_all(z, scheme), scheme}};
}

std::vector<double> decode_rewards(const QuantizedRewards& q) {
  return dequantize_all(q.codes, q.scheme);
}

QuantizedValueBlock encode_values(std::span<const double> values, const QuantScheme& scheme) {
  const BlockStats stats = block_stats(values);
  const auto z = block_standardize(values, stats);
  return QuantizedValueBlock{quantize_all(z, scheme), scheme, stats};
}

std::vector<double> decode_values_standardized(const QuantizedValueBlock& q) {
  return dequantize_all(q.codes, q.scheme);
}

std::vector<double> decode_values(const QuantizedValueBlock& q) {
  return block_destandardize(decode_values_standardized(q), q.stats);
}

int variant_index(DatapathVariant v) { return static_cast<int>(v); }

DatapathVariant variant_from_index(int index) {
  if (index < 1 || index > 5) throw ValidationError("variant index must lie in [1, 5]");
  return static_cast<DatapathVariant>(index);
}

std::string_view variant_name(DatapathVariant v) {
  switch (v) {
    case DatapathVariant::Baseline: return "baseline";
    case DatapathVariant::DynStdRewards: return "dyn-std-rewards";
    case DatapathVariant::BlockBothDestd: return "block-both-destd";
    case DatapathVariant::BlockBothNoDestdRewards: return "block-both-no-destd-rewards";
    case DatapathVariant::DynRewardsBlockValues: return "dyn-rewards-block-values";
  }
  return "unknown";
}

ProcessedTrajectory process_trajectory(const Trajectory& traj, DatapathVariant variant,
                                       const QuantScheme& scheme, const RunningStats& stats) {
  traj.validate();
  ProcessedTrajectory out{stats, traj, traj};

  const auto block_roundtrip = [](std::span<const double> xs) {
    const BlockStats s = block_stats(xs);
    return block_destandardize(block_standardize(xs, s), s);
  };

  switch (variant) {
    case DatapathVariant::Baseline:
      break;

    case DatapathVariant::DynStdRewards: {
      auto [next, z] = dynamic_standardize(stats, traj.rewards);
      out.stats = next;
      out.traj.rewards = z;
      out.unquantized.rewards = std::move(z);
      break;
    }

    case DatapathVariant::BlockBothDestd: {
      out.traj.rewards = decode_values(encode_values(traj.rewards, scheme));
      out.traj.values = decode_values(encode_values(traj.values, scheme));
      out.unquantized.rewards = block_roundtrip(traj.rewards);
      out.unquantized.values = block_roundtrip(traj.values);
      break;
    }

    case DatapathVariant::BlockBothNoDestdRewards: {
      out.traj.rewards = decode_values_standardized(encode_values(traj.rewards, scheme));
      out.traj.values = decode_values(encode_values(traj.values, scheme));
      out.unquantized.rewards = block_standardize(traj.rewards, block_stats(traj.rewards));
      out.unquantized.values = block_roundtrip(traj.values);
      break;
    }

    case DatapathVariant::DynRewardsBlockValues: {
      auto [next, q] = encode_rewards(traj.rewards, stats, scheme);
      out.stats = next;
      out.traj.rewards = decode_rewards(q);
      out.traj.values = decode_values(encode_values(traj.values, scheme));
      out.unquantized.rewards = dynamic_standardize(stats, traj.rewards).second;
      out.unquantized.values = block_roundtrip(traj.values);
      break;
    }
  }
  return out;
}

} // namespace heppo
