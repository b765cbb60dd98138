#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heppo/gae.hpp"
#include "heppo/hw_model.hpp"
#include "heppo/memory_model.hpp"
#include "heppo/quantization.hpp"

namespace heppo {

/*
 * Reproducible random source. The engine is std::mt19937_64, whose output
 * sequence is fixed by the C++ standard; uniforms take the top 53 bits and
 * normals use the Marsaglia polar method. Changing any of this changes every
 * golden report.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  double student_t(int dof);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class StreamKind { StationaryNormal, DriftingMean, DriftingScale, HeavyTail };

std::string_view stream_kind_name(StreamKind kind);
StreamKind stream_kind_from_name(std::string_view name);

// Synthetic reward/value streams. Trajectories are split into `epochs`
// consecutive groups; drifting kinds move the distribution between groups.
struct StreamSpec {
  StreamKind kind = StreamKind::StationaryNormal;
  std::size_t num_traj = 64;
  std::size_t timesteps = 1024;
  std::uint64_t seed = 0;
  std::size_t epochs = 1;
  double reward_mean = 0.0;
  double reward_scale = 1.0;
  double value_mean = 0.0;
  double value_scale = 1.0;
  double mean_drift = 0.5;    // added to both means per epoch (drifting-mean)
  double scale_growth = 1.5;  // multiplies both scales per epoch (drifting-scale)
  int tail_dof = 3;           // Student-t degrees of freedom (heavy-tail)
  bool terminal = true;       // bootstrap 0; otherwise drawn like a value

  void validate() const;
};

std::vector<Trajectory> generate_streams(const StreamSpec& spec);

// Fidelity of one datapath configuration against the full-precision baseline.
// reward/value MSE isolate quantization: each stream is compared with the same
// variant run with quantization bypassed. Advantage/RTG MSE compare against
// the variant-1 (unmodified) GAE outputs.
struct FidelityReport {
  DatapathVariant variant = DatapathVariant::Baseline;
  int bits = 0;
  double range = 0.0;
  std::size_t elements = 0;
  double reward_mse = 0.0;
  double value_mse = 0.0;
  double advantage_mse = 0.0;
  double rtg_mse = 0.0;
};

FidelityReport run_variant(std::span<const Trajectory> streams, DatapathVariant variant,
                           const QuantScheme& scheme, const GaeParams& params);

std::vector<FidelityReport> quant_sweep(std::span<const Trajectory> streams,
                                        std::span<const int> bits, double range,
                                        const GaeParams& params,
                                        DatapathVariant variant = DatapathVariant::DynRewardsBlockValues);

struct PhaseEntry {
  std::string phase;
  std::string sub_phase;
  double percent = 0.0;
};

struct PhaseProfile {
  std::string system;
  std::vector<PhaseEntry> entries;

  void validate() const;
  double total_percent() const;
};

/// Time profile of one PPO iteration on a CPU-GPU system (percent of total).
PhaseProfile cpu_gpu_profile();
/// Same profile on a CPU-only system; it has no CPU-GPU communication phase.
PhaseProfile cpu_only_profile();
PhaseProfile profile_by_name(std::string_view system);

inline constexpr std::string_view kGaeSubPhases[] = {"GAE Memory Fetch", "GAE Computation",
                                                     "GAE Memory Write"};
inline constexpr std::string_view kMemorySubPhases[] = {"Storing Trajectories", "GAE Memory Fetch",
                                                        "GAE Memory Write", "CPU-GPU Communication"};
/// Memory share of PPO time as quoted alongside the profile; the rows sum to 11.75.
inline constexpr double kQuotedMemoryPercent = 11.73;

struct ProfileSpeedup {
  double new_time_fraction = 1.0;
  double speedup = 1.0;
  double time_reduction_percent = 0.0;
};

/// Keys name a sub-phase or a whole phase; a factor of +inf removes the time.
ProfileSpeedup profile_speedup(const PhaseProfile& profile,
                               const std::map<std::string, double>& accelerations);

double sum_percent(const PhaseProfile& profile, std::span<const std::string_view> sub_phases);

struct HwReport {
  SystolicConfig systolic;
  LayoutConfig layout;

  Cycles initiation_interval = 0;
  CycleReport trajectory_cycles;  // one trajectory of layout.timesteps elements
  Cycles batch_makespan = 0;      // layout.num_traj trajectories on the array
  double per_pe_throughput = 0.0;
  double aggregate_throughput = 0.0;
  double baseline_throughput = kCpuGpuBaselineElementsPerSecond;
  double speedup_vs_baseline = 0.0;

  std::size_t read_bytes_per_cycle = 0;
  std::size_t total_bytes_per_cycle = 0;
  double dram_bytes_per_cycle = 0.0;
  double dram_shortfall_bytes_per_cycle = 0.0;  // read demand minus DRAM supply
  std::size_t storage_bytes = 0;
  std::size_t storage_blocks = 0;
  std::size_t bandwidth_blocks = 0;
  std::size_t device_blocks = kDeviceBramBlocks;
  double storage_utilization_percent = 0.0;
  double bandwidth_utilization_percent = 0.0;
};

HwReport report_hw(const SystolicConfig& cfg, const LayoutConfig& layout,
                   std::size_t device_blocks = kDeviceBramBlocks,
                   double dram_bytes_per_sec = kDdr4BytesPerSecond,
                   double baseline = kCpuGpuBaselineElementsPerSecond);

} // namespace heppo
