#include "heppo/harness.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "heppo/error.hpp"

namespace heppo {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double Rng::student_t(int dof) {
  const double z = normal();
  double chi2 = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

std::string_view stream_kind_name(StreamKind kind) {
  switch (kind) {
    case StreamKind::StationaryNormal: return "stationary-normal";
    case StreamKind::DriftingMean: return "drifting-mean";
    case StreamKind::DriftingScale: return "drifting-scale";
    case StreamKind::HeavyTail: return "heavy-tail";
  }
  return "unknown";
}

StreamKind stream_kind_from_name(std::string_view name) {
  for (auto kind : {StreamKind::StationaryNormal, StreamKind::DriftingMean,
                    StreamKind::DriftingScale, StreamKind::HeavyTail}) {
    if (stream_kind_name(kind) == name) return kind;
  }
  throw ValidationError("unknown stream kind '" + std::string(name) + "'");
}

void StreamSpec::validate() const {
  if (num_traj < 1) throw ValidationError("num_traj must be >= 1");
  if (timesteps < 1) throw ValidationError("timesteps must be >= 1");
  if (epochs < 1 || epochs > num_traj) throw ValidationError("epochs must lie in [1, num_traj]");
  if (!(reward_scale > 0.0) || !(value_scale > 0.0)) throw ValidationError("scales must be positive");
  if (!std::isfinite(reward_mean) || !std::isfinite(value_mean) || !std::isfinite(mean_drift)) {
    throw ValidationError("means and drift must be finite");
  }
  if (!(scale_growth > 0.0) || !std::isfinite(scale_growth)) {
    throw ValidationError("scale_growth must be positive");
  }
  if (tail_dof < 1) throw ValidationError("tail_dof must be >= 1");
}

std::vector<Trajectory> generate_streams(const StreamSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<Trajectory> out(spec.num_traj);
  for (std::size_t j = 0; j < spec.num_traj; ++j) {
    const auto epoch = static_cast<double>(j * spec.epochs / spec.num_traj);
    double shift = 0.0;
    double stretch = 1.0;
    if (spec.kind == StreamKind::DriftingMean) shift = spec.mean_drift * epoch;
    if (spec.kind == StreamKind::DriftingScale) stretch = std::pow(spec.scale_growth, epoch);

    const auto draw = [&] {
      return spec.kind == StreamKind::HeavyTail ? rng.student_t(spec.tail_dof) : rng.normal();
    };

    Trajectory& traj = out[j];
    traj.rewards.resize(spec.timesteps);
    traj.values.resize(spec.timesteps);
    for (std::size_t t = 0; t < spec.timesteps; ++t) {
      traj.rewards[t] = spec.reward_mean + shift + spec.reward_scale * stretch * draw();
      traj.values[t] = spec.value_mean + shift + spec.value_scale * stretch * draw();
    }
    traj.bootstrap_value =
        spec.terminal ? 0.0 : spec.value_mean + shift + spec.value_scale * stretch * draw();
  }
  return out;
}

namespace {

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

bool quantizes(DatapathVariant v) {
  return v != DatapathVariant::Baseline && v != DatapathVariant::DynStdRewards;
}

} // namespace

FidelityReport run_variant(std::span<const Trajectory> streams, DatapathVariant variant,
                           const QuantScheme& scheme, const GaeParams& params) {
  FidelityReport report;
  report.variant = variant;
  if (quantizes(variant)) {
    report.bits = scheme.bits();
    report.range = scheme.range();
  }

  RunningStats stats;
  double reward_sq = 0.0, value_sq = 0.0, adv_sq = 0.0, rtg_sq = 0.0;
  for (const auto& traj : streams) {
    const AdvantageResult baseline = compute_advantages(traj, params);
    const ProcessedTrajectory p = process_trajectory(traj, variant, scheme, stats);
    stats = p.stats;
    const AdvantageResult result = compute_advantages(p.traj, params);

    reward_sq += sum_sq_diff(p.traj.rewards, p.unquantized.rewards);
    value_sq += sum_sq_diff(p.traj.values, p.unquantized.values);
    adv_sq += sum_sq_diff(result.advantages, baseline.advantages);
    rtg_sq += sum_sq_diff(result.rtgs, baseline.rtgs);
    report.elements += traj.length();
  }

  if (report.elements > 0) {
    const auto n = static_cast<double>(report.elements);
    report.reward_mse = reward_sq / n;
    report.value_mse = value_sq / n;
    report.advantage_mse = adv_sq / n;
    report.rtg_mse = rtg_sq / n;
  }
  return report;
}

std::vector<FidelityReport> quant_sweep(std::span<const Trajectory> streams,
                                        std::span<const int> bits, double range,
                                        const GaeParams& params, DatapathVariant variant) {
  std::vector<FidelityReport> out;
  out.reserve(bits.size());
  for (int b : bits) {
    FidelityReport r = run_variant(streams, variant, QuantScheme(b, range), params);
    // Keep the swept width visible even for variants that bypass quantization.
    r.bits = b;
    r.range = range;
    out.push_back(r);
  }
  return out;
}

void PhaseProfile::validate() const {
  if (entries.empty()) throw ValidationError("profile has no phases");
  for (const auto& e : entries) {
    if (!(e.percent > 0.0)) throw ValidationError("phase '" + e.sub_phase + "' has a non-positive share");
  }
  const double total = total_percent();
  if (total < 99.0 || total > 101.0) {
    throw ValidationError("profile shares sum to " + std::to_string(total) + ", expected ~100");
  }
}

double PhaseProfile::total_percent() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.percent;
  return total;
}

PhaseProfile cpu_gpu_profile() {
  return {"cpu-gpu",
          {{"Trajectory Collection", "DNN Inference", 9.92},
           {"Trajectory Collection", "Environment Run", 46.58},
           {"Trajectory Collection", "CPU-GPU Communication", 0.85},
           {"Trajectory Collection", "Storing Trajectories", 5.73},
           {"GAE", "GAE Memory Fetch", 5.00},
           {"GAE", "GAE Computation", 24.79},
           {"GAE", "GAE Memory Write", 0.17},
           {"Network Update", "Loss Calculation", 5.21},
           {"Network Update", "Backpropagation", 1.77}}};
}

PhaseProfile cpu_only_profile() {
  return {"cpu-only",
          {{"Trajectory Collection", "DNN Inference", 10.46},
           {"Trajectory Collection", "Environment Run", 60.71},
           {"Trajectory Collection", "Storing Trajectories", 4.75},
           {"GAE", "GAE Memory Fetch", 3.49},
           {"GAE", "GAE Computation", 11.23},
           {"GAE", "GAE Memory Write", 0.32},
           {"Network Update", "Loss Calculation", 6.10},
           {"Network Update", "Backpropagation", 2.95}}};
}

PhaseProfile profile_by_name(std::string_view system) {
  if (system == "cpu-gpu") return cpu_gpu_profile();
  if (system == "cpu-only") return cpu_only_profile();
  throw ValidationError("unknown profile '" + std::string(system) + "' (expected cpu-gpu or cpu-only)");
}

ProfileSpeedup profile_speedup(const PhaseProfile& profile,
                               const std::map<std::string, double>& accelerations) {
  profile.validate();
  for (const auto& [name, factor] : accelerations) {
    bool known = false;
    for (const auto& e : profile.entries) known = known || e.sub_phase == name || e.phase == name;
    if (!known) throw ValidationError("unknown phase '" + name + "' in profile " + profile.system);
    if (std::isnan(factor) || factor < 1.0) {
      throw ValidationError("acceleration factor for '" + name + "' must be >= 1");
    }
  }

  double remaining = 0.0;
  for (const auto& e : profile.entries) {
    double factor = 1.0;
    if (auto it = accelerations.find(e.sub_phase); it != accelerations.end()) {
      factor = it->second;
    } else if (auto ph = accelerations.find(e.phase); ph != accelerations.end()) {
      factor = ph->second;
    }
    remaining += std::isinf(factor) ? 0.0 : e.percent / factor;
  }

  ProfileSpeedup out;
  out.new_time_fraction = remaining / profile.total_percent();
  out.speedup = out.new_time_fraction > 0.0 ? 1.0 / out.new_time_fraction
                                            : std::numeric_limits<double>::infinity();
  out.time_reduction_percent = (1.0 - out.new_time_fraction) * 100.0;
  return out;
}

double sum_percent(const PhaseProfile& profile, std::span<const std::string_view> sub_phases) {
  double total = 0.0;
  for (auto name : sub_phases) {
    bool found = false;
    for (const auto& e : profile.entries) {
      if (e.sub_phase == name) {
        total += e.percent;
        found = true;
      }
    }
    if (!found) throw ValidationError("unknown sub-phase '" + std::string(name) + "'");
  }
  return total;
}

HwReport report_hw(const SystolicConfig& cfg, const LayoutConfig& layout, std::size_t device_blocks,
                   double dram_bytes_per_sec, double baseline) {
  cfg.validate();
  layout.validate();
  if (device_blocks < 1) throw ValidationError("device must have at least one BRAM block");

  HwReport r;
  r.systolic = cfg;
  r.layout = layout;
  r.initiation_interval = cfg.pipeline.initiation_interval();
  r.trajectory_cycles = cycle_report(layout.timesteps, cfg.pipeline);
  const std::vector<std::size_t> lengths(layout.num_traj, layout.timesteps);
  r.batch_makespan = simulate_systolic(lengths, cfg).makespan;
  r.per_pe_throughput = per_pe_throughput(cfg.pipeline);
  r.aggregate_throughput = aggregate_throughput(cfg);
  r.baseline_throughput = baseline;
  r.speedup_vs_baseline = speedup_vs_baseline(r.aggregate_throughput, baseline);

  r.read_bytes_per_cycle = bandwidth_requirement(layout, AccessPattern::ReadOnly);
  r.total_bytes_per_cycle = bandwidth_requirement(layout, AccessPattern::ReadWrite);
  r.dram_bytes_per_cycle = dram_bytes_per_cycle(dram_bytes_per_sec, cfg.pipeline.clock_hz);
  r.dram_shortfall_bytes_per_cycle =
      static_cast<double>(r.read_bytes_per_cycle) - r.dram_bytes_per_cycle;
  r.storage_bytes = layout.storage_bytes();
  r.storage_blocks = bram_blocks_for_storage(layout);
  r.bandwidth_blocks = bram_blocks_for_bandwidth(static_cast<double>(r.total_bytes_per_cycle));
  r.device_blocks = device_blocks;
  r.storage_utilization_percent =
      100.0 * static_cast<double>(r.storage_blocks) / static_cast<double>(device_blocks);
  r.bandwidth_utilization_percent =
      100.0 * static_cast<double>(r.bandwidth_blocks) / static_cast<double>(device_blocks);
  return r;
}

} // namespace heppo
