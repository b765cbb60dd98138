#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "heppo/gae.hpp"
#include "heppo/quantization.hpp"

namespace heppo {

using Cycles = std::uint64_t;

inline constexpr double kDefaultClockHz = 3.0e8;
/// Measured throughput of a conventional CPU-GPU GAE implementation, elements/s.
inline constexpr double kCpuGpuBaselineElementsPerSecond = 9000.0;

/// Cycles between issues for a k-step lookahead loop whose registered
/// feedback path is `feedback_latency` deep: smallest II with k * II >= L.
Cycles initiation_interval(int k, int feedback_latency);

struct PipelineConfig {
  int k = 2;
  int feedback_latency = 2;   // registered multiply-accumulate loop depth
  int frontend_latency = 4;   // fetch, dequantize, delta, FIR partial sum
  double clock_hz = kDefaultClockHz;

  void validate() const;
  Cycles initiation_interval() const { return heppo::initiation_interval(k, feedback_latency); }
  Cycles fill_cycles() const {
    return static_cast<Cycles>(frontend_latency) + static_cast<Cycles>(feedback_latency);
  }
};

struct CycleReport {
  Cycles initiation_interval = 0;
  Cycles fill_cycles = 0;
  Cycles total_cycles = 0;  // fill + (T - 1) * II
  double elements_per_second = 0.0;

  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

/// Closed-form timing for one trajectory of `length` elements.
CycleReport cycle_report(std::size_t length, const PipelineConfig& cfg);

// One result leaving the PE.
struct PeOutput {
  std::size_t t = 0;
  double advantage = 0.0;
  double rtg = 0.0;
  Cycles issue_cycle = 0;
  Cycles completion_cycle = 0;
};

/*
 * Cycle-stepped model of one GAE processing element.
 *
 * Elements enter in reverse time order. Each issue computes
 *   delta_t = r_t + gamma * V_{t+1} - V_t
 *   A_t     = C^k * A_{t+k} + sum_{i<k} C^i * delta_{t+i}
 * and the result retires F + L cycles later. The feedback term A_{t+k} must
 * have retired by the time A_t reaches the loop (issue + F); issuing faster
 * than the initiation interval allows throws std::logic_error.
 */
class LookaheadPe {
public:
  LookaheadPe(const GaeParams& params, const PipelineConfig& cfg, std::size_t length,
              double bootstrap_value);

  bool done_issuing() const { return issued_ == length_; }
  bool idle() const { return done_issuing() && in_flight_.empty(); }
  /// True when the issue slot at `cycle` respects the initiation interval.
  bool can_issue(Cycles cycle) const;
  /// Timestep index the next issue() consumes.
  std::size_t next_timestep() const { return length_ - 1 - issued_; }

  /// Issues the next element (timestep length-1, length-2, ... 0).
  void issue(Cycles cycle, double reward, double value);

  /// Removes and returns every result whose completion cycle is <= `cycle`.
  std::vector<PeOutput> retire(Cycles cycle);

private:
  double gamma_;
  std::vector<double> powers_;  // C^0 .. C^k
  PipelineConfig cfg_;
  Cycles ii_;
  std::size_t length_;
  std::size_t issued_ = 0;
  double next_value_;
  bool has_issued_ = false;
  Cycles last_issue_ = 0;

  std::deque<double> delta_window_;          // delta_t, delta_{t+1}, ... (at most k)
  std::deque<PeOutput> history_;             // last k results, most recent first
  std::deque<PeOutput> in_flight_;
};

struct PeRun {
  AdvantageResult result;
  CycleReport report;
};

/// Full-precision streams through one PE.
PeRun simulate_pe(std::span<const double> rewards, std::span<const double> values,
                  double bootstrap_value, const GaeParams& params, const PipelineConfig& cfg);

/// Coded streams: rewards dequantized (kept standardized), values dequantized
/// and de-standardized with the block statistics, then processed as above.
PeRun simulate_pe(const QuantizedRewards& rewards, const QuantizedValueBlock& values,
                  double bootstrap_value, const GaeParams& params, const PipelineConfig& cfg);

struct SystolicConfig {
  std::size_t rows = 64;
  PipelineConfig pipeline;

  void validate() const;
};

struct DispatchEntry {
  std::size_t trajectory = 0;
  std::size_t row = 0;
  Cycles start = 0;
  Cycles end = 0;  // exclusive

  friend bool operator==(const DispatchEntry&, const DispatchEntry&) = default;
};

struct DispatchTrace {
  std::vector<DispatchEntry> entries;  // in trajectory order
  Cycles makespan = 0;

  friend bool operator==(const DispatchTrace&, const DispatchTrace&) = default;
};

/// Work-conserving dispatch from one queue: the earliest free row (lowest
/// index on ties) takes the next trajectory in input order.
DispatchTrace simulate_systolic(std::span<const std::size_t> lengths, const SystolicConfig& cfg);

double per_pe_throughput(const PipelineConfig& cfg);
/// Steady-state upper bound N * clock / II, elements per second.
double aggregate_throughput(const SystolicConfig& cfg);
double speedup_vs_baseline(double aggregate,
                           double baseline = kCpuGpuBaselineElementsPerSecond);

} // namespace heppo
