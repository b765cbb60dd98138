#include "heppo/hw_model.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "heppo/error.hpp"

namespace heppo {

Cycles initiation_interval(int k, int feedback_latency) {
  if (k < 1) throw ValidationError("lookahead depth k must be >= 1");
  if (feedback_latency < 1) throw ValidationError("feedback latency must be >= 1");
  const auto depth = static_cast<Cycles>(k);
  const auto latency = static_cast<Cycles>(feedback_latency);
  return std::max<Cycles>(1, (latency + depth - 1) / depth);
}

void PipelineConfig::validate() const {
  if (k < 1 || k > 8) throw ValidationError("lookahead depth k must lie in [1, 8]");
  if (feedback_latency < 1) throw ValidationError("feedback latency must be >= 1");
  if (frontend_latency < 0) throw ValidationError("frontend latency must be >= 0");
  if (!(clock_hz > 0.0)) throw ValidationError("clock frequency must be positive");
}

CycleReport cycle_report(std::size_t length, const PipelineConfig& cfg) {
  cfg.validate();
  if (length == 0) throw ValidationError("trajectory length must be >= 1");
  CycleReport r;
  r.initiation_interval = cfg.initiation_interval();
  r.fill_cycles = cfg.fill_cycles();
  r.total_cycles = r.fill_cycles + static_cast<Cycles>(length - 1) * r.initiation_interval;
  r.elements_per_second = per_pe_throughput(cfg);
  return r;
}

LookaheadPe::LookaheadPe(const GaeParams& params, const PipelineConfig& cfg, std::size_t length,
                         double bootstrap_value)
    : gamma_(params.gamma()),
      cfg_(cfg),
      ii_(cfg.initiation_interval()),
      length_(length),
      next_value_(bootstrap_value) {
  cfg.validate();
  const auto depth = static_cast<std::size_t>(cfg.k);
  powers_.assign(depth + 1, 1.0);
  for (std::size_t i = 1; i <= depth; ++i) powers_[i] = powers_[i - 1] * params.decay();
}

bool LookaheadPe::can_issue(Cycles cycle) const {
  if (done_issuing()) return false;
  return !has_issued_ || cycle >= last_issue_ + ii_;
}

void LookaheadPe::issue(Cycles cycle, double reward, double value) {
  if (done_issuing()) throw std::logic_error("PE issued past the end of its trajectory");
  if (!can_issue(cycle)) throw std::logic_error("PE issue violates the initiation interval");

  const auto depth = static_cast<std::size_t>(cfg_.k);
  const std::size_t t = length_ - 1 - issued_;

  const double delta = reward + gamma_ * next_value_ - value;
  next_value_ = value;
  delta_window_.push_front(delta);
  if (delta_window_.size() > depth) delta_window_.pop_back();

  double fir = 0.0;
  for (std::size_t i = 0; i < delta_window_.size(); ++i) fir += powers_[i] * delta_window_[i];

  double feedback = 0.0;
  if (history_.size() >= depth) {
    const PeOutput& older = history_[depth - 1];
    const Cycles loop_entry = cycle + static_cast<Cycles>(cfg_.frontend_latency);
    if (older.completion_cycle > loop_entry) {
      throw std::logic_error("feedback hazard: A[" + std::to_string(older.t) +
                             "] not ready for A[" + std::to_string(t) + "]");
    }
    feedback = older.advantage;
  }

  PeOutput out;
  out.t = t;
  out.advantage = powers_[depth] * feedback + fir;
  out.rtg = value + out.advantage;
  out.issue_cycle = cycle;
  out.completion_cycle = cycle + cfg_.fill_cycles();

  history_.push_front(out);
  if (history_.size() > depth) history_.pop_back();
  in_flight_.push_back(out);

  ++issued_;
  has_issued_ = true;
  last_issue_ = cycle;
}

std::vector<PeOutput> LookaheadPe::retire(Cycles cycle) {
  std::vector<PeOutput> done;
  while (!in_flight_.empty() && in_flight_.front().completion_cycle <= cycle) {
    done.push_back(in_flight_.front());
    in_flight_.pop_front();
  }
  return done;
}

PeRun simulate_pe(std::span<const double> rewards, std::span<const double> values,
                  double bootstrap_value, const GaeParams& params, const PipelineConfig& cfg) {
  if (rewards.size() != values.size()) {
    throw ValidationError("reward and value streams differ in length (" +
                          std::to_string(rewards.size()) + " vs " +
                          std::to_string(values.size()) + ")");
  }
  Trajectory{std::vector<double>(rewards.begin(), rewards.end()),
             std::vector<double>(values.begin(), values.end()), bootstrap_value}
      .validate();

  const std::size_t n = rewards.size();
  LookaheadPe pe(params, cfg, n, bootstrap_value);

  PeRun run;
  run.result.advantages.assign(n, 0.0);
  run.result.rtgs.assign(n, 0.0);

  Cycles first_completion = 0;
  Cycles last_completion = 0;
  bool first = true;
  for (Cycles cycle = 0; !pe.idle(); ++cycle) {
    if (pe.can_issue(cycle)) {
      const std::size_t t = pe.next_timestep();
      pe.issue(cycle, rewards[t], values[t]);
    }
    for (const PeOutput& out : pe.retire(cycle)) {
      run.result.advantages[out.t] = out.advantage;
      run.result.rtgs[out.t] = out.rtg;
      if (first) {
        first_completion = out.completion_cycle - out.issue_cycle;
        first = false;
      }
      last_completion = out.completion_cycle;
    }
  }

  run.report.initiation_interval = cfg.initiation_interval();
  run.report.fill_cycles = first_completion;
  run.report.total_cycles = last_completion;
  run.report.elements_per_second = per_pe_throughput(cfg);
  return run;
}

PeRun simulate_pe(const QuantizedRewards& rewards, const QuantizedValueBlock& values,
                  double bootstrap_value, const GaeParams& params, const PipelineConfig& cfg) {
  if (rewards.codes.size() != values.codes.size()) {
    throw ValidationError("reward and value code streams differ in length (" +
                          std::to_string(rewards.codes.size()) + " vs " +
                          std::to_string(values.codes.size()) + ")");
  }
  const auto r = decode_rewards(rewards);
  const auto v = decode_values(values);
  return simulate_pe(r, v, bootstrap_value, params, cfg);
}

void SystolicConfig::validate() const {
  if (rows < 1) throw ValidationError("systolic array needs at least one row");
  pipeline.validate();
}

DispatchTrace simulate_systolic(std::span<const std::size_t> lengths, const SystolicConfig& cfg) {
  cfg.validate();
  if (lengths.empty()) throw ValidationError("no trajectories to dispatch");

  using Slot = std::pair<Cycles, std::size_t>;  // (free at, row)
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free_rows;
  for (std::size_t row = 0; row < cfg.rows; ++row) free_rows.emplace(0, row);

  DispatchTrace trace;
  trace.entries.reserve(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto [start, row] = free_rows.top();
    free_rows.pop();
    const Cycles end = start + cycle_report(lengths[i], cfg.pipeline).total_cycles;
    trace.entries.push_back({i, row, start, end});
    trace.makespan = std::max(trace.makespan, end);
    free_rows.emplace(end, row);
  }
  return trace;
}

double per_pe_throughput(const PipelineConfig& cfg) {
  cfg.validate();
  return cfg.clock_hz / static_cast<double>(cfg.initiation_interval());
}

double aggregate_throughput(const SystolicConfig& cfg) {
  cfg.validate();
  return static_cast<double>(cfg.rows) * per_pe_throughput(cfg.pipeline);
}

double speedup_vs_baseline(double aggregate, double baseline) {
  if (!(baseline > 0.0)) throw ValidationError("baseline throughput must be positive");
  return aggregate / baseline;
}

} // namespace heppo
