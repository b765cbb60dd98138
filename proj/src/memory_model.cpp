#include "heppo/memory_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "heppo/error.hpp"

namespace heppo {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t row_bytes(std::size_t num_traj, int bits) {
  return num_traj * static_cast<std::size_t>(bits) / 8;
}

} // namespace

void LayoutConfig::validate() const {
  if (num_traj < 1) throw ValidationError("layout needs at least one trajectory");
  if (timesteps < 1) throw ValidationError("layout needs at least one timestep");
  const auto width_ok = [](int bits) { return bits == 8 || bits == 16 || bits == 32; };
  if (!width_ok(element_bits)) throw ValidationError("element_bits must be 8, 16 or 32");
  if (!width_ok(result_bits())) throw ValidationError("writeback_bits must be 8, 16 or 32");
  if (in_place && result_bits() > element_bits) {
    throw ValidationError("in-place writeback cannot be wider than the stored elements");
  }
}

std::size_t LayoutConfig::bytes_per_timestep() const { return 2 * row_bytes(num_traj, element_bits); }

std::size_t LayoutConfig::result_bytes_per_timestep() const {
  return 2 * row_bytes(num_traj, result_bits());
}

std::size_t LayoutConfig::storage_bytes() const {
  std::size_t bytes = timesteps * bytes_per_timestep();
  if (!in_place) bytes += timesteps * result_bytes_per_timestep();
  return bytes;
}

std::size_t bandwidth_requirement(const LayoutConfig& layout, AccessPattern pattern) {
  layout.validate();
  std::size_t bytes = layout.bytes_per_timestep();
  if (pattern == AccessPattern::ReadWrite) bytes += layout.result_bytes_per_timestep();
  return bytes;
}

double dram_bytes_per_cycle(double bandwidth_bytes_per_sec, double clock_hz) {
  if (!(bandwidth_bytes_per_sec > 0.0) || !(clock_hz > 0.0)) {
    throw ValidationError("bandwidth and clock must be positive");
  }
  return bandwidth_bytes_per_sec / clock_hz;
}

std::size_t bram_blocks_for_bytes(std::size_t bytes, const BramGeometry& geometry) {
  return ceil_div(bytes, geometry.block_bytes());
}

std::size_t bram_blocks_for_storage(const LayoutConfig& layout, const BramGeometry& geometry) {
  layout.validate();
  return bram_blocks_for_bytes(layout.storage_bytes(), geometry);
}

std::size_t bram_blocks_for_bandwidth(double bytes_per_cycle, const BramGeometry& geometry) {
  if (!(bytes_per_cycle > 0.0)) throw ValidationError("bandwidth demand must be positive");
  const double per_block =
      static_cast<double>(geometry.bytes_per_port_per_cycle * geometry.ports_per_block);
  return static_cast<std::size_t>(std::ceil(bytes_per_cycle / per_block));
}

std::string_view bank_name(Bank bank) {
  switch (bank) {
    case Bank::Rewards: return "RMB";
    case Bank::Values: return "VMB";
    case Bank::Advantages: return "AMB";
    case Bank::Rtgs: return "RTGMB";
  }
  return "?";
}

ConflictReport port_conflict_check(std::span<const MemoryAccess> trace) {
  std::map<std::tuple<Cycles, Bank, std::size_t, Port>, std::size_t> uses;
  for (const auto& a : trace) ++uses[{a.cycle, a.bank, a.block, a.port}];

  ConflictReport report;
  for (const auto& [key, count] : uses) {
    if (count > 1) {
      const auto& [cycle, bank, block, port] = key;
      report.violations.push_back({cycle, bank, block, port, count});
    }
  }
  return report;
}

double measured_bytes_per_cycle(std::span<const MemoryAccess> trace, Cycles first, Cycles last) {
  if (last < first) throw ValidationError("empty measurement window");
  std::size_t bytes = 0;
  for (const auto& a : trace) {
    if (a.cycle >= first && a.cycle <= last) bytes += a.bytes;
  }
  return static_cast<double>(bytes) / static_cast<double>(last - first + 1);
}

StackMemory::StackMemory(const LayoutConfig& layout) : layout_(layout) {
  layout_.validate();
  const std::size_t cells = layout_.num_traj * layout_.timesteps;
  rmb_.assign(cells, 0);
  vmb_.assign(cells, 0);
  if (!layout_.in_place) {
    amb_.assign(cells, 0);
    rtgmb_.assign(cells, 0);
  }
  popped_.assign(layout_.timesteps, false);
  for (auto& live : live_) live.assign(layout_.timesteps, false);
}

std::vector<Word>& StackMemory::storage(Bank bank) {
  return const_cast<std::vector<Word>&>(std::as_const(*this).storage(bank));
}

const std::vector<Word>& StackMemory::storage(Bank bank) const {
  switch (bank) {
    case Bank::Rewards: return rmb_;
    case Bank::Values: return vmb_;
    case Bank::Advantages: return layout_.in_place ? rmb_ : amb_;
    case Bank::Rtgs: return layout_.in_place ? vmb_ : rtgmb_;
  }
  return rmb_;
}

int StackMemory::bits_of(Bank bank) const {
  const bool result = bank == Bank::Advantages || bank == Bank::Rtgs;
  return result ? layout_.result_bits() : layout_.element_bits;
}

void StackMemory::record_row(Bank bank, std::size_t t, Port port, AccessKind kind) {
  // In place, result rows physically live in the input banks.
  Bank physical = bank;
  if (layout_.in_place && bank == Bank::Advantages) physical = Bank::Rewards;
  if (layout_.in_place && bank == Bank::Rtgs) physical = Bank::Values;

  const std::size_t bytes = row_bytes(layout_.num_traj, bits_of(bank));
  for (std::size_t offset = 0, block = 0; offset < bytes; offset += 4, ++block) {
    trace_.push_back({cycle_, physical, block, port, t, kind, std::min<std::size_t>(4, bytes - offset)});
  }
}

void StackMemory::occupy(Bank bank, std::size_t t) {
  if (layout_.in_place && bank == Bank::Advantages) bank = Bank::Rewards;
  if (layout_.in_place && bank == Bank::Rtgs) bank = Bank::Values;
  auto& live = live_[static_cast<int>(bank)];
  if (live[t]) return;
  live[t] = true;
  occupied_bytes_ += row_bytes(layout_.num_traj, bits_of(bank));
  peak_occupied_bytes_ = std::max(peak_occupied_bytes_, occupied_bytes_);
}

void StackMemory::push_timestep(std::size_t t, std::span<const Word> rewards,
                                std::span<const Word> values) {
  if (depth_ == layout_.timesteps) {
    throw StackError("stack overflow: capacity is " + std::to_string(layout_.timesteps) + " timesteps");
  }
  if (t != depth_) {
    throw StackError("out-of-order push: expected timestep " + std::to_string(depth_) + ", got " +
                     std::to_string(t));
  }
  if (rewards.size() != layout_.num_traj || values.size() != layout_.num_traj) {
    throw ValidationError("push needs one reward and one value per trajectory");
  }
  const std::size_t base = t * layout_.num_traj;
  std::copy(rewards.begin(), rewards.end(), rmb_.begin() + static_cast<std::ptrdiff_t>(base));
  std::copy(values.begin(), values.end(), vmb_.begin() + static_cast<std::ptrdiff_t>(base));
  record_row(Bank::Rewards, t, Port::A, AccessKind::Write);
  record_row(Bank::Values, t, Port::A, AccessKind::Write);
  occupy(Bank::Rewards, t);
  occupy(Bank::Values, t);
  popped_[t] = false;
  ++depth_;
}

StackMemory::Row StackMemory::pop_timestep() {
  if (depth_ == 0) throw StackError("stack underflow: pop on an empty stack");
  const std::size_t t = --depth_;
  const std::size_t base = t * layout_.num_traj;
  const auto first = rmb_.begin() + static_cast<std::ptrdiff_t>(base);
  const auto vfirst = vmb_.begin() + static_cast<std::ptrdiff_t>(base);
  const auto n = static_cast<std::ptrdiff_t>(layout_.num_traj);
  Row row{t, {first, first + n}, {vfirst, vfirst + n}};
  record_row(Bank::Rewards, t, Port::A, AccessKind::Read);
  record_row(Bank::Values, t, Port::A, AccessKind::Read);
  popped_[t] = true;
  return row;
}

void StackMemory::write_results(std::size_t t, std::span<const Word> advantages,
                                std::span<const Word> rtgs) {
  if (t >= layout_.timesteps || !popped_[t]) {
    throw StackError("results written for timestep " + std::to_string(t) +
                     " before it was popped");
  }
  if (advantages.size() != layout_.num_traj || rtgs.size() != layout_.num_traj) {
    throw ValidationError("writeback needs one advantage and one RTG per trajectory");
  }
  const auto base = static_cast<std::ptrdiff_t>(t * layout_.num_traj);
  std::copy(advantages.begin(), advantages.end(), storage(Bank::Advantages).begin() + base);
  std::copy(rtgs.begin(), rtgs.end(), storage(Bank::Rtgs).begin() + base);
  record_row(Bank::Advantages, t, Port::B, AccessKind::Write);
  record_row(Bank::Rtgs, t, Port::B, AccessKind::Write);
  occupy(Bank::Advantages, t);
  occupy(Bank::Rtgs, t);
}

std::span<const Word> StackMemory::row(Bank bank, std::size_t t) const {
  if (t >= layout_.timesteps) throw StackError("row index out of range");
  const auto& bank_words = storage(bank);
  return std::span<const Word>(bank_words).subspan(t * layout_.num_traj, layout_.num_traj);
}

ElementCodec ElementCodec::quantized(const QuantScheme& scheme, double offset, double scale) {
  if (!std::isfinite(offset) || !std::isfinite(scale) || scale < 0.0) {
    throw ValidationError("codec offset must be finite and scale finite and non-negative");
  }
  return ElementCodec{scheme, offset, scale};
}

Word ElementCodec::encode(double x) const {
  if (!scheme) return std::bit_cast<Word>(x);
  return quantize((x - offset) / std::max(scale, kSigmaFloor), *scheme);
}

double ElementCodec::decode(Word w) const {
  if (!scheme) return std::bit_cast<double>(w);
  if (w > scheme->max_code()) throw ValidationError("stored word exceeds the code range");
  return dequantize(static_cast<Code>(w), *scheme) * scale + offset;
}

bool ElementCodec::saturates(double x) const {
  if (!scheme) return false;
  const double z = (x - offset) / std::max(scale, kSigmaFloor);
  return z < -scheme->range() || z >= scheme->range();
}

double ElementCodec::error_bound() const {
  return scheme ? scheme->step() / 2.0 * scale : 0.0;
}

void load_trajectories(StackMemory& mem, std::span<const Trajectory> trajectories,
                       const StackCodecs& codecs) {
  const auto& layout = mem.layout();
  if (trajectories.size() != layout.num_traj) {
    throw ValidationError("expected " + std::to_string(layout.num_traj) + " trajectories, got " +
                          std::to_string(trajectories.size()));
  }
  const std::size_t length = trajectories.front().length();
  for (const auto& traj : trajectories) {
    traj.validate();
    if (traj.length() != length) throw ValidationError("stacked trajectories must share one length");
  }

  std::vector<Word> rewards(layout.num_traj);
  std::vector<Word> values(layout.num_traj);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < layout.num_traj; ++i) {
      rewards[i] = codecs.reward.encode(trajectories[i].rewards[t]);
      values[i] = codecs.value.encode(trajectories[i].values[t]);
    }
    mem.push_timestep(t, rewards, values);
    mem.advance();
  }
}

StackRun run_stack_pipeline(StackMemory& mem, std::span<const double> bootstraps,
                            const GaeParams& params, const PipelineConfig& cfg,
                            const StackCodecs& codecs) {
  const std::size_t n = mem.layout().num_traj;
  const std::size_t length = mem.depth();
  if (length == 0) throw StackError("nothing to process: stack is empty");
  if (bootstraps.size() != n) throw ValidationError("need one bootstrap value per trajectory");

  std::vector<LookaheadPe> pes;
  pes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pes.emplace_back(params, cfg, length, bootstraps[i]);

  StackRun run;
  run.first_cycle = mem.cycle();
  bool wrote = false;
  Cycles last_read = run.first_cycle;

  std::vector<Word> adv_words(n);
  std::vector<Word> rtg_words(n);
  std::vector<std::vector<PeOutput>> retired(n);

  Cycles cycle = run.first_cycle;
  for (; !pes.front().idle(); ++cycle) {
    mem.set_cycle(cycle);
    if (pes.front().can_issue(cycle)) {
      const auto row = mem.pop_timestep();
      for (std::size_t i = 0; i < n; ++i) {
        pes[i].issue(cycle, codecs.reward.decode(row.rewards[i]), codecs.value.decode(row.values[i]));
      }
      last_read = cycle;
    }

    for (std::size_t i = 0; i < n; ++i) retired[i] = pes[i].retire(cycle);
    for (std::size_t j = 0; j < retired.front().size(); ++j) {
      const std::size_t t = retired.front()[j].t;
      for (std::size_t i = 0; i < n; ++i) {
        const PeOutput& out = retired[i][j];
        adv_words[i] = codecs.advantage.encode(out.advantage);
        rtg_words[i] = codecs.rtg.encode(out.rtg);
        run.saturated += codecs.advantage.saturates(out.advantage) ? 1 : 0;
        run.saturated += codecs.rtg.saturates(out.rtg) ? 1 : 0;
      }
      mem.write_results(t, adv_words, rtg_words);
      if (!wrote) {
        run.steady_begin = cycle;
        wrote = true;
      }
      run.last_cycle = cycle;
    }
  }
  mem.set_cycle(cycle);
  run.steady_end = last_read;

  run.results.resize(n);
  for (auto& r : run.results) {
    r.advantages.resize(length);
    r.rtgs.resize(length);
  }
  for (std::size_t t = 0; t < length; ++t) {
    const auto adv = mem.row(Bank::Advantages, t);
    const auto rtg = mem.row(Bank::Rtgs, t);
    for (std::size_t i = 0; i < n; ++i) {
      run.results[i].advantages[t] = codecs.advantage.decode(adv[i]);
      run.results[i].rtgs[t] = codecs.rtg.decode(rtg[i]);
    }
  }
  return run;
}

} // namespace heppo
