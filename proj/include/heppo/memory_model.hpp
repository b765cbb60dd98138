#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "heppo/gae.hpp"
#include "heppo/hw_model.hpp"
#include "heppo/quantization.hpp"

namespace heppo {

struct LayoutConfig {
  std::size_t num_traj = 64;
  std::size_t timesteps = 1024;
  int element_bits = 8;                 // 8, 16 or 32
  std::optional<int> writeback_bits;    // defaults to element_bits
  bool in_place = true;

  void validate() const;
  int result_bits() const { return writeback_bits.value_or(element_bits); }
  /// Rewards + values for every trajectory at one timestep.
  std::size_t bytes_per_timestep() const;
  /// Advantages + RTGs for every trajectory at one timestep.
  std::size_t result_bytes_per_timestep() const;
  /// Bytes held on chip: inputs only when results overwrite them in place.
  std::size_t storage_bytes() const;
};

struct BramGeometry {
  std::size_t block_capacity_bits = 36 * 1024;
  std::size_t ports_per_block = 2;
  std::size_t bytes_per_port_per_cycle = 4;

  std::size_t block_bytes() const { return block_capacity_bits / 8; }
};

/// Block count of the reference device, used for utilization percentages.
inline constexpr std::size_t kDeviceBramBlocks = 312;
inline constexpr double kDdr4BytesPerSecond = 25e9;

enum class AccessPattern { ReadOnly, ReadWrite };

/// Bytes moved per cycle when every trajectory is serviced in parallel.
std::size_t bandwidth_requirement(const LayoutConfig& layout,
                                  AccessPattern pattern = AccessPattern::ReadWrite);
double dram_bytes_per_cycle(double bandwidth_bytes_per_sec, double clock_hz);
std::size_t bram_blocks_for_bytes(std::size_t bytes, const BramGeometry& geometry = {});
std::size_t bram_blocks_for_storage(const LayoutConfig& layout, const BramGeometry& geometry = {});
std::size_t bram_blocks_for_bandwidth(double bytes_per_cycle, const BramGeometry& geometry = {});

enum class Bank { Rewards, Values, Advantages, Rtgs };
enum class Port { A, B };
enum class AccessKind { Read, Write };

std::string_view bank_name(Bank bank);

// One word-wide access to one BRAM block. Rows are striped across blocks four
// bytes at a time, so a row of a bank touches ceil(row_bytes / 4) blocks.
struct MemoryAccess {
  Cycles cycle = 0;
  Bank bank = Bank::Rewards;
  std::size_t block = 0;
  Port port = Port::A;
  std::size_t address = 0;  // timestep row
  AccessKind kind = AccessKind::Read;
  std::size_t bytes = 0;

  friend bool operator==(const MemoryAccess&, const MemoryAccess&) = default;
};

struct PortViolation {
  Cycles cycle = 0;
  Bank bank = Bank::Rewards;
  std::size_t block = 0;
  Port port = Port::A;
  std::size_t accesses = 0;
};

struct ConflictReport {
  std::vector<PortViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// At most one access per (bank, block, port, cycle).
ConflictReport port_conflict_check(std::span<const MemoryAccess> trace);

/// Average bytes per cycle over the inclusive cycle window [first, last].
double measured_bytes_per_cycle(std::span<const MemoryAccess> trace, Cycles first, Cycles last);

/// Raw storage word: a quantizer code, or the bit pattern of a double in
/// full-precision mode.
using Word = std::uint64_t;

/*
 * FILO stack of timestep rows. RMB/VMB hold rewards and values as
 * [timestep][trajectory]; results either overwrite those rows in place
 * (through port B) or go to separate AMB/RTGMB banks.
 *
 * Every operation is stamped with the current cycle; the caller advances it.
 */
class StackMemory {
public:
  explicit StackMemory(const LayoutConfig& layout);

  const LayoutConfig& layout() const { return layout_; }
  std::size_t depth() const { return depth_; }
  Cycles cycle() const { return cycle_; }
  void set_cycle(Cycles cycle) { cycle_ = cycle; }
  void advance(Cycles n = 1) { cycle_ += n; }

  void push_timestep(std::size_t t, std::span<const Word> rewards, std::span<const Word> values);

  struct Row {
    std::size_t t = 0;
    std::vector<Word> rewards;
    std::vector<Word> values;
  };
  Row pop_timestep();

  void write_results(std::size_t t, std::span<const Word> advantages, std::span<const Word> rtgs);

  /// Untraced view of one stored row; result banks alias the input banks in place.
  std::span<const Word> row(Bank bank, std::size_t t) const;

  const std::vector<MemoryAccess>& trace() const { return trace_; }
  std::size_t occupied_bytes() const { return occupied_bytes_; }
  std::size_t peak_occupied_bytes() const { return peak_occupied_bytes_; }

private:
  std::vector<Word>& storage(Bank bank);
  const std::vector<Word>& storage(Bank bank) const;
  int bits_of(Bank bank) const;
  void record_row(Bank bank, std::size_t t, Port port, AccessKind kind);
  void occupy(Bank bank, std::size_t t);

  LayoutConfig layout_;
  std::size_t depth_ = 0;
  Cycles cycle_ = 0;
  std::vector<Word> rmb_, vmb_, amb_, rtgmb_;
  std::vector<bool> popped_;
  std::vector<bool> live_[4];
  std::size_t occupied_bytes_ = 0;
  std::size_t peak_occupied_bytes_ = 0;
  std::vector<MemoryAccess> trace_;
};

// Maps real numbers to storage words: affine standardization followed by a
// uniform quantizer, or a lossless bit copy when no quantizer is set.
struct ElementCodec {
  std::optional<QuantScheme> scheme;
  double offset = 0.0;
  double scale = 1.0;

  static ElementCodec full_precision() { return {}; }
  static ElementCodec quantized(const QuantScheme& scheme, double offset = 0.0, double scale = 1.0);

  Word encode(double x) const;
  double decode(Word w) const;
  /// True when encode(x) clips at the quantizer range.
  bool saturates(double x) const;
  /// Largest |decode(encode(x)) - x| for unsaturated x.
  double error_bound() const;
};

struct StackCodecs {
  ElementCodec reward;
  ElementCodec value;
  ElementCodec advantage;
  ElementCodec rtg;
};

/// Pushes equal-length trajectories timestep by timestep, one row per cycle.
void load_trajectories(StackMemory& mem, std::span<const Trajectory> trajectories,
                       const StackCodecs& codecs);

struct StackRun {
  std::vector<AdvantageResult> results;  // decoded from the banks, per trajectory
  Cycles first_cycle = 0;
  Cycles last_cycle = 0;
  Cycles steady_begin = 0;  // first cycle with both reads and writes
  Cycles steady_end = 0;    // last such cycle
  std::size_t saturated = 0;  // result elements clipped by the writeback codec
};

/// Pops every row, runs one PE per trajectory in lockstep, and writes results
/// back F + L cycles after the matching reads.
StackRun run_stack_pipeline(StackMemory& mem, std::span<const double> bootstraps,
                            const GaeParams& params, const PipelineConfig& cfg,
                            const StackCodecs& codecs);

} // namespace heppo
