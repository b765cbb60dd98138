#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string_view>

#include "CLI11.hpp"

#include "heppo/error.hpp"
#include "heppo/gae.hpp"
#include "heppo/harness.hpp"
#include "heppo/report_io.hpp"

namespace heppo::cli {

namespace {

struct Options {
  std::string format = "json";
  std::string out_path;

  // GAE
  double gamma = 0.99;
  double lambda = 0.95;
  int k = 2;

  // streams
  std::uint64_t seed = 0;
  std::string kind = "stationary-normal";
  std::size_t traj = 64;
  std::size_t steps = 1024;
  std::size_t epochs = 1;

  // quantizer
  int bits = kDefaultBits;
  double range = kDefaultRange;
  int variant = 0;
  int bits_from = 3;
  int bits_to = 10;

  // hardware
  int latency = 2;
  int frontend = 4;
  double clock = kDefaultClockHz;
  std::size_t rows = 64;
  double baseline = kCpuGpuBaselineElementsPerSecond;

  // memory
  int element_bits = 8;
  int writeback_bits = 0;
  bool no_in_place = false;
  double dram_bandwidth = kDdr4BytesPerSecond;
  std::size_t device_blocks = kDeviceBramBlocks;

  // profile
  std::string system = "cpu-gpu";
  std::vector<std::string> accelerate;

  std::string input;
};

void add_output(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out_path, "Write the report to PATH instead of stdout");
}

void add_gae(CLI::App* cmd, Options& o) {
  cmd->add_option("--gamma", o.gamma, "Discount factor");
  cmd->add_option("--lambda", o.lambda, "GAE smoothing factor");
}

void add_streams(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "Generator seed");
  cmd->add_option("--kind", o.kind, "Stream kind")
      ->check(CLI::IsMember({"stationary-normal", "drifting-mean", "drifting-scale", "heavy-tail"}));
  cmd->add_option("--traj", o.traj, "Number of trajectories");
  cmd->add_option("--steps", o.steps, "Timesteps per trajectory");
  cmd->add_option("--epochs", o.epochs, "Epoch groups for drifting streams");
}

void add_pipeline(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k, "Lookahead depth");
  cmd->add_option("--latency", o.latency, "Feedback loop latency in cycles");
  cmd->add_option("--frontend", o.frontend, "Frontend latency in cycles");
  cmd->add_option("--clock", o.clock, "Clock frequency in Hz");
}

StreamSpec stream_spec(const Options& o) {
  StreamSpec spec;
  spec.kind = stream_kind_from_name(o.kind);
  spec.num_traj = o.traj;
  spec.timesteps = o.steps;
  spec.seed = o.seed;
  spec.epochs = o.epochs;
  return spec;
}

Json stream_json(const Options& o) {
  Json j;
  j["kind"] = o.kind;
  j["seed"] = o.seed;
  j["trajectories"] = o.traj;
  j["timesteps"] = o.steps;
  j["epochs"] = o.epochs;
  return j;
}

SystolicConfig systolic_config(const Options& o) {
  SystolicConfig cfg;
  cfg.rows = o.rows;
  cfg.pipeline.k = o.k;
  cfg.pipeline.feedback_latency = o.latency;
  cfg.pipeline.frontend_latency = o.frontend;
  cfg.pipeline.clock_hz = o.clock;
  return cfg;
}

LayoutConfig layout_config(const Options& o) {
  LayoutConfig layout;
  layout.num_traj = o.traj;
  layout.timesteps = o.steps;
  layout.element_bits = o.element_bits;
  if (o.writeback_bits != 0) layout.writeback_bits = o.writeback_bits;
  layout.in_place = !o.no_in_place;
  return layout;
}

double parse_factor(std::string_view text) {
  if (text == "inf" || text == "Inf" || text == "INF") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used != text.size()) throw ValidationError("");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad acceleration factor '" + std::string(text) + "'");
  }
}

std::string format_factor(double f) {
  return std::isinf(f) ? "inf" : Json(f).dump();
}

// Each command returns the document and the rows used for CSV output.
struct Report {
  Json doc;
  Json rows;
};

Report cmd_gae(const Options& o) {
  const GaeParams params(o.gamma, o.lambda);
  const auto trajectories = read_trajectory_file(o.input);
  Report r;
  r.doc["command"] = "gae";
  r.doc["gamma"] = o.gamma;
  r.doc["lambda"] = o.lambda;
  r.doc["k"] = o.k;
  r.doc["trajectories"] = Json::array();
  r.rows = Json::array();
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    const auto result = compute_advantages(trajectories[j], params, o.k);
    r.doc["trajectories"].push_back({{"advantages", result.advantages}, {"rtgs", result.rtgs}});
    for (std::size_t t = 0; t < result.advantages.size(); ++t) {
      r.rows.push_back({{"trajectory", j},
                        {"t", t},
                        {"advantage", result.advantages[t]},
                        {"rtg", result.rtgs[t]}});
    }
  }
  return r;
}

Report cmd_variant(const Options& o) {
  const GaeParams params(o.gamma, o.lambda);
  const QuantScheme scheme(o.bits, o.range);
  const auto streams = generate_streams(stream_spec(o));

  std::vector<DatapathVariant> variants;
  if (o.variant == 0) {
    variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  } else {
    variants.push_back(variant_from_index(o.variant));
  }

  Report r;
  r.doc["command"] = "variant";
  r.doc["stream"] = stream_json(o);
  r.doc["gamma"] = o.gamma;
  r.doc["lambda"] = o.lambda;
  r.rows = Json::array();
  for (auto v : variants) r.rows.push_back(to_json(run_variant(streams, v, scheme, params)));
  r.doc["reports"] = r.rows;
  return r;
}

Report cmd_sweep(const Options& o) {
  if (o.bits_from > o.bits_to) throw ValidationError("--bits-from exceeds --bits-to");
  const GaeParams params(o.gamma, o.lambda);
  const auto streams = generate_streams(stream_spec(o));
  std::vector<int> widths(static_cast<std::size_t>(o.bits_to - o.bits_from + 1));
  std::iota(widths.begin(), widths.end(), o.bits_from);
  for (int b : widths) QuantScheme(b, o.range);  // validates the whole range up front

  Report r;
  r.doc["command"] = "sweep";
  r.doc["stream"] = stream_json(o);
  r.doc["gamma"] = o.gamma;
  r.doc["lambda"] = o.lambda;
  r.rows = Json::array();
  const auto variant = variant_from_index(o.variant == 0 ? 5 : o.variant);
  for (const auto& rep : quant_sweep(streams, widths, o.range, params, variant)) {
    r.rows.push_back(to_json(rep));
  }
  r.doc["reports"] = r.rows;
  return r;
}

Report cmd_hw(const Options& o) {
  const HwReport rep = report_hw(systolic_config(o), layout_config(o), o.device_blocks,
                                 o.dram_bandwidth, o.baseline);
  Report r;
  r.rows = hw_json(rep);
  r.doc["command"] = "hw";
  r.doc.update(r.rows);
  return r;
}

Report cmd_mem(const Options& o) {
  const HwReport rep = report_hw(systolic_config(o), layout_config(o), o.device_blocks,
                                 o.dram_bandwidth, o.baseline);
  Report r;
  r.rows = mem_json(rep);
  r.doc["command"] = "mem";
  r.doc.update(r.rows);
  return r;
}

Report cmd_profile(const Options& o) {
  const PhaseProfile profile = profile_by_name(o.system);
  std::map<std::string, double> factors;
  if (o.accelerate.empty()) {
    factors["GAE"] = std::numeric_limits<double>::infinity();
  }
  for (const auto& spec : o.accelerate) {
    const auto eq = spec.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--accelerate expects NAME=FACTOR, got '" + spec + "'");
    }
    factors[spec.substr(0, eq)] = parse_factor(std::string_view(spec).substr(eq + 1));
  }
  const ProfileSpeedup s = profile_speedup(profile, factors);

  std::string accelerated;
  for (const auto& [name, f] : factors) {
    accelerated += (accelerated.empty() ? "" : ";") + name + "=" + format_factor(f);
  }

  Report r;
  Json row;
  row["system"] = profile.system;
  row["total_percent"] = profile.total_percent();
  row["accelerated"] = accelerated;
  row["new_time_fraction"] = s.new_time_fraction;
  row["speedup"] = s.speedup;
  row["time_reduction_percent"] = s.time_reduction_percent;
  // The CPU-only system has no CPU-GPU communication row.
  std::vector<std::string_view> memory;
  for (auto name : kMemorySubPhases) {
    for (const auto& e : profile.entries) {
      if (e.sub_phase == name) memory.push_back(name);
    }
  }
  const double memory_percent = sum_percent(profile, memory);
  row["memory_percent"] = memory_percent;
  row["quoted_memory_percent"] = kQuotedMemoryPercent;
  row["memory_gap_points"] = memory_percent - kQuotedMemoryPercent;
  r.rows = row;
  r.doc["command"] = "profile";
  r.doc.update(row);
  Json phases = Json::array();
  for (const auto& e : profile.entries) {
    phases.push_back({{"phase", e.phase}, {"sub_phase", e.sub_phase}, {"percent", e.percent}});
  }
  r.doc["phases"] = phases;
  return r;
}

void emit(const Report& report, const Options& o, std::ostream& out) {
  const std::string text = o.format == "csv" ? to_csv(report.rows) : report.doc.dump(2) + "\n";
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw ValidationError("cannot write " + o.out_path);
  file << text;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"GAE datapath, quantization and accelerator model"};
  app.name("heppo");
  app.require_subcommand(1);

  auto* gae = app.add_subcommand("gae", "Advantages and rewards-to-go for a trajectory file");
  gae->add_option("--input", o.input, "Trajectory JSON file")->required();
  add_gae(gae, o);
  gae->add_option("--k", o.k, "Lookahead depth");
  add_output(gae, o);

  auto* variant = app.add_subcommand("variant", "Fidelity of the five datapath variants");
  variant->add_option("--variant", o.variant, "Variant 1-5, or 0 for all")->check(CLI::Range(0, 5));
  variant->add_option("--bits", o.bits, "Quantizer bits");
  variant->add_option("--range", o.range, "Quantizer half-range in standard deviations");
  add_gae(variant, o);
  add_streams(variant, o);
  add_output(variant, o);

  auto* sweep = app.add_subcommand("sweep", "Quantizer bit-width sweep");
  sweep->add_option("--bits-from", o.bits_from, "First width");
  sweep->add_option("--bits-to", o.bits_to, "Last width");
  sweep->add_option("--range", o.range, "Quantizer half-range in standard deviations");
  sweep->add_option("--variant", o.variant, "Datapath variant (default 5)")->check(CLI::Range(0, 5));
  add_gae(sweep, o);
  add_streams(sweep, o);
  add_output(sweep, o);

  auto* hw = app.add_subcommand("hw", "Cycle and throughput report");
  add_pipeline(hw, o);
  hw->add_option("--rows", o.rows, "Systolic rows");
  hw->add_option("--traj", o.traj, "Trajectories per batch");
  hw->add_option("--steps", o.steps, "Timesteps per trajectory");
  hw->add_option("--baseline", o.baseline, "Baseline elements per second");
  add_output(hw, o);

  auto* mem = app.add_subcommand("mem", "Bandwidth and BRAM report");
  mem->add_option("--traj", o.traj, "Trajectories");
  mem->add_option("--steps", o.steps, "Timesteps");
  mem->add_option("--element-bits", o.element_bits, "Stored element width")->check(CLI::IsMember({8, 16, 32}));
  mem->add_option("--writeback-bits", o.writeback_bits, "Result width (default: element width)")
      ->check(CLI::IsMember({8, 16, 32}));
  mem->add_flag("--no-in-place", o.no_in_place, "Store results in separate banks");
  mem->add_option("--clock", o.clock, "Clock frequency in Hz");
  mem->add_option("--dram-bandwidth", o.dram_bandwidth, "DRAM bandwidth in bytes/s");
  mem->add_option("--device-blocks", o.device_blocks, "BRAM blocks on the device");
  add_output(mem, o);

  auto* profile = app.add_subcommand("profile", "PPO phase-profile speedup model");
  profile->add_option("--system", o.system, "Profile column")->check(CLI::IsMember({"cpu-gpu", "cpu-only"}));
  profile->add_option("--accelerate", o.accelerate, "NAME=FACTOR (repeatable; FACTOR may be inf)");
  add_output(profile, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Report report;
    if (*gae) report = cmd_gae(o);
    else if (*variant) report = cmd_variant(o);
    else if (*sweep) report = cmd_sweep(o);
    else if (*hw) report = cmd_hw(o);
    else if (*mem) report = cmd_mem(o);
    else report = cmd_profile(o);
    emit(report, o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const StackError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace heppo::cli
