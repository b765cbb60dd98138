#include "heppo/report_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "heppo/error.hpp"

namespace heppo {

namespace {

std::vector<double> number_array(const Json& node, const std::string& where) {
  if (!node.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      throw ValidationError(where + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(node[i].get<double>());
  }
  return out;
}

} // namespace

std::vector<Trajectory> parse_trajectories(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError("$: expected an array of trajectories");

  std::vector<Trajectory> out;
  out.reserve(doc.size());
  for (std::size_t j = 0; j < doc.size(); ++j) {
    const std::string where = "$[" + std::to_string(j) + "]";
    const Json& node = doc[j];
    if (!node.is_object()) throw ValidationError(where + ": expected an object");
    for (const char* key : {"rewards", "values"}) {
      if (!node.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
    }
    Trajectory traj;
    traj.rewards = number_array(node["rewards"], where + ".rewards");
    traj.values = number_array(node["values"], where + ".values");
    if (node.contains("bootstrap")) {
      if (!node["bootstrap"].is_number()) throw ValidationError(where + ".bootstrap: expected a number");
      traj.bootstrap_value = node["bootstrap"].get<double>();
    }
    try {
      traj.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trajectories(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Json to_json(const FidelityReport& r) {
  Json j;
  j["variant"] = variant_index(r.variant);
  j["name"] = std::string(variant_name(r.variant));
  j["bits"] = r.bits;
  j["range"] = r.range;
  j["elements"] = r.elements;
  j["reward_mse"] = r.reward_mse;
  j["value_mse"] = r.value_mse;
  j["advantage_mse"] = r.advantage_mse;
  j["rtg_mse"] = r.rtg_mse;
  return j;
}

Json hw_json(const HwReport& r) {
  const PipelineConfig& p = r.systolic.pipeline;
  Json j;
  j["k"] = p.k;
  j["feedback_latency"] = p.feedback_latency;
  j["frontend_latency"] = p.frontend_latency;
  j["clock_hz"] = p.clock_hz;
  j["rows"] = r.systolic.rows;
  j["timesteps"] = r.layout.timesteps;
  j["trajectories"] = r.layout.num_traj;
  j["initiation_interval"] = r.initiation_interval;
  j["fill_cycles"] = r.trajectory_cycles.fill_cycles;
  j["trajectory_cycles"] = r.trajectory_cycles.total_cycles;
  j["batch_makespan_cycles"] = r.batch_makespan;
  j["per_pe_elements_per_second"] = r.per_pe_throughput;
  j["aggregate_elements_per_second"] = r.aggregate_throughput;
  j["baseline_elements_per_second"] = r.baseline_throughput;
  j["speedup_vs_baseline"] = r.speedup_vs_baseline;
  return j;
}

Json mem_json(const HwReport& r) {
  const LayoutConfig& l = r.layout;
  Json j;
  j["trajectories"] = l.num_traj;
  j["timesteps"] = l.timesteps;
  j["element_bits"] = l.element_bits;
  j["writeback_bits"] = l.result_bits();
  j["in_place"] = l.in_place;
  j["clock_hz"] = r.systolic.pipeline.clock_hz;
  j["read_bytes_per_cycle"] = r.read_bytes_per_cycle;
  j["total_bytes_per_cycle"] = r.total_bytes_per_cycle;
  j["dram_bytes_per_cycle"] = r.dram_bytes_per_cycle;
  j["dram_shortfall_bytes_per_cycle"] = r.dram_shortfall_bytes_per_cycle;
  j["storage_bytes"] = r.storage_bytes;
  j["storage_blocks"] = r.storage_blocks;
  j["bandwidth_blocks"] = r.bandwidth_blocks;
  j["device_blocks"] = r.device_blocks;
  j["storage_utilization_percent"] = r.storage_utilization_percent;
  j["bandwidth_utilization_percent"] = r.bandwidth_utilization_percent;
  return j;
}

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return fmt::format("{}", v.get<double>());
  if (v.is_number_unsigned()) return fmt::format("{}", v.get<std::uint64_t>());
  if (v.is_number_integer()) return fmt::format("{}", v.get<std::int64_t>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  if (v.is_null()) return "";
  return csv_cell(Json(v.dump()));
}

} // namespace

std::string to_csv(const Json& rows) {
  const Json table = rows.is_array() ? rows : Json::array({rows});
  if (table.empty()) return "";

  std::string out;
  bool first = true;
  for (const auto& [key, _] : table.front().items()) {
    out += first ? "" : ",";
    out += key;
    first = false;
  }
  out += '\n';
  for (const auto& row : table) {
    first = true;
    for (const auto& [key, _] : table.front().items()) {
      out += first ? "" : ",";
      out += row.contains(key) ? csv_cell(row[key]) : "";
      first = false;
    }
    out += '\n';
  }
  return out;
}

} // namespace heppo
