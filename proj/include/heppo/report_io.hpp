#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "heppo/gae.hpp"
#include "heppo/harness.hpp"

namespace heppo {

using Json = nlohmann::ordered_json;

/// Parses `[{"rewards": [...], "values": [...], "bootstrap": x}, ...]`.
/// `bootstrap` may be omitted (terminal trajectory). Errors carry the byte
/// offset or the JSON path of the offending element.
std::vector<Trajectory> parse_trajectories(std::string_view text);
std::vector<Trajectory> read_trajectory_file(const std::filesystem::path& path);

Json to_json(const FidelityReport& r);
/// Pipeline and throughput fields of a consolidated report.
Json hw_json(const HwReport& r);
/// Bandwidth and BRAM fields of a consolidated report.
Json mem_json(const HwReport& r);

/// Header plus one line per element of `rows` (an array of flat objects, or a
/// single flat object). Numbers use the shortest round-trip form.
std::string to_csv(const Json& rows);

} // namespace heppo
