#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reebldp/reeb_graph.hpp"

namespace reebldp::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// What a run was asked to do. The digest covers everything except the
/// output locations and the wall-clock, so equal manifests give equal bytes.
struct RunManifest {
  std::string command;            // e.g. "action minimize"
  std::uint64_t seed = 0;
  nlohmann::json system;          // canonical system document or null
  nlohmann::json options;         // parsed flag values
  nlohmann::json inputs;          // name -> content digest
  std::vector<std::string> outputs;
  double wall_clock = 0.0;        // seconds

  std::string digest() const;
  /// The sidecar form, with outputs and wall-clock.
  nlohmann::json to_json() const;
};

/// Runs the tool. Returns 0 on success, 2 on ConfigError or a bad command
/// line, 1 on any other error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits.
std::string format_double(double v);

/// CSV with header t,edge_id,h; lines starting with '#' are skipped.
/// Throws ConfigError.
GraphPath read_path_csv(std::istream& in, const ReebGraph& graph);
void write_path_csv(std::ostream& out, const GraphPath& path, const std::string& digest);

/// JSON Schema of the command's output. Throws ConfigError for an unknown command.
nlohmann::json output_schema(std::string_view command);

}  // namespace reebldp::cli
