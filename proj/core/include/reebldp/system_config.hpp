#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "reebldp/hamiltonian.hpp"

namespace reebldp {

/// Parses a system document:
///   {"hamiltonian": {"builtin": name} | {"poly": [[i, j, c], ...]},
///    "sigma": {"identity": l} | {"constant": [[...], [...]]} | {"poly": [[terms, ...], [terms, ...]]},
///    "box": [xmin, xmax, ymin, ymax]}
/// "sigma" defaults to the 2x2 identity; "box" defaults to the builtin's box.
/// Throws ConfigError on malformed input.
HamiltonianSystem system_from_json(const nlohmann::json& doc);
HamiltonianSystem load_system(const std::filesystem::path& path);

/// Canonical form of a system document (used for digests).
nlohmann::json system_to_json(const HamiltonianSystem& sys);

}  // namespace reebldp
