#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybrid/scenario.hpp"

/// Commands behind hybridctl. Reports are JSON, trajectories and tables CSV.
namespace hybrid::cli {

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_input_error = 2 };

/// Command-line overrides. An unset flag falls back to the analysis' option
/// line, then to the library default.
struct Flags {
  std::optional<double> tol;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::size_t> max_jumps;
  std::optional<double> min_dwell;
  /// Restricts simulate, verify theorem and stability to one analysis.
  std::optional<std::string> analysis;
  scn::Overrides params;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  int exit_code = exit_pass;
  /// JSON. On input errors: {"status": "input_error", "diagnostics": [...]}.
  std::string report;
  /// Files to write, in a fixed order.
  std::vector<Artifact> artifacts;
};

/// command is simulate, verify, stability, finite or demo. `target` is the
/// verify kind (control, morphism, submersion, network, theorem) or the demo
/// name, empty otherwise. `scenario` is scenario text; finite and demo ignore it.
Outcome run(std::string_view command, std::string_view target, std::string_view scenario, const Flags& flags);

/// thermostat, bouncing-ball, switched-state, switched-time,
/// networked-thermostats, stability-transport.
const std::vector<std::string>& demo_names();

/// Text of a bundled scenario by demo name; throws Error for unknown names.
std::string_view bundled_scenario(std::string_view demo);

}  // namespace hybrid::cli
