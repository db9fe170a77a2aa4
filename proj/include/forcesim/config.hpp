#pragma once

// Sectioned key = value config files. See docs/config.md for the schema.

#include "forcesim/harness.hpp"
#include "forcesim/stability.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace forcesim {

struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

/// Throws ConfigParse on malformed lines and duplicate sections or keys.
std::vector<IniSection> parse_ini(std::string_view text);

/// Throws IoFailure.
std::string read_text_file(const std::filesystem::path& path);

/// [scenario] [controller] [environment] [noise] [safety] [expert]
/// [disturbance.*]. Unknown sections or keys throw ConfigParse.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct SuiteSpec {
  ScenarioConfig base;
  std::vector<ControllerMode> modes;
  int seeds = 0;
  std::uint64_t seed_start = 0;
  bool undisturbed = true;
  bool disturbed = true;
};

/// Scenario sections plus [suite].
SuiteSpec parse_suite(std::string_view text);
SuiteSpec load_suite(const std::filesystem::path& path);
/// Mode-major, then seed; for each seed the undisturbed run precedes the
/// disturbed one.
std::vector<ScenarioConfig> expand_suite(const SuiteSpec& spec);

struct VerifySpec {
  std::vector<NormalDynamicsParams> grid = default_parameter_grid();
  GridOptions options;
  VerifierSettings settings;
};

/// [verify] with list-valued m, k_e, f_H and optional d (derived from the
/// controller damping rule with k = 50, xi = 2 when absent).
VerifySpec parse_verify(std::string_view text);
VerifySpec load_verify(const std::filesystem::path& path);

}  // namespace forcesim
