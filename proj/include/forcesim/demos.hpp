#pragma once

// Batch demonstration generation for dataset files.

#include "forcesim/dataset.hpp"
#include "forcesim/harness.hpp"

#include <cstdint>

namespace forcesim {

struct DemoSummary {
  Task task = Task::WW;
  std::size_t episodes = 0;
  std::size_t tuples = 0;
  std::size_t contact_tuples = 0;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  /// WW only: episodes whose contact poses erase every inked cell.
  std::size_t coverage_pass = 0;
  bool coverage_checked = false;

  bool ok() const { return !coverage_checked || coverage_pass == episodes; }
};

/// Episode i uses the scene of run_episode with seed + i, so a dataset entry
/// and the matching simulated episode share object pose and start pose.
Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t count, std::uint64_t seed,
                         DemoSummary* summary = nullptr);

std::string summary_line(const DemoSummary& s);

}  // namespace forcesim
