#pragma once

// Binary demonstration datasets: little-endian, 64-bit floats, fixed record
// size.
//
//   char[4]  magic "FSDS"
//   u32      format version (1)
//   u32      task (0 MO, 1 PH, 2 WW, 3 DO)
//   u32      chunk horizon
//   u64      episode count E
//   u64      tuple count N
//   u64[E]   tuples per episode
//   f64[14]  x N: reference (10), normal (3), contact flag (1)

#include "forcesim/expert.hpp"
#include "forcesim/task.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace forcesim {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kRecordDoubles = 14;

struct Dataset {
  Task task = Task::WW;
  std::uint32_t horizon = 16;
  std::vector<std::uint64_t> episode_lengths;
  std::vector<SupervisionTuple> tuples;

  void add_episode(const std::vector<SupervisionTuple>& episode);
  bool operator==(const Dataset&) const = default;
};

std::string encode_dataset(const Dataset& ds);
/// Throws IoFailure on a malformed buffer, DegenerateInput on an
/// undecodable rotation.
Dataset decode_dataset(std::string_view bytes);

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace forcesim
