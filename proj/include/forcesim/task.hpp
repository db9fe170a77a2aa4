#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace forcesim {

/// Microwave opening, peg-in-hole, whiteboard wiping, door opening.
enum class Task { MO, PH, WW, DO };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

/// Episode time limit in seconds: 60 for PH, 120 otherwise.
double task_time_limit(Task task);

}  // namespace forcesim
