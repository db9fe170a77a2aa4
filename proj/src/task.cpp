#include "forcesim/task.hpp"

namespace forcesim {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::MO: return "MO";
    case Task::PH: return "PH";
    case Task::WW: return "WW";
    case Task::DO: return "DO";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::MO, Task::PH, Task::WW, Task::DO}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

double task_time_limit(Task task) { return task == Task::PH ? 60.0 : 120.0; }

}  // namespace forcesim
