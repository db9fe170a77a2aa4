#include "forcesim/demos.hpp"

#include "forcesim/errors.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace forcesim {

Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t count, std::uint64_t seed, DemoSummary* summary) {
  if (count < 1) throw NonPositiveParameter("count must be >= 1");
  Dataset ds;
  ds.task = cfg.task;
  ds.horizon = static_cast<std::uint32_t>(cfg.horizon);
  DemoSummary sum;
  sum.task = cfg.task;
  sum.coverage_checked = cfg.task == Task::WW;
  sum.min_length = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = rng_stream(seed + i, 1);
    const TaskEnvironment env = build_environment(cfg.task, cfg.environment, rng);
    const Pose start = sample_start_pose(cfg.task, env, rng, cfg.environment.randomize);
    const Demonstration demo = generate_demonstration(cfg.task, env, start, cfg.expert);
    const auto tuples = extract_supervision(demo, env);
    ds.add_episode(tuples);

    sum.episodes += 1;
    sum.tuples += tuples.size();
    sum.min_length = std::min(sum.min_length, tuples.size());
    sum.max_length = std::max(sum.max_length, tuples.size());
    for (const auto& t : tuples) sum.contact_tuples += static_cast<std::size_t>(t.contact);
    if (sum.coverage_checked) {
      std::vector<Pose> wiping;
      for (std::size_t k = 0; k < demo.size(); ++k) {
        if (demo.phases[k].contact_flag() == 1) wiping.push_back(demo.poses[k]);
      }
      if (wiping_covers_all_ink(env, wiping)) sum.coverage_pass += 1;
    }
  }
  if (summary != nullptr) *summary = sum;
  return ds;
}

std::string summary_line(const DemoSummary& s) {
  std::string line = fmt::format("task={} episodes={} tuples={} contact_tuples={} min_length={} max_length={}",
                                 to_string(s.task), s.episodes, s.tuples, s.contact_tuples, s.min_length, s.max_length);
  if (s.coverage_checked) line += fmt::format(" coverage_pass={}/{}", s.coverage_pass, s.episodes);
  return line;
}

}  // namespace forcesim
