#include "forcesim/report.hpp"

#include "forcesim/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <ostream>

namespace forcesim {

void write_trace_csv(std::ostream& out, const RunLog& log) {
  out << kTraceHeader << '\n';
  fmt::memory_buffer buf;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Vec3& x = log.position[i];
    const Vec3& v = log.velocity[i];
    const Vec3& f = log.force_ext[i];
    const Vec3& fc = log.force_cmd[i];
    const auto& k = log.stiffness_eigenvalues[i];
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", log.t[i],
                   x.x(), x.y(), x.z(), v.x(), v.y(), v.z(), f.x(), f.y(), f.z(), fc.x(), fc.y(), fc.z(), k[0], k[1],
                   k[2], to_string(log.phase[i]), log.contact[i], log.disturbance[i]);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void write_verify_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << kVerifyHeader << '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    const auto& p = row.params;
    if (r.skipped || r.checks.empty()) {
      fmt::print(out, "{},skipped,{},{},{},{},0,0,{}\n", r.proposition, p.m, p.d, p.k_e, p.f_H, r.pass ? 1 : 0);
      continue;
    }
    const VerificationCheck& w = r.worst();
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", r.proposition, w.name, p.m, p.d, p.k_e, p.f_H, w.measured, w.bound,
               r.pass ? 1 : 0);
  }
}

void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows) {
  out << kSuiteHeader << '\n';
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.mode), r.undisturbed_runs,
               r.undisturbed_success, r.disturbed_runs, r.disturbed_success, r.disturbed_safety_stop_rate,
               r.safety_stops, r.mean_remaining_ink_cm, r.mean_insertion_depth_mm, r.mean_opening_angle_deg,
               r.mean_peak_force);
  }
}

std::string metrics_line(const ScenarioConfig& cfg, const RunLog& log) {
  const EpisodeMetrics& m = log.metrics;
  std::string line = fmt::format("task={} mode={} seed={} success={} safety_stop={} aborted={} ticks={}",
                                 to_string(cfg.task), to_string(cfg.mode), cfg.seed, m.success ? 1 : 0,
                                 m.safety_stop ? 1 : 0, m.aborted ? 1 : 0, log.size());
  if (m.safety_stop) line += fmt::format(" stop_time={:.3f}", m.stop_time);
  switch (cfg.task) {
    case Task::WW:
      line += fmt::format(" initial_ink_cm={:.2f} remaining_ink_cm={:.2f}", m.initial_ink_cm, m.remaining_ink_cm);
      break;
    case Task::PH:
      line += fmt::format(" insertion_depth_mm={:.2f}", m.insertion_depth_mm);
      break;
    case Task::MO:
    case Task::DO:
      line += fmt::format(" opening_angle_deg={:.2f}", m.opening_angle_deg);
      break;
  }
  line += fmt::format(" peak_force_n={:.2f} policy_queries={}", m.peak_force, log.policy_queries);
  if (!log.diagnostic.empty()) line += " diagnostic=\"" + log.diagnostic + "\"";
  return line;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoFailure("cannot write " + path.string());
}

}  // namespace forcesim
