#pragma once

// CSV writers for traces, verification reports and suite summaries.

#include "forcesim/harness.hpp"
#include "forcesim/stability.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace forcesim {

/// t,x,y,z,vx,vy,vz,fx,fy,fz,fcx,fcy,fcz,k1,k2,k3,phase,contact,disturbance
inline constexpr std::string_view kTraceHeader =
    "t,x,y,z,vx,vy,vz,fx,fy,fz,fcx,fcy,fcz,k1,k2,k3,phase,contact,disturbance";
void write_trace_csv(std::ostream& out, const RunLog& log);

/// proposition,check,m,d,k_e,f_H,measured,bound,pass (worst check per report)
inline constexpr std::string_view kVerifyHeader = "proposition,check,m,d,k_e,f_H,measured,bound,pass";
void write_verify_csv(std::ostream& out, const std::vector<GridRow>& rows);

inline constexpr std::string_view kSuiteHeader =
    "mode,undisturbed_runs,undisturbed_success,disturbed_runs,disturbed_success,disturbed_safety_stop_rate,"
    "safety_stops,mean_remaining_ink_cm,mean_insertion_depth_mm,mean_opening_angle_deg,mean_peak_force_n";
void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows);

/// key=value summary of an episode.
std::string metrics_line(const ScenarioConfig& cfg, const RunLog& log);

/// Writes `content` to `path` atomically enough for CLI use. Throws IoFailure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace forcesim
