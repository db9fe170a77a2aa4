#include "forcesim/config.hpp"
#include "forcesim/dataset.hpp"
#include "forcesim/demos.hpp"
#include "forcesim/errors.hpp"
#include "forcesim/harness.hpp"
#include "forcesim/report.hpp"
#include "forcesim/stability.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>

namespace py = pybind11;
using namespace forcesim;

namespace {

py::array_t<double> vec3_array(const std::vector<Vec3>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = v[i][j];
  return out;
}

template <class T>
py::array_t<T> array(const std::vector<T>& v) {
  py::array_t<T> out({static_cast<py::ssize_t>(v.size())}, {static_cast<py::ssize_t>(sizeof(T))});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict metrics_dict(const EpisodeMetrics& m) {
  py::dict d;
  d["success"] = m.success;
  d["safety_stop"] = m.safety_stop;
  d["aborted"] = m.aborted;
  d["stop_time"] = m.stop_time;
  d["insertion_depth_mm"] = m.insertion_depth_mm;
  d["initial_ink_cm"] = m.initial_ink_cm;
  d["remaining_ink_cm"] = m.remaining_ink_cm;
  d["opening_angle_deg"] = m.opening_angle_deg;
  d["peak_force"] = m.peak_force;
  return d;
}

py::dict log_dict(const RunLog& log) {
  py::dict d;
  d["task"] = std::string(to_string(log.task));
  d["t"] = array(log.t);
  d["position"] = vec3_array(log.position);
  d["velocity"] = vec3_array(log.velocity);
  d["force_ext"] = vec3_array(log.force_ext);
  d["force_cmd"] = vec3_array(log.force_cmd);
  d["contact"] = array(log.contact);
  d["disturbance"] = array(log.disturbance);
  py::list phase;
  for (auto p : log.phase) phase.append(std::string(to_string(p)));
  d["phase"] = phase;
  d["policy_steps"] = log.policy_steps;
  d["policy_queries"] = log.policy_queries;
  d["metrics"] = metrics_dict(log.metrics);
  d["diagnostic"] = log.diagnostic;
  return d;
}

py::list grid_rows(const std::vector<GridRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["proposition"] = r.report.proposition;
    d["m"] = r.params.m;
    d["d"] = r.params.d;
    d["k_e"] = r.params.k_e;
    d["f_H"] = r.params.f_H;
    d["skipped"] = r.report.skipped;
    d["pass"] = r.report.pass;
    py::dict checks;
    for (const auto& c : r.report.checks) checks[py::str(c.name)] = py::make_tuple(c.measured, c.bound, c.pass);
    d["checks"] = checks;
    out.append(d);
  }
  return out;
}

py::dict suite_row(const SuiteRow& r) {
  py::dict d;
  d["mode"] = std::string(to_string(r.mode));
  d["undisturbed_runs"] = r.undisturbed_runs;
  d["undisturbed_success"] = r.undisturbed_success;
  d["disturbed_runs"] = r.disturbed_runs;
  d["disturbed_success"] = r.disturbed_success;
  d["disturbed_safety_stop_rate"] = r.disturbed_safety_stop_rate;
  d["safety_stops"] = r.safety_stops;
  d["mean_remaining_ink_cm"] = r.mean_remaining_ink_cm;
  d["mean_insertion_depth_mm"] = r.mean_insertion_depth_mm;
  d["mean_opening_angle_deg"] = r.mean_opening_angle_deg;
  d["mean_peak_force"] = r.mean_peak_force;
  return d;
}

py::dict dataset_dict(const Dataset& ds) {
  const auto n = static_cast<py::ssize_t>(ds.tuples.size());
  py::array_t<double> reference({n, py::ssize_t{10}});
  py::array_t<double> normal({n, py::ssize_t{3}});
  py::array_t<int> contact({n}, {static_cast<py::ssize_t>(sizeof(int))});
  auto r = reference.mutable_unchecked<2>();
  auto nr = normal.mutable_unchecked<2>();
  auto c = contact.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& t = ds.tuples[static_cast<std::size_t>(i)];
    for (int j = 0; j < 10; ++j) r(i, j) = t.reference[j];
    for (int j = 0; j < 3; ++j) nr(i, j) = t.normal[j];
    c(i) = t.contact;
  }
  py::dict d;
  d["task"] = std::string(to_string(ds.task));
  d["horizon"] = ds.horizon;
  d["episode_lengths"] = array(ds.episode_lengths);
  d["reference"] = reference;
  d["normal"] = normal;
  d["contact"] = contact;
  return d;
}

}  // namespace

PYBIND11_MODULE(_forcesim, m) {
  m.doc() = "Force-aware admittance simulation core";

  // Later registrations are tried first, so the subclass goes second.
  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigParse>(m, "ConfigError", error.ptr());

  m.def(
      "run_episode",
      [](const std::string& config, std::optional<std::uint64_t> seed) {
        ScenarioConfig cfg = parse_scenario(config);
        if (seed) cfg.seed = *seed;
        RunLog log;
        {
          py::gil_scoped_release release;
          log = run_episode(cfg);
        }
        return log_dict(log);
      },
      py::arg("config"), py::arg("seed") = py::none(),
      "Simulate one episode from scenario config text. Returns arrays and metrics.");

  m.def(
      "trace_csv",
      [](const std::string& config, std::optional<std::uint64_t> seed) {
        ScenarioConfig cfg = parse_scenario(config);
        if (seed) cfg.seed = *seed;
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          write_trace_csv(out, run_episode(cfg));
        }
        return out.str();
      },
      py::arg("config"), py::arg("seed") = py::none(), "Episode trace as the CSV text `forcesim run` writes.");

  m.def(
      "verify",
      [](const std::string& config) {
        const VerifySpec spec = parse_verify(config);
        std::vector<GridRow> rows;
        {
          py::gil_scoped_release release;
          rows = verify_grid(spec.grid, spec.settings, spec.options);
        }
        return grid_rows(rows);
      },
      py::arg("config") = "", "Stability checks over a [verify] grid (default grid for empty text).");

  m.def(
      "run_suite",
      [](const std::string& config, std::optional<std::uint64_t> seed_start) {
        SuiteSpec spec = parse_suite(config);
        if (seed_start) spec.seed_start = *seed_start;
        std::vector<SuiteRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_suite(expand_suite(spec));
        }
        py::list out;
        for (const auto& r : rows) out.append(suite_row(r));
        return out;
      },
      py::arg("config"), py::arg("seed_start") = py::none(), "Per-mode summary rows of a suite config.");

  m.def(
      "generate_demos",
      [](const std::string& config, std::size_t count, std::optional<std::uint64_t> seed,
         std::optional<std::string> out) {
        const ScenarioConfig cfg = parse_scenario(config);
        DemoSummary summary;
        Dataset ds;
        {
          py::gil_scoped_release release;
          ds = generate_dataset(cfg, count, seed.value_or(cfg.seed), &summary);
          if (out) write_dataset(*out, ds);
        }
        py::dict d;
        d["episodes"] = summary.episodes;
        d["tuples"] = summary.tuples;
        d["contact_tuples"] = summary.contact_tuples;
        d["coverage_checked"] = summary.coverage_checked;
        d["coverage_pass"] = summary.coverage_pass;
        d["ok"] = summary.ok();
        return d;
      },
      py::arg("config"), py::arg("count"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
      "Expert demonstrations; writes a dataset file when `out` is given. Returns the summary.");

  m.def(
      "read_dataset", [](const std::string& path) { return dataset_dict(read_dataset(path)); }, py::arg("path"));

  m.def("default_grid", [] {
    py::list out;
    for (const auto& p : default_parameter_grid()) out.append(py::make_tuple(p.m, p.d, p.k_e, p.f_H));
    return out;
  });
}
