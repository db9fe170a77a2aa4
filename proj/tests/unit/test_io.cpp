#include <catch_amalgamated.hpp>

#include "forcesim/config.hpp"
#include "forcesim/dataset.hpp"
#include "forcesim/demos.hpp"
#include "forcesim/errors.hpp"
#include "forcesim/report.hpp"

#include <filesystem>
#include <sstream>
#include <string>

using namespace forcesim;

namespace {

int error_line(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ConfigParse& e) {
    return e.line();
  }
  return -1;
}

std::string error_field(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ConfigParse& e) {
    return e.field();
  }
  return "<none>";
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("ini syntax") {
  const auto sections = parse_ini("# c\n[a]\nx = 1\n; c\n\n[b]\ny=two words\n");
  REQUIRE(sections.size() == 2);
  CHECK(sections[0].name == "a");
  CHECK(sections[0].entries[0].key == "x");
  CHECK(sections[0].entries[0].line == 3);
  CHECK(sections[1].entries[0].value == "two words");

  CHECK_THROWS_AS(parse_ini("x = 1\n"), ConfigParse);
  CHECK_THROWS_AS(parse_ini("[a]\nnot a pair\n"), ConfigParse);
  CHECK_THROWS_AS(parse_ini("[a\n"), ConfigParse);
  CHECK_THROWS_AS(parse_ini("[a]\nx=1\nx=2\n"), ConfigParse);
  CHECK_THROWS_AS(parse_ini("[a]\n[a]\n"), ConfigParse);
}

TEST_CASE("scenario errors name line and field") {
  CHECK(error_line("[scenario]\ntask = WW\n[bogus]\n") == 3);
  CHECK(error_field("[scenario]\ntask = WW\nspeed = 3\n") == "scenario.speed");
  CHECK(error_line("[scenario]\ntask = WW\nspeed = 3\n") == 3);
  CHECK(error_line("[scenario]\ntask = XX\n") == 2);
  CHECK(error_field("[scenario]\ntask = WW\n[controller]\nmass = heavy\n") == "controller.mass");
  CHECK(error_field("[scenario]\ntask = WW\n[controller]\nmass = nan\n") == "controller.mass");
  CHECK(error_field("[scenario]\ntask = WW\nmode = stiff\n") == "scenario.mode");
  CHECK(error_field("[scenario]\nmode = force_aware\n") == "scenario.task");
  CHECK(error_field("[scenario]\ntask = WW\n[disturbance.a]\nstart = 1\n") == "disturbance.a.kind");
  CHECK_THROWS_AS(parse_scenario("[scenario]\ntask = PH\nduration = 61\n"), ConfigParse);
  CHECK_THROWS_AS(parse_scenario("[scenario]\ntask = WW\n[controller]\nmass = 0\n"), ConfigParse);
  CHECK_THROWS_AS(parse_scenario("[scenario]\ntask = WW\nstop_on_success = maybe\n"), ConfigParse);
  CHECK_THROWS_AS(parse_scenario("[scenario]\ntask = WW\n[disturbance.a]\nkind = lower\nduration = 1\nramp = 2\n"),
                  ConfigParse);
}

TEST_CASE("scenario values") {
  const ScenarioConfig ph = parse_scenario("[scenario]\ntask = PH\n");
  CHECK(ph.duration == task_time_limit(Task::PH));
  CHECK(ph.mode == ControllerMode::ForceAware);

  const ScenarioConfig cfg = parse_scenario(
      "[scenario]\ntask = MO\nmode = baseline_mid\nseed = 9\nduration = 30\nstop_on_success = yes\n"
      "disturbance_anchor = contact\n"
      "[noise]\npos_std = 0.01\nseed = 4\n"
      "[expert]\nmicrowave_target_deg = 90\n"
      "[disturbance.push]\nkind = force_pulse\nstart = 2\nduration = 0.5\nmagnitude = 10\n"
      "direction = 1, 0, 0\n");
  CHECK(cfg.task == Task::MO);
  CHECK(cfg.mode == ControllerMode::BaselineMid);
  CHECK(cfg.seed == 9);
  CHECK(cfg.duration == 30.0);
  CHECK(cfg.stop_on_success);
  CHECK(cfg.anchor == DisturbanceAnchor::ContactStart);
  CHECK(cfg.noise.pos_std == 0.01);
  CHECK(cfg.noise.seed == 4);
  CHECK_THAT(cfg.expert.microwave_target, Catch::Matchers::WithinAbs(std::acos(-1.0) / 2, 1e-15));
  REQUIRE(cfg.disturbances.size() == 1);
  CHECK(cfg.disturbances[0].kind == DisturbanceKind::ForcePulse);
  CHECK(cfg.disturbances[0].magnitude == 10.0);
  CHECK(cfg.disturbances[0].direction == Vec3(1, 0, 0));
}

TEST_CASE("suite expansion order") {
  const SuiteSpec spec = parse_suite(
      "[scenario]\ntask = WW\nduration = 10\n"
      "[disturbance.raise]\nkind = raise\nstart = 1\nduration = 1\nmagnitude = 0.05\n"
      "[suite]\nmodes = force_aware baseline_high\nseeds = 3\nseed_start = 10\n");
  const auto runs = expand_suite(spec);
  REQUIRE(runs.size() == 12);
  CHECK(runs[0].mode == ControllerMode::ForceAware);
  CHECK(runs[0].seed == 10);
  CHECK(runs[0].disturbances.empty());
  CHECK(runs[1].seed == 10);
  CHECK(runs[1].disturbances.size() == 1);
  CHECK(runs[2].seed == 11);
  CHECK(runs[6].mode == ControllerMode::BaselineHigh);
  CHECK(runs[11].seed == 12);

  SuiteSpec only = spec;
  only.disturbed = false;
  CHECK(expand_suite(only).size() == 6);

  CHECK_THROWS_AS(parse_suite("[scenario]\ntask = WW\n"), ConfigParse);
  CHECK_THROWS_AS(parse_suite("[scenario]\ntask = WW\n[suite]\nmodes = fast\nseeds = 1\n"), ConfigParse);
  const SuiteSpec empty = parse_suite("[scenario]\ntask = WW\n[suite]\nmodes = force_aware\nseeds = 0\n");
  CHECK(expand_suite(empty).empty());
}

TEST_CASE("verify grid config") {
  const VerifySpec def = parse_verify("");
  CHECK(def.grid.size() == 27);
  const VerifySpec custom = parse_verify("[verify]\nm = 1\nk_e = 1000 5000\nf_H = 4\nd = 20 30\nomega = 3\n");
  CHECK(custom.grid.size() == 4);
  CHECK(custom.options.omega == 3.0);
  CHECK_THROWS_AS(parse_verify("[verify]\nd = 0\n"), ConfigParse);
  CHECK_THROWS_AS(parse_verify("[verify]\nm = -1\n"), ConfigParse);
  CHECK_THROWS_AS(parse_verify("[verify]\ndt = 0\n"), ConfigParse);
  CHECK_THROWS_AS(parse_verify("[verify]\nspeed = 1\n"), ConfigParse);
}

TEST_CASE("verify csv has one row per proposition and grid point") {
  const VerifySpec spec = parse_verify("[verify]\nm = 1\nk_e = 1000\nf_H = 4\nprop3_duration = 10\n");
  const auto rows = verify_grid(spec.grid, spec.settings, spec.options);
  std::ostringstream out;
  write_verify_csv(out, rows);
  const std::string s = out.str();
  CHECK(s.rfind(std::string(kVerifyHeader) + "\n", 0) == 0);
  CHECK(count_lines(s) == 1 + rows.size());
  CHECK(rows.size() == 4);
}

TEST_CASE("dataset round trip") {
  ScenarioConfig cfg;
  cfg.task = Task::WW;
  DemoSummary summary;
  const Dataset ds = generate_dataset(cfg, 5, 77, &summary);
  CHECK(summary.episodes == 5);
  CHECK(summary.ok());
  CHECK(ds.episode_lengths.size() == 5);
  CHECK(ds.tuples.size() == summary.tuples);

  const std::string bytes = encode_dataset(ds);
  CHECK(bytes.size() == 4 + 3 * 4 + 2 * 8 + 5 * 8 + ds.tuples.size() * kRecordDoubles * 8);
  CHECK(decode_dataset(bytes) == ds);
  CHECK(encode_dataset(generate_dataset(cfg, 5, 77)) == bytes);
  CHECK(encode_dataset(generate_dataset(cfg, 5, 78)) != bytes);

  const auto path = std::filesystem::temp_directory_path() / "forcesim_io_test.fsds";
  write_dataset(path, ds);
  CHECK(read_dataset(path) == ds);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_dataset(path), IoFailure);
}

TEST_CASE("dataset corruption is rejected") {
  ScenarioConfig cfg;
  cfg.task = Task::PH;
  const Dataset ds = generate_dataset(cfg, 2, 3);
  const std::string good = encode_dataset(ds);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_dataset(bad_magic), IoFailure);
  CHECK_THROWS_AS(decode_dataset(good.substr(0, good.size() - 3)), IoFailure);
  CHECK_THROWS_AS(decode_dataset(good + "x"), IoFailure);
  CHECK_THROWS_AS(decode_dataset(""), IoFailure);

  std::string bad_version = good;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_dataset(bad_version), IoFailure);

  // First rotation column zeroed: not a rotation.
  std::string bad_rot = good;
  const std::size_t rec0 = 4 + 12 + 16 + ds.episode_lengths.size() * 8;
  for (std::size_t i = rec0 + 3 * 8; i < rec0 + 6 * 8; ++i) bad_rot[i] = 0;
  CHECK_THROWS_AS(decode_dataset(bad_rot), DegenerateInput);

  Dataset mismatch = ds;
  mismatch.episode_lengths.back() += 1;
  CHECK_THROWS_AS(encode_dataset(mismatch), LengthMismatch);
}

TEST_CASE("trace and suite csv") {
  ScenarioConfig cfg;
  cfg.task = Task::WW;
  cfg.duration = 1.5;
  const RunLog log = run_episode(cfg);
  std::ostringstream out;
  write_trace_csv(out, log);
  CHECK(out.str().rfind(std::string(kTraceHeader) + "\n", 0) == 0);
  CHECK(count_lines(out.str()) == 1 + log.size());

  std::ostringstream suite;
  write_suite_csv(suite, {});
  CHECK(suite.str() == std::string(kSuiteHeader) + "\n");

  const std::string line = metrics_line(cfg, log);
  CHECK(line.find("task=WW") != std::string::npos);
  CHECK(line.find("remaining_ink_cm=") != std::string::npos);
}

TEST_CASE("shipped configs load") {
  const std::filesystem::path dir = FORCESIM_CONFIG_DIR;
  for (const char* name : {"ww_force_aware.ini", "ww_lower.ini", "ph.ini", "mo.ini", "do.ini", "gen_demos_ww.ini"}) {
    INFO(name);
    CHECK_NOTHROW(load_scenario(dir / name));
  }
  CHECK(expand_suite(load_suite(dir / "ww_suite.ini")).size() == 200);
  CHECK(load_verify(dir / "verify.ini").grid.size() == 27);
  CHECK_THROWS_AS(load_scenario(dir / "missing.ini"), IoFailure);
}
