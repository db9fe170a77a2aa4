// forcesim command-line front end.
//
//   forcesim gen-demos --config FILE [--count N] [--seed S] --out FILE
//   forcesim run       --config FILE [--seed S] [--out TRACE.csv]
//   forcesim verify    [--config FILE] [--out REPORT.csv]
//   forcesim suite     --config FILE [--seed S] [--out SUMMARY.csv]
//
// Exit codes: 0 ok, 1 check failure, 2 usage or config error.

#include "forcesim/config.hpp"
#include "forcesim/demos.hpp"
#include "forcesim/errors.hpp"
#include "forcesim/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace forcesim;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t count = 1;
};

int gen_demos(const Options& o) {
  const ScenarioConfig cfg = load_scenario(o.config);
  DemoSummary summary;
  const Dataset ds = generate_dataset(cfg, o.count, o.seed.value_or(cfg.seed), &summary);
  write_dataset(o.out, ds);
  fmt::print("{}\n", summary_line(summary));
  return summary.ok() ? kOk : kCheckFailed;
}

int run(const Options& o) {
  ScenarioConfig cfg = load_scenario(o.config);
  if (o.seed) cfg.seed = *o.seed;
  const RunLog log = run_episode(cfg);
  if (!o.out.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, log);
    write_text_file(o.out, csv.str());
  }
  fmt::print("{}\n", metrics_line(cfg, log));
  return log.metrics.aborted ? kCheckFailed : kOk;
}

int verify(const Options& o) {
  const VerifySpec spec = o.config.empty() ? VerifySpec{} : load_verify(o.config);
  const auto rows = verify_grid(spec.grid, spec.settings, spec.options);
  std::ostringstream csv;
  write_verify_csv(csv, rows);
  if (!o.out.empty()) write_text_file(o.out, csv.str());
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.report.pass) continue;
    ++failed;
    const auto& w = r.report.worst();
    fmt::print(stderr, "FAIL {} m={} d={} k_e={} f_H={}: {} = {} > {}\n", r.report.proposition, r.params.m,
               r.params.d, r.params.k_e, r.params.f_H, w.name, w.measured, w.bound);
  }
  fmt::print("verify rows={} failed={}\n", rows.size(), failed);
  return failed == 0 ? kOk : kCheckFailed;
}

int suite(const Options& o) {
  SuiteSpec spec = load_suite(o.config);
  if (o.seed) spec.seed_start = *o.seed;
  const auto rows = run_suite(expand_suite(spec));
  std::ostringstream csv;
  write_suite_csv(csv, rows);
  if (!o.out.empty()) write_text_file(o.out, csv.str());
  std::cout << csv.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-aware admittance control simulator"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-demos", "Generate expert demonstrations into a dataset file");
  gen->add_option("--config", o.config, "Scenario config")->required()->check(CLI::ExistingFile);
  gen->add_option("--count", o.count, "Number of episodes")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "Base seed (default: scenario seed)");
  gen->add_option("--out", o.out, "Dataset path")->required();

  auto* run_cmd = app.add_subcommand("run", "Simulate one episode");
  run_cmd->add_option("--config", o.config, "Scenario config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", o.seed, "Override the scenario seed");
  run_cmd->add_option("--out", o.out, "Trace CSV path");

  auto* ver = app.add_subcommand("verify", "Check the stability propositions over a parameter grid");
  ver->add_option("--config", o.config, "Verifier config (default grid when absent)")->check(CLI::ExistingFile);
  ver->add_option("--out", o.out, "Report CSV path");

  auto* sui = app.add_subcommand("suite", "Run a multi-seed, multi-mode suite");
  sui->add_option("--config", o.config, "Suite config")->required()->check(CLI::ExistingFile);
  sui->add_option("--seed", o.seed, "Override the first seed");
  sui->add_option("--out", o.out, "Summary CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return gen_demos(o);
    if (*run_cmd) return run(o);
    if (*ver) return verify(o);
    if (*sui) return suite(o);
  } catch (const ConfigParse& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kUsage;
  } catch (const IoFailure& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kCheckFailed;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kCheckFailed;
  }
  return kUsage;
}
