#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/report.hpp"
#include "contact_hybrid/scenarios.hpp"

namespace fs = std::filesystem;
using namespace contact_hybrid;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kUsage = 2, kDiagnostic = 3, kInvariantFailed = 4 };

struct Overrides {
  std::optional<double> delta_t, t_end, sample_dt;
  std::vector<std::string> tol;
  std::optional<std::string> zeno_policy;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--delta-t", o.delta_t, "impulse duration for the pseudo-impulse (s)");
  app->add_option("--t-end", o.t_end, "final time (s)");
  app->add_option("--sample-dt", o.sample_dt, "trajectory sampling period (s)");
  app->add_option("--tol", o.tol, "tolerance override key=value (domain, vel, lin, trend, trend_order, event_time)");
  app->add_option("--zeno-policy", o.zeno_policy, "project or abort");
  app->add_option("--seed-for-randomized-checks", o.seed, "seed of the randomized post-run checks");
  app->add_option("--output-dir", o.output_dir, "directory for output files");
}

ScenarioConfig load(const std::string& target) {
  if (fs::exists(target)) return load_scenario_file(target);
  for (const auto& s : scenario_catalog())
    if (s.name == target) return default_config(target);
  throw ValidationError(target + ": no such file or catalog scenario");
}

void apply(ScenarioConfig& c, const Overrides& o) {
  if (o.delta_t) c.run.delta_t = *o.delta_t;
  if (o.t_end) c.t_end = *o.t_end;
  if (o.sample_dt) c.run.sample_dt = *o.sample_dt;
  if (o.zeno_policy) c.run.zeno.policy = parse_zeno_policy(*o.zeno_policy);
  for (const std::string& kv : o.tol) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--tol expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("--tol " + key + ": not a number");
    }
    Tolerances& t = c.run.tol;
    if (key == "domain") t.domain = v;
    else if (key == "vel") t.vel = v;
    else if (key == "lin") t.lin = v;
    else if (key == "trend") t.trend = v;
    else if (key == "trend_order") t.trend_order = static_cast<int>(v);
    else if (key == "event_time") t.event_time = v;
    else throw ValidationError("--tol: unknown tolerance '" + key + "'");
  }
}

struct RunOutcome {
  Execution ex;
  RunReport report;
};

RunOutcome run_one(const ScenarioConfig& c, const fs::path& dir, std::uint64_t seed) {
  const BuiltScenario b = build_scenario(c);
  RunOutcome out;
  out.ex = execute(*b.system, b.mode, b.state, b.t_end, b.options);
  auto checks = check_invariants(*b.system, out.ex, b.options, seed);
  out.report = make_report(c, *b.system, out.ex, std::move(checks));
  fs::create_directories(dir);
  const fs::path traj = dir / "trajectory.csv", events = dir / "events.jsonl",
                 report = dir / "report.json", config = dir / "scenario.yaml";
  {
    std::ofstream f(traj);
    write_trajectory_csv(f, *b.system, out.ex);
  }
  {
    std::ofstream f(events);
    write_events_jsonl(f, *b.system, out.ex);
  }
  {
    std::ofstream f(config);
    f << dump_scenario(c);
  }
  out.report.files = {traj.string(), events.string(), report.string(), config.string()};
  {
    std::ofstream f(report);
    f << report_json(out.report).dump(2) << '\n';
  }
  for (const Event& e : out.ex.events)
    spdlog::debug("t={} {} {} -> {}", format_double(e.time), to_string(e.kind), b.system->mode_id(e.from),
                  b.system->mode_id(e.to));
  return out;
}

bool diagnostic(Termination t) {
  return t == Termination::NoSolution || t == Termination::MultipleSolutions ||
         t == Termination::ZenoTruncated;
}

int exit_code(const RunReport& r) {
  if (diagnostic(r.termination)) return kDiagnostic;
  if (!r.all_checks_passed()) return kInvariantFailed;
  return kOk;
}

void print_summary(const RunReport& r) {
  std::cout << "scenario " << r.scenario << ": " << to_string(r.termination) << " at t="
            << format_double(r.final_time) << ", " << r.events << " events, word";
  for (const auto& w : r.word) std::cout << ' ' << w;
  std::cout << '\n';
  if (!r.diagnostic.empty()) std::cout << "  diagnostic: " << r.diagnostic << '\n';
  for (const auto& c : r.checks)
    if (!c.passed)
      std::cout << "  check " << c.name << " FAILED at t=" << (c.time ? format_double(*c.time) : "?")
                << " margin " << format_double(c.margin) << ": " << c.detail << '\n';
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("contact_hybrid");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CONTACT_HYBRID_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("CONTACT_HYBRID_LOG: unknown level '{}'", env);
    else
      spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Hybrid rigid-body contact simulation"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string run_target;
  auto* run = app.add_subcommand("run", "run a scenario file or catalog scenario");
  run->add_option("scenario", run_target, "scenario file or catalog name")->required();
  add_overrides(run, run_o);

  Overrides sweep_o;
  std::string sweep_target, sweep_key;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a list of parameter values");
  sweep->add_option("scenario", sweep_target, "scenario file or catalog name")->required();
  sweep->add_option("parameter", sweep_key, "sweepable key, e.g. initial.impact_speed")->required();
  sweep->add_option("values", sweep_values, "parameter values");
  add_overrides(sweep, sweep_o);

  auto* list = app.add_subcommand("list", "list catalog scenarios and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*list) {
      for (const auto& s : scenario_catalog()) {
        std::cout << s.name << ": " << s.description << '\n';
        for (const auto& p : s.parameters)
          std::cout << "  parameters." << p.key << " = " << format_double(p.default_value) << ' ' << p.unit << '\n';
        for (const auto& p : s.initial)
          std::cout << "  initial." << p.key << " = " << format_double(p.default_value) << ' ' << p.unit << '\n';
      }
      return kOk;
    }
    if (*run) {
      ScenarioConfig c = load(run_target);
      apply(c, run_o);
      const RunOutcome out = run_one(c, run_o.output_dir, run_o.seed);
      print_summary(out.report);
      return exit_code(out.report);
    }
    if (sweep_values.empty()) throw ValidationError("sweep: empty value list");
    ScenarioConfig base = load(sweep_target);
    apply(base, sweep_o);
    std::vector<ScenarioConfig> configs;
    for (double v : sweep_values) {
      ScenarioConfig c = base;
      set_sweep_value(c, sweep_key, v);
      build_scenario(c);
      configs.push_back(c);
    }
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::optional<RunOutcome>> outcomes(configs.size());
    std::vector<std::string> errors(configs.size());
    for (std::size_t start = 0; start < configs.size(); start += workers) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i = start; i < std::min(configs.size(), start + workers); ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] {
          try {
            outcomes[i] = run_one(configs[i], fs::path(sweep_o.output_dir) / ("run_" + std::to_string(i)),
                                  sweep_o.seed);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }));
      for (auto& j : jobs) j.get();
    }
    std::vector<SweepRow> rows;
    int code = kOk;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (!outcomes[i]) {
        std::cerr << "value " << format_double(sweep_values[i]) << ": " << errors[i] << '\n';
        code = kDiagnostic;
        continue;
      }
      const BuiltScenario b = build_scenario(configs[i]);
      rows.push_back(summarize_sweep(*b.system, outcomes[i]->ex, sweep_values[i]));
      print_summary(outcomes[i]->report);
      code = std::max(code, exit_code(outcomes[i]->report));
    }
    fs::create_directories(sweep_o.output_dir);
    std::ofstream f(fs::path(sweep_o.output_dir) / "sweep.csv");
    write_sweep_csv(f, sweep_key, rows);
    write_sweep_csv(std::cout, sweep_key, rows);
    return code;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const ContactError& e) {
    std::cerr << e.what() << '\n';
    return kDiagnostic;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}
