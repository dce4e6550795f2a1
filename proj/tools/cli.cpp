#include "cli.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "forcecbf/scenario.hpp"
#include "forcecbf/simulator.hpp"
#include "forcecbf/trace_io.hpp"
#include "forcecbf/validation.hpp"

#ifdef FORCECBF_HAVE_TELEOP
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include "forcecbf/teleop/server.hpp"
#endif

namespace forcecbf::cli {
namespace fs = std::filesystem;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

Overrides parse_assignments(const std::vector<std::string>& items, const char* flag) {
  Overrides out;
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(item, std::string(flag) + " expects key=value");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

ScenarioConfig load(const std::string& path, const Overrides& overrides, std::optional<std::uint64_t> seed) {
  ScenarioConfig c = load_scenario(path);
  if (!overrides.empty()) c = with_overrides(c, overrides);
  if (seed) c.rng_seed = *seed;
  return c;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

// Writes the trace and summary for one run; returns the summary document.
nlohmann::json write_run(const fs::path& dir, const std::string& stem, const ScenarioConfig& config,
                         const RunResult& run, int verbose) {
  fs::create_directories(dir);
  write_file(dir / (stem + ".trace.csv"), render([&](std::ostream& o) { write_trace_csv(o, run.trace); }));
  const nlohmann::json summary = summary_document(run.summary, config);
  write_file(dir / (stem + ".summary.json"), summary.dump(2) + "\n");
  if (verbose >= 1) {
    write_file(dir / (stem + ".raw.csv"), render([&](std::ostream& o) { write_raw_wrench_csv(o, run.trace); }));
  }
  if (verbose >= 2) {
    write_file(dir / (stem + ".plant.csv"), render([&](std::ostream& o) { write_plant_csv(o, run.plant); }));
  }
  return summary;
}

std::string describe(const RunSummary& s) {
  std::ostringstream o;
  o << "ticks=" << s.ticks << " max_limit_violation=" << format_number(s.max_limit_violation)
    << " final_pose_error_norm=" << format_number(s.final_pose_error_norm)
    << " droop_max=" << format_number(s.droop_max) << " settling_time="
    << (s.settling_time ? format_number(*s.settling_time) : std::string("null"));
  return o.str();
}

struct RunArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int verbose = 0;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load(a.config, parse_assignments(a.sets, "--set"), a.seed);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const RunResult run = run_scenario(config, a.verbose >= 2);
    const std::string stem = fs::path(a.config).stem().string();
    write_run(a.out, stem, config, run, a.verbose);
    out << stem << ": " << describe(run.summary) << '\n';
  } catch (const std::exception& e) {
    err << "runtime fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
  return kOk;
}

struct SweepArgs {
  RunArgs base;
  std::vector<std::string> grid;
  unsigned jobs = 1;
};

struct Cell {
  Overrides values;
  std::string stem;
  std::string status = "ok";
  std::string message;
  std::optional<RunSummary> summary;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  ScenarioConfig base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  Overrides fixed;
  try {
    fixed = parse_assignments(a.base.sets, "--set");
    base = load(a.base.config, fixed, a.base.seed);
    for (const auto& [key, list] : parse_assignments(a.grid, "--grid")) {
      std::vector<std::string> values;
      std::size_t start = 0;
      while (true) {
        const auto comma = list.find(',', start);
        values.push_back(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      nlohmann::json doc = to_json(base);
      if (find_path(doc, key) == nullptr) throw ConfigError(key, "grid key does not exist in the schema");
      axes.emplace_back(key, values);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (axes.empty()) {
    err << "config error: sweep needs at least one --grid key=v1,v2,...\n";
    return kConfigError;
  }

  const std::string stem = fs::path(a.base.config).stem().string();
  std::vector<Cell> cells(1);
  for (const auto& [key, values] : axes) {
    std::vector<Cell> next;
    for (const Cell& c : cells) {
      for (const std::string& v : values) {
        Cell n = c;
        n.values.emplace_back(key, v);
        next.push_back(std::move(n));
      }
    }
    cells = std::move(next);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, ".cell%03zu", i);
    cells[i].stem = stem + buf;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      ScenarioConfig config;
      try {
        config = with_overrides(base, cell.values);
        if (a.base.seed) config.rng_seed = *a.base.seed;
      } catch (const ConfigError& e) {
        cell.status = "config_error";
        cell.message = e.what();
        continue;
      }
      try {
        const RunResult run = run_scenario(config, a.base.verbose >= 2);
        write_run(a.base.out, cell.stem, config, run, a.base.verbose);
        cell.summary = run.summary;
      } catch (const std::exception& e) {
        cell.status = "fault";
        cell.message = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::ostringstream table;
  table << "cell";
  for (const auto& [key, values] : axes) table << ',' << key;
  table << ",status,max_limit_violation,final_pose_error_norm,settling_time,droop_max,qp_failures\n";
  bool fault = false;
  bool config_error = false;
  for (const Cell& c : cells) {
    table << c.stem;
    for (const auto& [key, value] : c.values) table << ',' << value;
    table << ',' << c.status;
    if (c.summary) {
      const RunSummary& s = *c.summary;
      table << ',' << format_number(s.max_limit_violation) << ',' << format_number(s.final_pose_error_norm)
            << ',' << (s.settling_time ? format_number(*s.settling_time) : std::string()) << ','
            << format_number(s.droop_max) << ',' << s.qp_failures;
    } else {
      table << ",,,,,";
    }
    table << '\n';
    if (c.status == "fault") fault = true;
    if (c.status == "config_error") config_error = true;
    if (!c.message.empty()) err << c.stem << ": " << c.status << ": " << c.message << '\n';
  }
  try {
    fs::create_directories(a.base.out);
    write_file(fs::path(a.base.out) / (stem + ".sweep.csv"), table.str());
  } catch (const std::exception& e) {
    err << "runtime fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
  out << stem << ": " << cells.size() << " cells\n";
  if (fault) return kRuntimeFault;
  if (config_error) return kConfigError;
  return kOk;
}

struct ValidateArgs {
  bool json = false;
  bool skip_acceptance = false;
  std::vector<std::string> scenarios;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<validation::CriterionResult> results;
  std::vector<ScenarioConfig> configs;
  try {
    for (const std::string& path : a.scenarios) configs.push_back(load_scenario(path));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!a.skip_acceptance) results = validation::run_acceptance();
  for (const ScenarioConfig& c : configs) results.push_back(validation::scenario_safety(c));

  bool all = true;
  for (const auto& r : results) all = all && r.passed();
  if (a.json) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : results) doc.push_back(validation::to_json(r));
    out << nlohmann::json{{"passed", all}, {"results", doc}}.dump(2) << '\n';
  } else {
    for (const auto& r : results) out << validation::format_line(r) << '\n';
  }
  return all ? kOk : kValidationFailed;
}

struct ServeArgs {
  RunArgs base;
  std::string bind = "127.0.0.1:8765";
  bool turbo = false;
  double speed = 1.0;
  std::string record;
  std::int64_t max_ticks = -1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
#ifdef FORCECBF_HAVE_TELEOP
  ScenarioConfig config;
  teleop::ServeOptions opt;
  try {
    config = load(a.base.config, parse_assignments(a.base.sets, "--set"), a.base.seed);
    const auto colon = a.bind.rfind(':');
    if (colon == std::string::npos) throw ConfigError("--bind", "expected host:port");
    opt.host = a.bind.substr(0, colon);
    const int port = std::stoi(a.bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("--bind", "port out of range");
    opt.port = static_cast<unsigned short>(port);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::logic_error&) {
    err << "config error: --bind: expected host:port\n";
    return kConfigError;
  }
  opt.turbo = a.turbo;
  opt.speed = a.speed;
  opt.max_steps = a.max_ticks;
  if (!a.record.empty()) opt.record_dir = a.record;

  try {
    teleop::TeleopServer server(config, opt);
    const unsigned short port = server.listen();
    out << "serving " << config.name << " on ws://" << opt.host << ':' << port << "/  (health: http://"
        << opt.host << ':' << port << "/health)" << std::endl;
    boost::asio::io_context signals_ioc;
    boost::asio::signal_set signals(signals_ioc, SIGINT, SIGTERM);
    signals.async_wait([&server](const boost::system::error_code& ec, int) {
      if (!ec) server.stop();
    });
    std::thread signal_thread([&signals_ioc] { signals_ioc.run(); });
    server.run();
    signals_ioc.stop();
    signal_thread.join();
    out << "stopped after " << server.steps() << " steps" << std::endl;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "runtime fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
  return kOk;
#else
  (void)a;
  (void)out;
  err << "runtime fault: this build has no teleop support\n";
  return kRuntimeFault;
#endif
}

void add_run_options(CLI::App* app, RunArgs& a) {
  app->add_option("config", a.config, "Scenario JSON file")->required();
  app->add_option("--set", a.sets, "Override a field, e.g. controller.params.alpha_force=2");
  app->add_option("--seed", a.seed, "Noise seed (overrides rng_seed)");
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barrier-function force-limiting controller: simulation, validation and teleoperation"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario and write trace + summary");
  add_run_options(run_cmd, run);
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--verbose,-v", run.verbose, "1: raw wrench CSV, 2: also plant-rate poses");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  add_run_options(sweep_cmd, sweep.base);
  sweep_cmd->add_option("--out", sweep.base.out, "Output directory");
  sweep_cmd->add_option("--verbose,-v", sweep.base.verbose, "As for run");
  sweep_cmd->add_option("--grid", sweep.grid, "key=v1,v2,... (repeatable; cartesian product)")->required();
  sweep_cmd->add_option("--jobs,-j", sweep.jobs, "Parallel cells");

  ValidateArgs validate;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Run the acceptance suite and scenario safety checks");
  validate_cmd->add_flag("--json", validate.json, "Machine-readable output");
  validate_cmd->add_option("--scenario", validate.scenarios, "Also check this scenario file (repeatable)");
  validate_cmd->add_flag("--scenarios-only", validate.skip_acceptance, "Skip the acceptance suite");

  ServeArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the interactive WebSocket session");
  add_run_options(serve_cmd, serve.base);
  serve_cmd->add_option("--bind", serve.bind, "host:port (port 0 picks a free one)");
  serve_cmd->add_flag("--turbo", serve.turbo, "Do not pace to wall-clock time");
  serve_cmd->add_option("--speed", serve.speed, "Simulated seconds per wall second")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--record", serve.record, "Write trace, summary and command log here on exit");
  serve_cmd->add_option("--max-ticks", serve.max_ticks, "Stop after this many loop steps");

  std::vector<const char*> argv;
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run_cmd) return cmd_run(run, out, err);
  if (*sweep_cmd) return cmd_sweep(sweep, out, err);
  if (*validate_cmd) return cmd_validate(validate, out, err);
  return cmd_serve(serve, out, err);
}

}  // namespace forcecbf::cli
