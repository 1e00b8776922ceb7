// mmiab: run experiments, parameter sweeps and the acceptance suite.
//
// Exit codes: 0 ok, 1 acceptance failure, 2 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmiab/config.hpp"
#include "mmiab/verify.hpp"

namespace fs = std::filesystem;
using namespace mmiab;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> snapshots;
  std::optional<int> threads;
  std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Base seed (overrides the config)");
  cmd->add_option("--snapshots", o.snapshots, "Snapshot count (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
}

void apply(const Overrides& o, ExperimentConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.snapshots) c.snapshots = *o.snapshots;
  if (o.threads) c.threads = *o.threads;
}

std::string output_path(const Overrides& o, const std::string& configured, const std::string& fallback) {
  const std::string name = configured.empty() ? fallback : configured;
  if (name.empty()) return {};
  return o.out.empty() ? name : (fs::path(o.out) / name).string();
}

std::ofstream open_out(const std::string& path) {
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

int cmd_run(const std::string& path, const Overrides& o) {
  RunConfig rc = load_config(path);
  apply(o, rc.experiment);
  const RunSummary r = run_simulation(rc.experiment);
  print_summary(std::cout, r, rc.experiment);

  const std::string csv = output_path(o, rc.output.csv, "results.csv");
  auto f = open_out(csv);
  write_csv_header(f, false);
  write_csv_rows(f, r, rc.experiment);
  const std::string json = output_path(o, rc.output.json, "summary.json");
  open_out(json) << summary_json(r, rc.experiment).dump(2) << '\n';
  std::cout << "wrote " << csv << ", " << json;
  if (const std::string trace = output_path(o, rc.output.trace, ""); !trace.empty()) {
    auto t = open_out(trace);
    write_trace(t, r, rc.experiment);
    std::cout << ", " << trace;
  }
  std::cout << '\n';
  return kOk;
}

int cmd_sweep(const std::string& path, const std::string& axis, const std::vector<std::string>& values,
              const Overrides& o) {
  if (values.empty()) {
    std::cerr << "sweep: --values must list at least one value\n";
    return kUsage;
  }
  RunConfig rc = load_config(path);
  apply(o, rc.experiment);
  std::vector<ExperimentConfig> runs;
  for (const auto& v : values) {
    ExperimentConfig c = rc.experiment;
    try {
      apply_axis(c, axis, v);
    } catch (const std::invalid_argument& e) {
      std::cerr << "sweep: " << e.what() << '\n';
      return kUsage;
    }
    runs.push_back(c);
  }

  const std::string csv = output_path(o, rc.output.csv, "sweep.csv");
  const std::string json = output_path(o, rc.output.json, "sweep_summary.json");
  auto f = open_out(csv);
  write_csv_header(f, true);
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const RunSummary r = run_simulation(runs[k]);
    std::cout << "== " << axis << " = " << values[k] << '\n';
    print_summary(std::cout, r, runs[k]);
    write_csv_rows(f, r, runs[k], axis, values[k]);
    auto j = summary_json(r, runs[k]);
    j["axis"] = axis;
    j["level"] = values[k];
    blocks.push_back(std::move(j));
  }
  open_out(json) << blocks.dump(2) << '\n';
  std::cout << "wrote " << csv << ", " << json << '\n';
  return kOk;
}

int cmd_verify(const VerifyOptions& opts, const std::vector<int>& only) {
  const auto results = run_acceptance(opts, only, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
  return failed ? kFailed : kOk;
}

int cmd_validate(const std::string& path) {
  const RunConfig rc = load_config(path);
  std::cout << path << ": ok, config " << hash_hex(config_hash(rc.experiment)) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mm-wave IAB scheduling, resource allocation and routing experiments"};
  app.require_subcommand(1);

  std::string config;
  Overrides run_o, sweep_o;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Config file")->required();
  add_overrides(run, run_o);

  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a parameter");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("--axis", axis, "ue_count | bt_enabled | duplex | switch_point")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  add_overrides(sweep, sweep_o);

  VerifyOptions vopts;
  std::vector<int> only;
  std::string fault;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--seed", vopts.seed, "Base seed");
  verify->add_option("--threads", vopts.threads, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--scale", vopts.scale, "Multiplier on instance and snapshot counts")->check(CLI::PositiveNumber);
  verify->add_option("--only", only, "Criterion ids to run")->delimiter(',')->check(CLI::Range(1, 11));
  verify->add_option("--inject-fault", fault, "Seed a known fault (waterfill)")->check(CLI::IsMember({"waterfill"}));

  auto* validate = app.add_subcommand("validate-config", "Check a config file and print its hash");
  validate->add_option("config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config, run_o);
    if (*sweep) return cmd_sweep(config, axis, values, sweep_o);
    if (*verify) {
      if (fault == "waterfill") vopts.allocator = faulty_allocate_power;
      return cmd_verify(vopts, only);
    }
    if (*validate) return cmd_validate(config);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
