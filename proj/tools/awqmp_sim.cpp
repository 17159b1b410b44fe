// Command-line front end: run single scenarios, protocol comparisons and
// parameter sweeps, or just validate a scenario file.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "awqmp/engine.hpp"

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw awqmp::IoError("cannot read scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw awqmp::IoError("failed reading scenario file '" + path.string() + "'");
  }
  return buf.str();
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

awqmp::ScenarioConfig load_with_seed(const std::string& scenario_path,
                                     const std::optional<std::uint64_t>& seed) {
  awqmp::ScenarioConfig config = awqmp::load_scenario(read_file(scenario_path));
  if (seed) config.rng_seed = *seed;
  return config;
}

void print_summary(const std::string& label, const awqmp::Metrics& m) {
  std::cout << label << ": rounds=" << m.rounds.size() << " first_death=" << m.first_death_round
            << " half_death=" << m.half_death_round << " last_death=" << m.last_death_round
            << " frames=" << m.total_frames;
  if (!m.rounds.empty()) {
    std::cout << " dissipated_j=" << m.rounds.back().dissipated_j;
  }
  std::cout << "\n";
}

int run_command(const std::string& scenario_path, const std::string& out_path,
                const std::optional<std::uint64_t>& seed) {
  const awqmp::ScenarioConfig config = load_with_seed(scenario_path, seed);
  const awqmp::Metrics metrics = awqmp::simulate(config);
  awqmp::write_metrics_csv(metrics, fs::path(out_path));
  print_summary(awqmp::to_string(config.protocol), metrics);
  return 0;
}

int compare_command(const std::string& scenario_path, const std::string& protocols_arg,
                    int seed_count, const std::string& out_dir,
                    const std::optional<std::uint64_t>& seed) {
  if (seed_count < 1) throw awqmp::ConfigError("--seeds: must be at least 1");
  const std::vector<std::string> protocols = split_list(protocols_arg, ',');
  awqmp::ScenarioConfig config = load_with_seed(scenario_path, seed);
  fs::create_directories(out_dir);

  const std::uint64_t base_seed = config.rng_seed;
  for (int s = 0; s < seed_count; ++s) {
    config.rng_seed = base_seed + static_cast<std::uint64_t>(s);
    const auto results = awqmp::compare(config, protocols);
    for (const auto& [name, metrics] : results) {
      const fs::path out =
          fs::path(out_dir) / (name + "-seed" + std::to_string(config.rng_seed) + ".csv");
      awqmp::write_metrics_csv(metrics, out);
      print_summary(name + " seed=" + std::to_string(config.rng_seed), metrics);
    }
  }
  return 0;
}

int sweep_command(const std::string& scenario_path, const std::string& set_arg,
                  const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
  const std::size_t eq = set_arg.find('=');
  if (eq == std::string::npos) {
    throw awqmp::ConfigError("--set: expected <key>=<v1,v2,...>");
  }
  const std::string key = set_arg.substr(0, eq);
  const std::vector<std::string> values = split_list(set_arg.substr(eq + 1), ',');
  if (values.empty()) throw awqmp::ConfigError("--set: no values given");

  const awqmp::ScenarioConfig base = load_with_seed(scenario_path, seed);
  fs::create_directories(out_dir);
  for (const std::string& value : values) {
    awqmp::ScenarioConfig config = base;
    awqmp::set_scenario_key(config, key, value);
    if (const auto violations = awqmp::validate_scenario(config); !violations.empty()) {
      std::string msg = "sweep value '" + value + "' is invalid:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw awqmp::ConfigError(msg);
    }
    const awqmp::Metrics metrics = awqmp::simulate(config);
    const fs::path out = fs::path(out_dir) / (key + "-" + value + ".csv");
    awqmp::write_metrics_csv(metrics, out);
    print_summary(key + "=" + value, metrics);
  }
  return 0;
}

int validate_command(const std::string& scenario_path) {
  awqmp::ScenarioConfig config;
  try {
    config = awqmp::load_scenario(read_file(scenario_path));
  } catch (const awqmp::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  const auto violations = awqmp::validate_scenario(config);
  if (violations.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << v << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-based simulator for a solar-powered water-quality sensor network"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string out_dir;
  std::string protocols_arg = "echerp,leach";
  std::string set_arg;
  int seed_count = 1;
  std::optional<std::uint64_t> seed_override;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_override, "Override the scenario file's rng_seed");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario and write a metrics CSV");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_path, "Output CSV path")->required();
  add_seed(run);

  CLI::App* cmp = app.add_subcommand("compare", "Run several protocols on identical topologies");
  cmp->add_option("--scenario", scenario_path, "Scenario file")->required();
  cmp->add_option("--protocols", protocols_arg, "Comma-separated protocol list");
  cmp->add_option("--seeds", seed_count, "Number of consecutive seeds to run");
  cmp->add_option("--out-dir", out_dir, "Directory for per-run CSVs")->required();
  add_seed(cmp);

  CLI::App* sweep = app.add_subcommand("sweep", "Vary one scenario key over a list of values");
  sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep->add_option("--set", set_arg, "<key>=<v1,v2,...>")->required();
  sweep->add_option("--out-dir", out_dir, "Directory for per-value CSVs")->required();
  add_seed(sweep);

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file and exit");
  validate->add_option("--scenario", scenario_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(run)) return run_command(scenario_path, out_path, seed_override);
    if (app.got_subcommand(cmp)) {
      return compare_command(scenario_path, protocols_arg, seed_count, out_dir, seed_override);
    }
    if (app.got_subcommand(sweep)) {
      return sweep_command(scenario_path, set_arg, out_dir, seed_override);
    }
    if (app.got_subcommand(validate)) return validate_command(scenario_path);
  } catch (const awqmp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const awqmp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
