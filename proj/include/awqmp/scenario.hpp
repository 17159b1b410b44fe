#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "awqmp/energy.hpp"
#include "awqmp/model.hpp"
#include "awqmp/nodesim.hpp"
#include "awqmp/rng.hpp"

namespace awqmp {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Protocol { Echerp, Leach };

Protocol parse_protocol(std::string_view name);  // throws ConfigError on unknown names
const char* to_string(Protocol protocol);

struct Timing {
  double wait_seconds = 5.0;
  double sensor_timeout_seconds = 5.0;
  double round_seconds = 30.0;
};

// Complete, seedable description of one experiment. Scenario files are flat
// `key = value` text; the keys match the field names below (see README for
// the full table). rng_seed determines every stochastic choice of a run.
struct ScenarioConfig {
  // field and population
  double field_width_m = 100.0;
  double field_height_m = 100.0;
  int node_count = 100;
  int super_node_count = 1;
  std::optional<Position> bs_position;  // default: mid-shore, 10 m out of the water

  // traffic and schedule
  double packet_bits = 4000.0;
  int rounds_max = 2000;
  int reelection_epoch = 20;
  double cluster_fraction = 0.05;
  Protocol protocol = Protocol::Echerp;
  std::uint64_t rng_seed = 1;

  // physics
  RadioModel radio;
  SolarModel solar;
  double initial_energy_j = 0.5;
  double accumulator_capacity_j = 2.0;
  double failure_rate = 0.0;  // per round; zero keeps stock runs energy-driven
  double harvest_peak_j = 5e-4;
  std::optional<double> super_initial_energy_j;        // default 2x ordinary
  std::optional<double> super_harvest_peak_j;          // default 4x ordinary
  std::optional<double> super_accumulator_capacity_j;  // default same as ordinary

  // sensing
  SensorSuite sensors;
  WaterProfile water;
  Timing timing;
  double sensor_timeout_probability = 0.0;
  double sensing_energy_j = 5e-5;  // flat debit per emitted frame

  // optional hand placement, one position per node; empty = uniform random
  std::vector<Position> node_positions;

  Position bs() const {
    return bs_position ? *bs_position : Position(field_width_m / 2.0, -10.0);
  }
  double super_initial() const { return super_initial_energy_j.value_or(2.0 * initial_energy_j); }
  double super_harvest() const { return super_harvest_peak_j.value_or(4.0 * harvest_peak_j); }
  double super_capacity() const {
    return super_accumulator_capacity_j.value_or(accumulator_capacity_j);
  }
};

/// Parse and validate a scenario document. Unknown or duplicate keys and any
/// invariant violation raise ConfigError naming the offending key.
ScenarioConfig load_scenario(std::string_view text);

/// Apply one `key = value` assignment; shared by the loader and CLI overrides.
void set_scenario_key(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Canonical document with every default resolved; load_scenario of the
/// result reproduces the config.
std::string serialize_scenario(const ScenarioConfig& config);

/// Empty when every invariant holds; otherwise one message per violation.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Deterministic node deployment: node_count specs, positions i.i.d. uniform
/// over the field (or taken verbatim from node_positions), the first
/// super_node_count nodes Super.
std::vector<NodeSpec> generate_topology(const ScenarioConfig& config, Rng& rng);

}  // namespace awqmp
