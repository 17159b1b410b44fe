#include "awqmp/scenario.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace awqmp {

Protocol parse_protocol(std::string_view name) {
  if (name == "echerp") return Protocol::Echerp;
  if (name == "leach") return Protocol::Leach;
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected echerp or leach)");
}

const char* to_string(Protocol protocol) {
  return protocol == Protocol::Echerp ? "echerp" : "leach";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError(std::string(key) + ": cannot parse '" + std::string(value) + "' as " + expected);
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text(trim(value));
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad_value(key, value, "a number");
  return v;
}

int parse_int(std::string_view key, std::string_view value) {
  const std::string text(trim(value));
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    bad_value(key, value, "an integer");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  const std::string text(trim(value));
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text.front() == '-' || end != text.c_str() + text.size() ||
      errno == ERANGE) {
    bad_value(key, value, "an unsigned 64-bit integer");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, value, "a boolean (true/false)");
}

Position parse_position(std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  const std::size_t comma = v.find(',');
  if (comma == std::string_view::npos) bad_value(key, value, "a position 'x,y'");
  return Position(parse_double(key, v.substr(0, comma)), parse_double(key, v.substr(comma + 1)));
}

std::vector<Position> parse_position_list(std::string_view key, std::string_view value) {
  std::vector<Position> out;
  std::string_view rest = trim(value);
  while (!rest.empty()) {
    const std::size_t semi = rest.find(';');
    const std::string_view item =
        semi == std::string_view::npos ? rest : rest.substr(0, semi);
    out.push_back(parse_position(key, item));
    if (semi == std::string_view::npos) break;
    rest = trim(rest.substr(semi + 1));
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)>;

Setter num(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_double(k, v);
  };
}

Setter opt_num(std::optional<double> ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_double(k, v);
  };
}

Setter integer(int ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_int(k, v);
  };
}

Setter sensor_field(SensorModel SensorSuite::*sensor, double SensorModel::*field) {
  return [sensor, field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.sensors.*sensor.*field = parse_double(k, v);
  };
}

Setter sensor_sigma(SensorModel SensorSuite::*sensor) {
  return [sensor](ScenarioConfig& c, std::string_view k, std::string_view v) {
    (c.sensors.*sensor).noise_sigma = parse_double(k, v);
  };
}

Setter sensor_relative(SensorModel SensorSuite::*sensor) {
  return [sensor](ScenarioConfig& c, std::string_view k, std::string_view v) {
    (c.sensors.*sensor).relative = parse_bool(k, v);
  };
}

Setter water_num(double WaterProfile::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.water.*field = parse_double(k, v);
  };
}

Setter water_gradient(Eigen::Vector2d WaterProfile::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.water.*field = parse_position(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["field_width"] = num(&ScenarioConfig::field_width_m);
    t["field_height"] = num(&ScenarioConfig::field_height_m);
    t["node_count"] = integer(&ScenarioConfig::node_count);
    t["super_node_count"] = integer(&ScenarioConfig::super_node_count);
    t["bs_position"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.bs_position = parse_position(k, v);
    };
    t["packet_bits"] = num(&ScenarioConfig::packet_bits);
    t["rounds_max"] = integer(&ScenarioConfig::rounds_max);
    t["reelection_epoch"] = integer(&ScenarioConfig::reelection_epoch);
    t["cluster_fraction"] = num(&ScenarioConfig::cluster_fraction);
    t["protocol"] = [](ScenarioConfig& c, std::string_view, std::string_view v) {
      c.protocol = parse_protocol(trim(v));
    };
    t["rng_seed"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.rng_seed = parse_u64(k, v);
    };
    t["radio.e_elec"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.radio.e_elec_j_per_bit = parse_double(k, v);
    };
    t["radio.eps_fs"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.radio.eps_fs_j_per_bit_m2 = parse_double(k, v);
    };
    t["radio.eps_mp"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.radio.eps_mp_j_per_bit_m4 = parse_double(k, v);
    };
    t["radio.e_da"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.radio.e_da_j_per_bit_signal = parse_double(k, v);
    };
    t["solar.day_length"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.solar.day_length_rounds = parse_double(k, v);
    };
    t["solar.dawn_offset"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.solar.dawn_offset_rounds = parse_double(k, v);
    };
    t["initial_energy"] = num(&ScenarioConfig::initial_energy_j);
    t["accumulator_capacity"] = num(&ScenarioConfig::accumulator_capacity_j);
    t["failure_rate"] = num(&ScenarioConfig::failure_rate);
    t["harvest_peak"] = num(&ScenarioConfig::harvest_peak_j);
    t["super_initial_energy"] = opt_num(&ScenarioConfig::super_initial_energy_j);
    t["super_harvest_peak"] = opt_num(&ScenarioConfig::super_harvest_peak_j);
    t["super_accumulator_capacity"] = opt_num(&ScenarioConfig::super_accumulator_capacity_j);

    const std::pair<const char*, SensorModel SensorSuite::*> sensors[] = {
        {"sensor.temperature", &SensorSuite::temperature},
        {"sensor.ph", &SensorSuite::ph},
        {"sensor.conductivity", &SensorSuite::conductivity},
    };
    for (const auto& [prefix, sensor] : sensors) {
      const std::string p(prefix);
      t[p + ".min"] = sensor_field(sensor, &SensorModel::min_value);
      t[p + ".max"] = sensor_field(sensor, &SensorModel::max_value);
      t[p + ".resolution"] = sensor_field(sensor, &SensorModel::resolution);
      t[p + ".accuracy"] = sensor_field(sensor, &SensorModel::accuracy);
      t[p + ".noise_sigma"] = sensor_sigma(sensor);
      t[p + ".relative"] = sensor_relative(sensor);
    }

    t["water.base_temperature"] = water_num(&WaterProfile::base_temperature_c);
    t["water.base_ph"] = water_num(&WaterProfile::base_ph);
    t["water.base_conductivity"] = water_num(&WaterProfile::base_conductivity_ms_cm);
    t["water.temperature_gradient"] = water_gradient(&WaterProfile::temperature_gradient);
    t["water.ph_gradient"] = water_gradient(&WaterProfile::ph_gradient);
    t["water.conductivity_gradient"] = water_gradient(&WaterProfile::conductivity_gradient);
    t["water.temperature_diurnal"] = water_num(&WaterProfile::temperature_diurnal);
    t["water.ph_diurnal"] = water_num(&WaterProfile::ph_diurnal);
    t["water.conductivity_diurnal"] = water_num(&WaterProfile::conductivity_diurnal);
    t["water.day_seconds"] = water_num(&WaterProfile::day_seconds);

    t["wait_seconds"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.timing.wait_seconds = parse_double(k, v);
    };
    t["sensor_timeout_seconds"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.timing.sensor_timeout_seconds = parse_double(k, v);
    };
    t["round_seconds"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.timing.round_seconds = parse_double(k, v);
    };
    t["sensor_timeout_probability"] = num(&ScenarioConfig::sensor_timeout_probability);
    t["sensing_energy"] = num(&ScenarioConfig::sensing_energy_j);
    t["node_positions"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.node_positions = parse_position_list(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

void set_scenario_key(ScenarioConfig& config, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end()) {
    throw ConfigError("unknown key '" + std::string(trim(key)) + "'");
  }
  it->second(config, trim(key), value);
}

ScenarioConfig load_scenario(std::string_view text) {
  ScenarioConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
    set_scenario_key(config, key, line.substr(eq + 1));
  }

  const std::vector<std::string> violations = validate_scenario(config);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }
  return config;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Position& p) { return fmt(p.x()) + "," + fmt(p.y()); }

void serialize_sensor(std::ostringstream& out, const std::string& prefix, const SensorModel& m) {
  out << prefix << ".min = " << fmt(m.min_value) << "\n";
  out << prefix << ".max = " << fmt(m.max_value) << "\n";
  out << prefix << ".resolution = " << fmt(m.resolution) << "\n";
  out << prefix << ".accuracy = " << fmt(m.accuracy) << "\n";
  out << prefix << ".noise_sigma = " << fmt(m.sigma()) << "\n";
  out << prefix << ".relative = " << (m.relative ? "true" : "false") << "\n";
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "field_width = " << fmt(c.field_width_m) << "\n";
  out << "field_height = " << fmt(c.field_height_m) << "\n";
  out << "node_count = " << c.node_count << "\n";
  out << "super_node_count = " << c.super_node_count << "\n";
  out << "bs_position = " << fmt(c.bs()) << "\n";
  out << "packet_bits = " << fmt(c.packet_bits) << "\n";
  out << "rounds_max = " << c.rounds_max << "\n";
  out << "reelection_epoch = " << c.reelection_epoch << "\n";
  out << "cluster_fraction = " << fmt(c.cluster_fraction) << "\n";
  out << "protocol = " << to_string(c.protocol) << "\n";
  out << "rng_seed = " << c.rng_seed << "\n";
  out << "radio.e_elec = " << fmt(c.radio.e_elec_j_per_bit) << "\n";
  out << "radio.eps_fs = " << fmt(c.radio.eps_fs_j_per_bit_m2) << "\n";
  out << "radio.eps_mp = " << fmt(c.radio.eps_mp_j_per_bit_m4) << "\n";
  out << "radio.e_da = " << fmt(c.radio.e_da_j_per_bit_signal) << "\n";
  out << "solar.day_length = " << fmt(c.solar.day_length_rounds) << "\n";
  out << "solar.dawn_offset = " << fmt(c.solar.dawn_offset_rounds) << "\n";
  out << "initial_energy = " << fmt(c.initial_energy_j) << "\n";
  out << "accumulator_capacity = " << fmt(c.accumulator_capacity_j) << "\n";
  out << "failure_rate = " << fmt(c.failure_rate) << "\n";
  out << "harvest_peak = " << fmt(c.harvest_peak_j) << "\n";
  out << "super_initial_energy = " << fmt(c.super_initial()) << "\n";
  out << "super_harvest_peak = " << fmt(c.super_harvest()) << "\n";
  out << "super_accumulator_capacity = " << fmt(c.super_capacity()) << "\n";
  serialize_sensor(out, "sensor.temperature", c.sensors.temperature);
  serialize_sensor(out, "sensor.ph", c.sensors.ph);
  serialize_sensor(out, "sensor.conductivity", c.sensors.conductivity);
  out << "water.base_temperature = " << fmt(c.water.base_temperature_c) << "\n";
  out << "water.base_ph = " << fmt(c.water.base_ph) << "\n";
  out << "water.base_conductivity = " << fmt(c.water.base_conductivity_ms_cm) << "\n";
  out << "water.temperature_gradient = " << fmt(Position(c.water.temperature_gradient)) << "\n";
  out << "water.ph_gradient = " << fmt(Position(c.water.ph_gradient)) << "\n";
  out << "water.conductivity_gradient = " << fmt(Position(c.water.conductivity_gradient)) << "\n";
  out << "water.temperature_diurnal = " << fmt(c.water.temperature_diurnal) << "\n";
  out << "water.ph_diurnal = " << fmt(c.water.ph_diurnal) << "\n";
  out << "water.conductivity_diurnal = " << fmt(c.water.conductivity_diurnal) << "\n";
  out << "water.day_seconds = " << fmt(c.water.day_seconds) << "\n";
  out << "wait_seconds = " << fmt(c.timing.wait_seconds) << "\n";
  out << "sensor_timeout_seconds = " << fmt(c.timing.sensor_timeout_seconds) << "\n";
  out << "round_seconds = " << fmt(c.timing.round_seconds) << "\n";
  out << "sensor_timeout_probability = " << fmt(c.sensor_timeout_probability) << "\n";
  out << "sensing_energy = " << fmt(c.sensing_energy_j) << "\n";
  if (!c.node_positions.empty()) {
    out << "node_positions = ";
    for (std::size_t i = 0; i < c.node_positions.size(); ++i) {
      if (i) out << "; ";
      out << fmt(c.node_positions[i]);
    }
    out << "\n";
  }
  return out.str();
}

namespace {

void check_sensor(std::vector<std::string>& v, const std::string& prefix, const SensorModel& m) {
  if (!(m.min_value < m.max_value)) v.push_back(prefix + ".min: must be below " + prefix + ".max");
  if (!(m.resolution > 0.0)) v.push_back(prefix + ".resolution: must be positive");
  if (m.accuracy < 0.0) v.push_back(prefix + ".accuracy: must be non-negative");
  if (m.sigma() < 0.0) v.push_back(prefix + ".noise_sigma: must be non-negative");
}

}  // namespace

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> v;
  auto require = [&v](bool ok, const char* msg) {
    if (!ok) v.push_back(msg);
  };

  require(std::isfinite(c.field_width_m) && c.field_width_m >= 0.0,
          "field_width: must be finite and non-negative");
  require(std::isfinite(c.field_height_m) && c.field_height_m >= 0.0,
          "field_height: must be finite and non-negative");
  require(c.node_count >= 1, "node_count: must be at least 1");
  require(c.super_node_count >= 0 && c.super_node_count <= c.node_count,
          "super_node_count: must be between 0 and node_count");
  require(c.bs().allFinite(), "bs_position: must be finite");
  require(std::isfinite(c.packet_bits) && c.packet_bits >= 0.0,
          "packet_bits: must be non-negative");
  require(c.rounds_max >= 0, "rounds_max: must be non-negative");
  require(c.reelection_epoch >= 1, "reelection_epoch: must be at least 1");
  require(c.cluster_fraction > 0.0 && c.cluster_fraction <= 1.0,
          "cluster_fraction: must be in (0, 1]");
  require(c.radio.e_elec_j_per_bit >= 0.0, "radio.e_elec: must be non-negative");
  require(c.radio.eps_fs_j_per_bit_m2 >= 0.0, "radio.eps_fs: must be non-negative");
  require(c.radio.eps_mp_j_per_bit_m4 >= 0.0, "radio.eps_mp: must be non-negative");
  require(c.radio.e_da_j_per_bit_signal >= 0.0, "radio.e_da: must be non-negative");
  require(c.solar.day_length_rounds >= 1.0, "solar.day_length: must be at least 1 round");
  require(std::isfinite(c.solar.dawn_offset_rounds), "solar.dawn_offset: must be finite");
  require(c.initial_energy_j >= 0.0, "initial_energy: must be non-negative");
  require(c.accumulator_capacity_j >= 0.0, "accumulator_capacity: must be non-negative");
  require(c.initial_energy_j <= c.accumulator_capacity_j,
          "initial_energy: must not exceed accumulator_capacity");
  require(c.failure_rate >= 0.0, "failure_rate: must be non-negative");
  require(c.harvest_peak_j >= 0.0, "harvest_peak: must be non-negative");
  require(c.super_initial() >= 0.0, "super_initial_energy: must be non-negative");
  require(c.super_initial() <= c.super_capacity(),
          "super_initial_energy: must not exceed super_accumulator_capacity");
  require(c.super_harvest() >= c.harvest_peak_j,
          "super_harvest_peak: must be at least the ordinary harvest_peak");
  check_sensor(v, "sensor.temperature", c.sensors.temperature);
  check_sensor(v, "sensor.ph", c.sensors.ph);
  check_sensor(v, "sensor.conductivity", c.sensors.conductivity);
  require(c.water.day_seconds > 0.0, "water.day_seconds: must be positive");
  require(c.timing.wait_seconds >= 0.0, "wait_seconds: must be non-negative");
  require(c.timing.sensor_timeout_seconds >= 0.0, "sensor_timeout_seconds: must be non-negative");
  require(c.timing.round_seconds > 0.0, "round_seconds: must be positive");
  require(c.sensor_timeout_probability >= 0.0 && c.sensor_timeout_probability <= 1.0,
          "sensor_timeout_probability: must be in [0, 1]");
  require(c.sensing_energy_j >= 0.0, "sensing_energy: must be non-negative");

  if (!c.node_positions.empty()) {
    if (static_cast<int>(c.node_positions.size()) != c.node_count) {
      v.push_back("node_positions: must list exactly node_count positions");
    }
    for (const Position& p : c.node_positions) {
      if (!p.allFinite() || p.x() < 0.0 || p.x() > c.field_width_m || p.y() < 0.0 ||
          p.y() > c.field_height_m) {
        v.push_back("node_positions: positions must lie within the field");
        break;
      }
    }
  }
  return v;
}

std::vector<NodeSpec> generate_topology(const ScenarioConfig& config, Rng& rng) {
  std::vector<NodeSpec> specs(config.node_count);
  for (int i = 0; i < config.node_count; ++i) {
    NodeSpec& s = specs[i];
    s.id = i;
    s.kind = i < config.super_node_count ? NodeKind::Super : NodeKind::Ordinary;
    if (!config.node_positions.empty()) {
      s.position = config.node_positions[i];
    } else {
      const double x = rng.uniform(0.0, config.field_width_m);
      const double y = rng.uniform(0.0, config.field_height_m);
      s.position = Position(x, y);
    }
    s.failure_rate = config.failure_rate;
    if (s.kind == NodeKind::Super) {
      s.initial_energy_j = config.super_initial();
      s.accumulator_capacity_j = config.super_capacity();
      s.harvest_peak_j = config.super_harvest();
    } else {
      s.initial_energy_j = config.initial_energy_j;
      s.accumulator_capacity_j = config.accumulator_capacity_j;
      s.harvest_peak_j = config.harvest_peak_j;
    }
  }
  return specs;
}

}  // namespace awqmp
