#include <string>

#include "awqmp/scenario.hpp"
#include "doctest.h"

using namespace awqmp;

TEST_CASE("minimal document fills documented defaults") {
  const ScenarioConfig c = load_scenario("node_count = 10\nrng_seed = 1\n");
  CHECK(c.node_count == 10);
  CHECK(c.rng_seed == 1);
  CHECK(c.field_width_m == 100.0);
  CHECK(c.field_height_m == 100.0);
  CHECK(c.super_node_count == 1);
  CHECK(c.packet_bits == 4000.0);
  CHECK(c.rounds_max == 2000);
  CHECK(c.reelection_epoch == 20);
  CHECK(c.cluster_fraction == 0.05);
  CHECK(c.protocol == Protocol::Echerp);
  CHECK(c.bs() == Position(50.0, -10.0));
  CHECK(c.radio.e_elec_j_per_bit == 50e-9);
  CHECK(c.radio.eps_fs_j_per_bit_m2 == 10e-12);
  CHECK(c.radio.eps_mp_j_per_bit_m4 == 0.0013e-12);
  CHECK(c.radio.e_da_j_per_bit_signal == 5e-9);
  CHECK(c.initial_energy_j == 0.5);
  CHECK(c.accumulator_capacity_j == 2.0);
  CHECK(c.super_initial() == 1.0);
  CHECK(c.super_harvest() == doctest::Approx(4 * 5e-4));
  CHECK(c.super_capacity() == 2.0);
  CHECK(c.sensors.ph.resolution == 0.01);
  CHECK(c.sensors.ph.sigma() == doctest::Approx(0.1));  // accuracy/2
  CHECK(c.sensors.conductivity.relative);
  CHECK(c.timing.wait_seconds == 5.0);
  CHECK(c.timing.sensor_timeout_seconds == 5.0);
  CHECK(c.timing.round_seconds == 30.0);
  CHECK(c.sensor_timeout_probability == 0.0);
  CHECK(c.sensing_energy_j == 5e-5);
}

TEST_CASE("violations name the offending key") {
  CHECK_THROWS_WITH_AS(load_scenario("node_count = 0\n"),
                       doctest::Contains("node_count"), ConfigError);
  CHECK_THROWS_WITH_AS(load_scenario("initial_energy = 3.0\naccumulator_capacity = 2.0\n"),
                       doctest::Contains("initial_energy"), ConfigError);
  CHECK_THROWS_WITH_AS(load_scenario("nod_count = 5\n"), doctest::Contains("nod_count"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_scenario("node_count = twelve\n"), doctest::Contains("node_count"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_scenario("rng_seed = 4\nrng_seed = 5\n"),
                       doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_AS(load_scenario("protocol = pegasis\n"), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
  const ScenarioConfig c = load_scenario("# header\n\n  node_count = 4 # inline\n\n");
  CHECK(c.node_count == 4);
}

TEST_CASE("validate_scenario reports invariant violations") {
  ScenarioConfig c;
  CHECK(validate_scenario(c).empty());

  c.cluster_fraction = 0.0;
  auto v = validate_scenario(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("cluster_fraction") != std::string::npos);

  c = ScenarioConfig{};
  c.failure_rate = -1.0;
  v = validate_scenario(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("failure_rate") != std::string::npos);

  c = ScenarioConfig{};
  c.super_harvest_peak_j = 1e-5;  // below the ordinary default
  v = validate_scenario(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("super_harvest_peak") != std::string::npos);
}

TEST_CASE("load . serialize . load is idempotent") {
  const std::string doc =
      "node_count = 25\nrng_seed = 99\nprotocol = leach\nbs_position = 10,-4\n"
      "sensor.ph.noise_sigma = 0.05\nwater.temperature_gradient = 0.01,0\n";
  const ScenarioConfig once = load_scenario(doc);
  const std::string canonical = serialize_scenario(once);
  const ScenarioConfig twice = load_scenario(canonical);
  CHECK(serialize_scenario(twice) == canonical);
  CHECK(twice.node_count == 25);
  CHECK(twice.rng_seed == 99);
  CHECK(twice.protocol == Protocol::Leach);
  CHECK(twice.bs() == Position(10.0, -4.0));
  CHECK(twice.sensors.ph.sigma() == 0.05);
  CHECK(twice.water.temperature_gradient.x() == 0.01);
}

TEST_CASE("topology generation is deterministic and in bounds") {
  ScenarioConfig c;
  c.node_count = 200;
  c.super_node_count = 3;
  c.field_width_m = 120.0;
  c.field_height_m = 60.0;

  Rng r1(7);
  Rng r2(7);
  const auto a = generate_topology(c, r1);
  const auto b = generate_topology(c, r2);
  REQUIRE(a.size() == 200);
  for (int i = 0; i < 200; ++i) {
    CHECK(a[i].id == i);
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].position.x() >= 0.0);
    CHECK(a[i].position.x() <= 120.0);
    CHECK(a[i].position.y() >= 0.0);
    CHECK(a[i].position.y() <= 60.0);
    CHECK(a[i].kind == (i < 3 ? NodeKind::Super : NodeKind::Ordinary));
  }
  CHECK(a[0].initial_energy_j == doctest::Approx(2 * c.initial_energy_j));
  CHECK(a[0].harvest_peak_j == doctest::Approx(4 * c.harvest_peak_j));
  CHECK(a[5].initial_energy_j == c.initial_energy_j);
}

TEST_CASE("single node lands inside the field") {
  ScenarioConfig c;
  c.node_count = 1;
  c.super_node_count = 0;
  Rng rng(1);
  const auto specs = generate_topology(c, rng);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].position.x() >= 0.0);
  CHECK(specs[0].position.x() <= c.field_width_m);
  CHECK(specs[0].position.y() >= 0.0);
  CHECK(specs[0].position.y() <= c.field_height_m);
}

TEST_CASE("large sample mean sits near the field center") {
  ScenarioConfig c;
  c.node_count = 1000;
  c.super_node_count = 0;
  Rng rng(7);
  const auto specs = generate_topology(c, rng);
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : specs) {
    mx += s.position.x();
    my += s.position.y();
  }
  mx /= specs.size();
  my /= specs.size();
  // law of large numbers: within 5% of the center per axis
  CHECK(std::abs(mx - 50.0) <= 5.0);
  CHECK(std::abs(my - 50.0) <= 5.0);
}

TEST_CASE("hand placement is honored and validated") {
  ScenarioConfig c;
  c.node_count = 2;
  c.super_node_count = 0;
  c.node_positions = {Position(1.0, 2.0), Position(3.0, 4.0)};
  CHECK(validate_scenario(c).empty());
  Rng rng(1);
  const auto specs = generate_topology(c, rng);
  CHECK(specs[0].position == Position(1.0, 2.0));
  CHECK(specs[1].position == Position(3.0, 4.0));

  c.node_positions.pop_back();
  const auto v = validate_scenario(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("node_positions") != std::string::npos);

  c.node_positions = {Position(1.0, 2.0), Position(3.0, 1e4)};
  CHECK(!validate_scenario(c).empty());
}

TEST_CASE("set_scenario_key applies overrides") {
  ScenarioConfig c;
  set_scenario_key(c, "rounds_max", "12");
  CHECK(c.rounds_max == 12);
  set_scenario_key(c, "protocol", "leach");
  CHECK(c.protocol == Protocol::Leach);
  CHECK_THROWS_AS(set_scenario_key(c, "does_not_exist", "1"), ConfigError);
}
