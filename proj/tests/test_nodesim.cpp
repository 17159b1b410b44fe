#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "awqmp/nodesim.hpp"
#include "awqmp/rng.hpp"
#include "doctest.h"

using namespace awqmp;

namespace {

struct Transition {
  AcqPhase to;
  AcqAction action;
  long restarts_delta;
};

// Frozen transition table; anything absent is illegal.
const std::map<std::pair<AcqPhase, AcqEvent>, Transition> kTable = {
    {{AcqPhase::Boot, AcqEvent::PowerOn}, {AcqPhase::SerialInit, AcqAction::None, 0}},
    {{AcqPhase::SerialInit, AcqEvent::TimerExpired}, {AcqPhase::Wait, AcqAction::None, 0}},
    {{AcqPhase::Wait, AcqEvent::TimerExpired}, {AcqPhase::AcqTemp, AcqAction::RequestTemp, 0}},
    {{AcqPhase::AcqTemp, AcqEvent::DataReady}, {AcqPhase::AcqPh, AcqAction::RequestPh, 0}},
    {{AcqPhase::AcqTemp, AcqEvent::Timeout}, {AcqPhase::Wait, AcqAction::None, 1}},
    {{AcqPhase::AcqPh, AcqEvent::DataReady}, {AcqPhase::AcqCond, AcqAction::RequestCond, 0}},
    {{AcqPhase::AcqPh, AcqEvent::Timeout}, {AcqPhase::Wait, AcqAction::None, 1}},
    {{AcqPhase::AcqCond, AcqEvent::DataReady}, {AcqPhase::Send, AcqAction::EmitFrame, 0}},
    {{AcqPhase::AcqCond, AcqEvent::Timeout}, {AcqPhase::Wait, AcqAction::None, 1}},
    {{AcqPhase::Send, AcqEvent::TimerExpired}, {AcqPhase::Wait, AcqAction::None, 0}},
};

const AcqPhase kAllPhases[] = {AcqPhase::Boot,   AcqPhase::SerialInit, AcqPhase::Wait,
                               AcqPhase::AcqTemp, AcqPhase::AcqPh,      AcqPhase::AcqCond,
                               AcqPhase::Send};
const AcqEvent kAllEvents[] = {AcqEvent::PowerOn, AcqEvent::TimerExpired, AcqEvent::DataReady,
                               AcqEvent::Timeout};

}  // namespace

TEST_CASE("acquisition machine: documented transitions") {
  AcqState wait;
  wait.phase = AcqPhase::Wait;
  auto [s1, a1] = step_acquisition(wait, AcqEvent::TimerExpired);
  CHECK(s1.phase == AcqPhase::AcqTemp);
  CHECK(a1 == AcqAction::RequestTemp);

  auto [s2, a2] = step_acquisition(s1, AcqEvent::Timeout);
  CHECK(s2.phase == AcqPhase::Wait);
  CHECK(a2 == AcqAction::None);
  CHECK(s2.cycle_restarts == wait.cycle_restarts + 1);

  AcqState cond;
  cond.phase = AcqPhase::AcqCond;
  auto [s3, a3] = step_acquisition(cond, AcqEvent::DataReady);
  CHECK(s3.phase == AcqPhase::Send);
  CHECK(a3 == AcqAction::EmitFrame);
}

TEST_CASE("acquisition machine: exhaustive table check") {
  for (AcqPhase phase : kAllPhases) {
    for (AcqEvent event : kAllEvents) {
      AcqState s;
      s.phase = phase;
      s.phase_elapsed_s = 2.5;
      s.cycle_restarts = 7;
      const auto expected = kTable.find({phase, event});
      if (expected == kTable.end()) {
        CHECK_THROWS_AS((void)step_acquisition(s, event), AcquisitionError);
      } else {
        const auto [next, action] = step_acquisition(s, event);
        CHECK(next.phase == expected->second.to);
        CHECK(action == expected->second.action);
        CHECK(next.cycle_restarts == 7 + expected->second.restarts_delta);
        CHECK(next.phase_elapsed_s == 0.0);
      }
    }
  }
}

TEST_CASE("acquisition machine: random walks respect the cycle discipline") {
  Rng rng(31);
  for (int walk = 0; walk < 300; ++walk) {
    AcqState s;
    s = step_acquisition(s, AcqEvent::PowerOn).first;
    long restarts = 0;
    std::vector<AcqPhase> since_wait;
    for (int step = 0; step < 60; ++step) {
      // pick a random legal event for the current phase
      std::vector<AcqEvent> legal;
      for (AcqEvent e : kAllEvents) {
        if (kTable.count({s.phase, e})) legal.push_back(e);
      }
      REQUIRE(!legal.empty());
      const AcqEvent event = legal[rng.uniform_index(legal.size())];
      const auto [next, action] = step_acquisition(s, event);

      if (action == AcqAction::EmitFrame) {
        // a frame implies the full temp -> ph -> cond pass since the last Wait
        REQUIRE(since_wait.size() >= 3);
        CHECK(since_wait[since_wait.size() - 3] == AcqPhase::AcqTemp);
        CHECK(since_wait[since_wait.size() - 2] == AcqPhase::AcqPh);
        CHECK(since_wait[since_wait.size() - 1] == AcqPhase::AcqCond);
      }
      CHECK(next.cycle_restarts >= restarts);  // monotone
      if (event == AcqEvent::Timeout) {
        CHECK(next.cycle_restarts == restarts + 1);
      } else {
        CHECK(next.cycle_restarts == restarts);
      }
      restarts = next.cycle_restarts;
      if (next.phase == AcqPhase::Wait) {
        since_wait.clear();
      } else {
        since_wait.push_back(next.phase);
      }
      s = next;
    }
  }
}

TEST_CASE("water truth: constants, gradient, diurnal peak") {
  WaterProfile flat;
  flat.temperature_diurnal = 0.0;
  const WaterTruth t0 = truth_at(flat, Position(12.0, 93.0), 4321.0);
  CHECK(t0.temperature_c == flat.base_temperature_c);
  CHECK(t0.ph == flat.base_ph);
  CHECK(t0.conductivity_ms_cm == flat.base_conductivity_ms_cm);

  WaterProfile sloped = flat;
  sloped.temperature_gradient = Eigen::Vector2d(0.01, 0.0);
  const WaterTruth t1 = truth_at(sloped, Position(10.0, 50.0), 0.0);
  CHECK(t1.temperature_c == doctest::Approx(flat.base_temperature_c + 0.1).epsilon(1e-12));

  WaterProfile tidal = flat;
  tidal.temperature_diurnal = 1.0;
  const WaterTruth t2 = truth_at(tidal, Position(10.0, 50.0), tidal.day_seconds / 4.0);
  CHECK(t2.temperature_c == doctest::Approx(flat.base_temperature_c + 1.0).epsilon(1e-9));
}

TEST_CASE("sensor sampling: quantization, clamping, determinism") {
  SensorModel ph = default_ph_sensor();
  ph.noise_sigma = 0.0;
  Rng rng(5);
  CHECK(sample_sensor(ph, 7.004, rng) == 7.00);
  CHECK(sample_sensor(ph, 15.3, rng) == 14.00);
  CHECK(sample_sensor(ph, -3.0, rng) == 0.0);

  SensorModel temp = default_temperature_sensor();
  Rng noisy(8);
  for (int i = 0; i < 2000; ++i) {
    const double v = sample_sensor(temp, noisy.uniform(-20.0, 75.0), noisy);
    CHECK(v >= temp.min_value);
    CHECK(v <= temp.max_value);
    const double steps = v / temp.resolution;
    CHECK(std::abs(steps - std::llround(steps)) <= 1e-9);
  }

  // zero noise => identical readings on every draw
  SensorModel cond = default_conductivity_sensor();
  cond.noise_sigma = 0.0;
  Rng r1(9);
  Rng r2(10);
  CHECK(sample_sensor(cond, 0.53217, r1) == sample_sensor(cond, 0.53217, r2));

  // relative noise scales with the reading
  CHECK(default_conductivity_sensor().sigma_at(10.0) == doctest::Approx(0.05));
  CHECK(default_ph_sensor().sigma_at(10.0) == doctest::Approx(0.1));
}

TEST_CASE("frame encoding matches the documented layout") {
  const MeasurementFrame f = make_frame(3, 0, 0, 25.0, 7.00, 0.5, 1.0);
  CHECK(encode_frame(f) == "AWQMP,3,0,0,25.0,7.00,0.5000,1.000000\n");
}

TEST_CASE("frame codec round-trips and rejects junk") {
  Rng rng(77);
  const SensorSuite sensors;
  for (int i = 0; i < 1000; ++i) {
    const MeasurementFrame f = make_frame(
        static_cast<int>(rng.uniform_index(1000)), static_cast<std::int64_t>(rng.uniform_index(1 << 20)),
        static_cast<std::int64_t>(rng.uniform_index(1 << 30)),
        quantize_reading(rng.uniform(-15.0, 70.0), 0.1, 1),
        quantize_reading(rng.uniform(0.0, 14.0), 0.01, 2),
        quantize_reading(rng.uniform(0.0, 200.0), 0.0001, 4), rng.uniform(0.0, 2.0));
    const MeasurementFrame g = decode_frame(encode_frame(f), sensors);
    CHECK(g.node_id == f.node_id);
    CHECK(g.sequence == f.sequence);
    CHECK(g.timestamp_s == f.timestamp_s);
    CHECK(g.temperature_c == f.temperature_c);
    CHECK(g.ph == f.ph);
    CHECK(g.conductivity_ms_cm == f.conductivity_ms_cm);
    CHECK(g.residual_energy_j == f.residual_energy_j);
  }

  auto kind_of = [](const std::string& line) {
    try {
      (void)decode_frame(line);
      return std::string("ok");
    } catch (const FrameError& e) {
      return std::string(e.kind() == FrameError::Kind::Malformed ? "malformed" : "out_of_range");
    }
  };
  CHECK(kind_of("XYZ,3,0,0,25.0,7.00,0.5000,1.000000") == "malformed");
  CHECK(kind_of("AWQMP,3,0,0,25.0,7.00,0.5000") == "malformed");          // missing field
  CHECK(kind_of("AWQMP,3,0,0,25.0,7.00,0.5000,1.0,9") == "malformed");    // extra field
  CHECK(kind_of("AWQMP,3,0,0,25.0,abc,0.5000,1.000000") == "malformed");  // junk number
  CHECK(kind_of("AWQMP,-1,0,0,25.0,7.00,0.5000,1.000000") == "malformed");
  CHECK(kind_of("AWQMP,99999999999,0,0,25.0,7.00,0.5000,1.000000") == "malformed");
  CHECK(kind_of("AWQMP,3,0,0,25.0,99.0,0.5000,1.000000") == "out_of_range");  // pH beyond 14
  CHECK(kind_of("AWQMP,3,0,0,95.0,7.00,0.5000,1.000000") == "out_of_range");  // temp beyond 70
  CHECK(kind_of("") == "malformed");
}

TEST_CASE("frame codec matches the frozen golden lines byte-for-byte") {
  const std::vector<MeasurementFrame> frames = {
      make_frame(0, 0, 0, -15.0, 0.0, 0.0, 0.0),
      make_frame(3, 0, 0, 25.0, 7.0, 0.5, 1.0),
      make_frame(17, 42, 1260, 20.4, 7.12, 0.5321, 0.49995),
      make_frame(99, 123456789, 2147483647, 70.0, 14.0, 200.0, 2.0),
      make_frame(1, 1, 30, -0.1, 6.95, 0.0001, 0.00005),
      make_frame(250, 65535, 86400, 35.7, 8.33, 123.4567, 1.234567),
  };
  std::ifstream golden(std::string(AWQMP_SOURCE_DIR) + "/tests/golden/frames.txt");
  REQUIRE(golden.good());
  std::string line;
  std::size_t i = 0;
  while (std::getline(golden, line)) {
    REQUIRE(i < frames.size());
    CHECK(encode_frame(frames[i]) == line + "\n");
    const MeasurementFrame back = decode_frame(line);
    CHECK(back.node_id == frames[i].node_id);
    CHECK(back.sequence == frames[i].sequence);
    CHECK(back.timestamp_s == frames[i].timestamp_s);
    CHECK(back.temperature_c == frames[i].temperature_c);
    CHECK(back.ph == frames[i].ph);
    CHECK(back.conductivity_ms_cm == frames[i].conductivity_ms_cm);
    CHECK(back.residual_energy_j == frames[i].residual_energy_j);
    ++i;
  }
  CHECK(i == frames.size());
}

TEST_CASE("distinct frames encode to distinct lines") {
  const MeasurementFrame a = make_frame(1, 2, 3, 20.0, 7.0, 0.5, 1.0);
  MeasurementFrame b = a;
  b.ph = 7.01;
  CHECK(encode_frame(a) != encode_frame(b));
}
