#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "awqmp/model.hpp"
#include "awqmp/rng.hpp"

namespace awqmp {

// ---------------------------------------------------------------------------
// Acquisition state machine
//
// One cycle of the on-node firmware: boot, bring up the sensor serial lines,
// wait out the sampling interval, then read temperature, pH and conductivity
// in that fixed order and emit one measurement frame. A sensor that does not
// answer within its timeout aborts the whole cycle, which restarts from Wait.
// ---------------------------------------------------------------------------

enum class AcqPhase { Boot, SerialInit, Wait, AcqTemp, AcqPh, AcqCond, Send };
enum class AcqEvent { PowerOn, TimerExpired, DataReady, Timeout };
enum class AcqAction { None, RequestTemp, RequestPh, RequestCond, EmitFrame };

struct AcqState {
  AcqPhase phase = AcqPhase::Boot;
  double phase_elapsed_s = 0.0;
  long cycle_restarts = 0;
};

/// Raised on an event the current phase cannot accept.
class AcquisitionError : public std::logic_error {
  using std::logic_error::logic_error;
};

/// One transition. phase_elapsed resets on every transition; cycle_restarts
/// increments only when a Timeout abandons an acquisition phase.
std::pair<AcqState, AcqAction> step_acquisition(const AcqState& state, AcqEvent event);

const char* to_string(AcqPhase phase);
const char* to_string(AcqEvent event);

// ---------------------------------------------------------------------------
// Sensor measurement models
// ---------------------------------------------------------------------------

struct SensorModel {
  double min_value = 0.0;
  double max_value = 1.0;
  double resolution = 0.01;
  double accuracy = 0.0;  // absolute units, or fraction of reading when relative
  bool relative = false;  // accuracy and noise scale with the reading
  std::optional<double> noise_sigma;  // defaults to accuracy / 2
  int frame_decimals = 2;             // fixed decimals on the wire

  double sigma() const { return noise_sigma ? *noise_sigma : accuracy / 2.0; }
  double sigma_at(double truth) const {
    return relative ? sigma() * std::abs(truth) : sigma();
  }
};

// The three stock probes. The temperature documentation is inconsistent about
// the lower bound (-15 vs 15 C); the wider range is used here.
SensorModel default_temperature_sensor();   // -15..70 C, 0.1 C steps, +-0.3 C
SensorModel default_ph_sensor();            // 0..14, 0.01 steps, +-0.2
SensorModel default_conductivity_sensor();  // 0..200 mS/cm, 0.0001 steps, +-1% of reading

struct SensorSuite {
  SensorModel temperature = default_temperature_sensor();
  SensorModel ph = default_ph_sensor();
  SensorModel conductivity = default_conductivity_sensor();
};

// ---------------------------------------------------------------------------
// Synthetic water truth
// ---------------------------------------------------------------------------

/// Ground-truth field: base value + linear spatial gradient + diurnal sine.
struct WaterProfile {
  double base_temperature_c = 20.0;
  double base_ph = 7.0;
  double base_conductivity_ms_cm = 0.5;
  Eigen::Vector2d temperature_gradient{0.0, 0.0};  // units per meter, x then y
  Eigen::Vector2d ph_gradient{0.0, 0.0};
  Eigen::Vector2d conductivity_gradient{0.0, 0.0};
  double temperature_diurnal = 2.0;
  double ph_diurnal = 0.0;
  double conductivity_diurnal = 0.0;
  double day_seconds = 86400.0;
};

struct WaterTruth {
  double temperature_c = 0.0;
  double ph = 0.0;
  double conductivity_ms_cm = 0.0;
};

WaterTruth truth_at(const WaterProfile& profile, const Position& pos, double time_s);

/// Noisy reading: clamp(truth + gaussian noise, min, max), rounded half-up to
/// the sensor resolution and canonicalized to the wire's decimal grid so that
/// encoded frames round-trip bit-exactly.
double sample_sensor(const SensorModel& model, double truth, Rng& rng);

/// Half-up rounding to a resolution step, canonicalized through a fixed
/// decimal representation.
double quantize_reading(double value, double resolution, int decimals);

// ---------------------------------------------------------------------------
// Measurement frame codec
//
// Wire format, one text line per frame:
//   AWQMP,<node_id>,<seq>,<timestamp>,<temp>,<ph>,<cond>,<energy>\n
// with fixed decimals: temperature 1, pH 2, conductivity 4, energy 6.
// ---------------------------------------------------------------------------

struct MeasurementFrame {
  int node_id = 0;
  std::int64_t sequence = 0;
  std::int64_t timestamp_s = 0;
  double temperature_c = 0.0;
  double ph = 0.0;
  double conductivity_ms_cm = 0.0;
  double residual_energy_j = 0.0;
};

class FrameError : public std::runtime_error {
 public:
  enum class Kind { Malformed, OutOfRange };
  FrameError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Build a frame with all fields snapped to their wire representation.
MeasurementFrame make_frame(int node_id, std::int64_t sequence, std::int64_t timestamp_s,
                            double temperature_c, double ph, double conductivity_ms_cm,
                            double residual_energy_j);

std::string encode_frame(const MeasurementFrame& frame);

/// Inverse of encode_frame. Throws FrameError: Malformed on bad magic, field
/// count or number syntax; OutOfRange when a reading violates a sensor range.
MeasurementFrame decode_frame(std::string_view line, const SensorSuite& sensors = SensorSuite{});

}  // namespace awqmp
