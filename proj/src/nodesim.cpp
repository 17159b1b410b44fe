#include "awqmp/nodesim.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

namespace awqmp {

namespace {

AcqState moved(const AcqState& s, AcqPhase phase, long extra_restarts = 0) {
  AcqState next = s;
  next.phase = phase;
  next.phase_elapsed_s = 0.0;
  next.cycle_restarts += extra_restarts;
  return next;
}

[[noreturn]] void illegal(const AcqState& s, AcqEvent e) {
  throw AcquisitionError(std::string("illegal event ") + to_string(e) + " in phase " +
                         to_string(s.phase));
}

}  // namespace

const char* to_string(AcqPhase phase) {
  switch (phase) {
    case AcqPhase::Boot: return "Boot";
    case AcqPhase::SerialInit: return "SerialInit";
    case AcqPhase::Wait: return "Wait";
    case AcqPhase::AcqTemp: return "AcqTemp";
    case AcqPhase::AcqPh: return "AcqPh";
    case AcqPhase::AcqCond: return "AcqCond";
    case AcqPhase::Send: return "Send";
  }
  return "?";
}

const char* to_string(AcqEvent event) {
  switch (event) {
    case AcqEvent::PowerOn: return "PowerOn";
    case AcqEvent::TimerExpired: return "TimerExpired";
    case AcqEvent::DataReady: return "DataReady";
    case AcqEvent::Timeout: return "Timeout";
  }
  return "?";
}

std::pair<AcqState, AcqAction> step_acquisition(const AcqState& state, AcqEvent event) {
  switch (state.phase) {
    case AcqPhase::Boot:
      if (event == AcqEvent::PowerOn) return {moved(state, AcqPhase::SerialInit), AcqAction::None};
      break;
    case AcqPhase::SerialInit:
      if (event == AcqEvent::TimerExpired) return {moved(state, AcqPhase::Wait), AcqAction::None};
      break;
    case AcqPhase::Wait:
      if (event == AcqEvent::TimerExpired)
        return {moved(state, AcqPhase::AcqTemp), AcqAction::RequestTemp};
      break;
    case AcqPhase::AcqTemp:
      if (event == AcqEvent::DataReady)
        return {moved(state, AcqPhase::AcqPh), AcqAction::RequestPh};
      if (event == AcqEvent::Timeout) return {moved(state, AcqPhase::Wait, 1), AcqAction::None};
      break;
    case AcqPhase::AcqPh:
      if (event == AcqEvent::DataReady)
        return {moved(state, AcqPhase::AcqCond), AcqAction::RequestCond};
      if (event == AcqEvent::Timeout) return {moved(state, AcqPhase::Wait, 1), AcqAction::None};
      break;
    case AcqPhase::AcqCond:
      if (event == AcqEvent::DataReady)
        return {moved(state, AcqPhase::Send), AcqAction::EmitFrame};
      if (event == AcqEvent::Timeout) return {moved(state, AcqPhase::Wait, 1), AcqAction::None};
      break;
    case AcqPhase::Send:
      if (event == AcqEvent::TimerExpired) return {moved(state, AcqPhase::Wait), AcqAction::None};
      break;
  }
  illegal(state, event);
}

SensorModel default_temperature_sensor() {
  SensorModel m;
  m.min_value = -15.0;
  m.max_value = 70.0;
  m.resolution = 0.1;
  m.accuracy = 0.3;
  m.relative = false;
  m.frame_decimals = 1;
  return m;
}

SensorModel default_ph_sensor() {
  SensorModel m;
  m.min_value = 0.0;
  m.max_value = 14.0;
  m.resolution = 0.01;
  m.accuracy = 0.2;
  m.relative = false;
  m.frame_decimals = 2;
  return m;
}

SensorModel default_conductivity_sensor() {
  SensorModel m;
  m.min_value = 0.0;
  m.max_value = 200.0;
  m.resolution = 0.0001;
  m.accuracy = 0.01;  // 1% of reading
  m.relative = true;
  m.frame_decimals = 4;
  return m;
}

WaterTruth truth_at(const WaterProfile& profile, const Position& pos, double time_s) {
  const double phase = std::sin(2.0 * M_PI * time_s / profile.day_seconds);
  WaterTruth t;
  t.temperature_c =
      profile.base_temperature_c + profile.temperature_gradient.dot(pos) + profile.temperature_diurnal * phase;
  t.ph = profile.base_ph + profile.ph_gradient.dot(pos) + profile.ph_diurnal * phase;
  t.conductivity_ms_cm = profile.base_conductivity_ms_cm + profile.conductivity_gradient.dot(pos) +
                         profile.conductivity_diurnal * phase;
  return t;
}

double quantize_reading(double value, double resolution, int decimals) {
  const double steps = std::floor(value / resolution + 0.5);
  // Canonicalize through the decimal text the codec will emit, so the stored
  // double equals what a decoder parses back.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, steps * resolution);
  return std::strtod(buf, nullptr);
}

double sample_sensor(const SensorModel& model, double truth, Rng& rng) {
  const double noisy = truth + rng.gaussian(0.0, model.sigma_at(truth));
  const double clamped = std::clamp(noisy, model.min_value, model.max_value);
  return quantize_reading(clamped, model.resolution, model.frame_decimals);
}

MeasurementFrame make_frame(int node_id, std::int64_t sequence, std::int64_t timestamp_s,
                            double temperature_c, double ph, double conductivity_ms_cm,
                            double residual_energy_j) {
  auto canonical = [](double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return std::strtod(buf, nullptr);
  };
  MeasurementFrame f;
  f.node_id = node_id;
  f.sequence = sequence;
  f.timestamp_s = timestamp_s;
  f.temperature_c = canonical(temperature_c, 1);
  f.ph = canonical(ph, 2);
  f.conductivity_ms_cm = canonical(conductivity_ms_cm, 4);
  f.residual_energy_j = canonical(residual_energy_j, 6);
  return f;
}

std::string encode_frame(const MeasurementFrame& frame) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "AWQMP,%d,%lld,%lld,%.1f,%.2f,%.4f,%.6f\n", frame.node_id,
                static_cast<long long>(frame.sequence), static_cast<long long>(frame.timestamp_s),
                frame.temperature_c, frame.ph, frame.conductivity_ms_cm, frame.residual_energy_j);
  return buf;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_number(std::string_view field, const char* name) {
  const std::string text(field);
  if (text.empty()) throw FrameError(FrameError::Kind::Malformed, std::string("empty ") + name);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw FrameError(FrameError::Kind::Malformed, std::string("bad number in ") + name);
  }
  return value;
}

std::int64_t parse_integer(std::string_view field, const char* name, std::int64_t min_value) {
  const std::string text(field);
  if (text.empty()) throw FrameError(FrameError::Kind::Malformed, std::string("empty ") + name);
  char* end = nullptr;
  errno = 0;
  const long long value = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE || value < min_value) {
    throw FrameError(FrameError::Kind::Malformed, std::string("bad integer in ") + name);
  }
  return value;
}

void check_range(double value, const SensorModel& model, const char* name) {
  if (value < model.min_value || value > model.max_value) {
    throw FrameError(FrameError::Kind::OutOfRange, std::string(name) + " outside sensor range");
  }
}

}  // namespace

MeasurementFrame decode_frame(std::string_view line, const SensorSuite& sensors) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  const auto fields = split_fields(line);
  if (fields.size() != 8) throw FrameError(FrameError::Kind::Malformed, "expected 8 fields");
  if (fields[0] != "AWQMP") throw FrameError(FrameError::Kind::Malformed, "bad magic");

  MeasurementFrame f;
  const std::int64_t node_id = parse_integer(fields[1], "node_id", 0);
  if (node_id > std::numeric_limits<int>::max()) {
    throw FrameError(FrameError::Kind::Malformed, "node_id too large");
  }
  f.node_id = static_cast<int>(node_id);
  f.sequence = parse_integer(fields[2], "sequence", 0);
  f.timestamp_s = parse_integer(fields[3], "timestamp", 0);
  f.temperature_c = parse_number(fields[4], "temperature");
  f.ph = parse_number(fields[5], "ph");
  f.conductivity_ms_cm = parse_number(fields[6], "conductivity");
  f.residual_energy_j = parse_number(fields[7], "energy");

  check_range(f.temperature_c, sensors.temperature, "temperature");
  check_range(f.ph, sensors.ph, "ph");
  check_range(f.conductivity_ms_cm, sensors.conductivity, "conductivity");
  if (f.residual_energy_j < 0.0) {
    throw FrameError(FrameError::Kind::Malformed, "negative energy");
  }
  return f;
}

}  // namespace awqmp
