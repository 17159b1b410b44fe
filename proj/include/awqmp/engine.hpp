#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "awqmp/scenario.hpp"

namespace awqmp {

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One row of the per-round log. Energy tallies are cumulative from round 0;
/// alive/residual are end-of-round snapshots; frames counts this round only.
struct MetricsRecord {
  int round = 0;
  int alive = 0;
  double residual_j = 0.0;    // total stored energy, including failed nodes
  double dissipated_j = 0.0;  // cumulative radio dissipation
  double harvested_j = 0.0;   // cumulative solar energy absorbed (overflow excluded)
  double sensing_j = 0.0;     // cumulative sensing debits (not serialized to CSV)
  long frames = 0;            // frames delivered to the base station this round
};

struct Metrics {
  std::vector<MetricsRecord> rounds;
  // Lifetime summary over the sensing (ordinary) population; -1 = not reached.
  int first_death_round = -1;
  int half_death_round = -1;
  int last_death_round = -1;
  long total_frames = 0;
  double initial_energy_j = 0.0;
};

/// Run one scenario to completion (rounds_max, or until every ordinary node
/// is dead). Deterministic: a config and seed fully determine the result.
Metrics simulate(const ScenarioConfig& config);

/// Run the same scenario once per named protocol ("echerp"/"leach") with an
/// identical seed and therefore identical topology; the protocol is the only
/// varied field. Throws ConfigError on an unknown protocol name.
std::map<std::string, Metrics> compare(const ScenarioConfig& config,
                                       const std::vector<std::string>& protocols);

// CSV layout: header `round,alive,residual_j,dissipated_j,harvested_j,frames`,
// one row per round with 6-decimal fixed-point energies, then the summary as
// trailing `#`-prefixed comment lines (omitted when there are no rounds).
void write_metrics_csv(const Metrics& metrics, std::ostream& out);
void write_metrics_csv(const Metrics& metrics, const std::filesystem::path& path);
std::string metrics_to_csv(const Metrics& metrics);

}  // namespace awqmp
