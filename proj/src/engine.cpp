#include "awqmp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "awqmp/protocols.hpp"

namespace awqmp {

namespace {

// Independent stream tags under the scenario seed.
constexpr std::uint64_t kStreamTopology = 1;
constexpr std::uint64_t kStreamClusters = 2;
constexpr std::uint64_t kStreamElection = 3;
constexpr std::uint64_t kStreamSensing = 4;
constexpr std::uint64_t kStreamFailure = 5;

// Neumaier-compensated accumulator; the cumulative tallies feed a per-round
// conservation identity that must stay tight over thousands of rounds.
class KahanSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct AcquisitionOutcome {
  bool emitted = false;
};

// Drive one full acquisition cycle: boot if needed, wait, then the three
// sensor reads. timeout_stage in {0,1,2} aborts at that sensor; -1 means the
// cycle succeeds and ends back in Wait.
AcquisitionOutcome run_acquisition_cycle(AcqState& state, int timeout_stage) {
  if (state.phase == AcqPhase::Boot) {
    state = step_acquisition(state, AcqEvent::PowerOn).first;
    state = step_acquisition(state, AcqEvent::TimerExpired).first;
  }
  state = step_acquisition(state, AcqEvent::TimerExpired).first;  // Wait -> AcqTemp

  AcquisitionOutcome outcome;
  for (int stage = 0; stage < 3; ++stage) {
    if (stage == timeout_stage) {
      state = step_acquisition(state, AcqEvent::Timeout).first;
      return outcome;
    }
    const auto [next, action] = step_acquisition(state, AcqEvent::DataReady);
    state = next;
    if (action == AcqAction::EmitFrame) outcome.emitted = true;
  }
  state = step_acquisition(state, AcqEvent::TimerExpired).first;  // Send -> Wait
  return outcome;
}

}  // namespace

Metrics simulate(const ScenarioConfig& config) {
  if (const std::vector<std::string> violations = validate_scenario(config);
      !violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }

  const int n = config.node_count;
  Rng topology_rng(derive_seed(config.rng_seed, kStreamTopology));
  const std::vector<NodeSpec> specs = generate_topology(config, topology_rng);
  const Position bs = config.bs();
  const double d0 = config.radio.crossover_distance_m();
  const bool echerp = config.protocol == Protocol::Echerp;

  std::vector<NodeState> states(n);
  for (int i = 0; i < n; ++i) {
    states[i].residual_energy_j = specs[i].initial_energy_j;
    states[i].alive = specs[i].initial_energy_j > 0.0;
  }
  std::vector<AcqState> acquisition(n);
  std::vector<std::int64_t> next_sequence(n, 0);
  std::vector<int> last_head_round(n, std::numeric_limits<int>::min());

  Rng cluster_rng(derive_seed(config.rng_seed, kStreamClusters));
  Rng election_rng(derive_seed(config.rng_seed, kStreamElection));
  Rng sensing_rng(derive_seed(config.rng_seed, kStreamSensing));

  Metrics metrics;
  for (int i = 0; i < n; ++i) metrics.initial_energy_j += states[i].residual_energy_j;
  const int ordinary_total = n - std::min(config.super_node_count, n);

  auto count_alive = [&states] {
    int alive = 0;
    for (const NodeState& s : states) alive += s.alive ? 1 : 0;
    return alive;
  };
  auto count_alive_ordinary = [&] {
    int alive = 0;
    for (int i = 0; i < n; ++i) {
      alive += (states[i].alive && specs[i].kind == NodeKind::Ordinary) ? 1 : 0;
    }
    return alive;
  };

  KahanSum cum_dissipated;
  KahanSum cum_harvested;
  KahanSum cum_sensing;
  bool death_last_round = false;

  std::vector<Cluster> clusters;
  std::map<int, RotationSchedule> schedules;
  std::vector<std::uint8_t> has_frame(n, 0);

  for (int round = 0; round < config.rounds_max; ++round) {
    if (count_alive_ordinary() == 0) break;
    const int alive_at_start = count_alive();

    // 1. Hardware failures: one memoryless draw per alive node, keyed by
    //    (seed, node, round) so the failure pattern does not depend on the
    //    protocol under test.
    for (int id = 0; id < n; ++id) {
      if (!states[id].alive || specs[id].failure_rate <= 0.0) continue;
      Rng failure_rng(derive_seed(config.rng_seed, kStreamFailure, static_cast<std::uint64_t>(id),
                                  static_cast<std::uint64_t>(round)));
      if (sample_failure({specs[id].failure_rate}, 1.0, failure_rng)) {
        states[id].alive = false;  // the battery charge is stranded in the wreck
        states[id].role = Role::Member;
        states[id].cluster_id.reset();
        states[id].ch_quota_remaining = 0.0;
      }
    }

    // 2. Solar harvest into the accumulator. The LEACH baseline is
    //    homogeneous: super nodes harvest at the ordinary rate there.
    for (int id = 0; id < n; ++id) {
      if (!states[id].alive) continue;
      const double peak = (!echerp && specs[id].kind == NodeKind::Super)
                              ? config.harvest_peak_j
                              : specs[id].harvest_peak_j;
      const double amount = harvest(config.solar, peak, static_cast<double>(round));
      const auto [charged, overflow] = charge(states[id], specs[id].accumulator_capacity_j, amount);
      cum_harvested.add(charged.residual_energy_j - states[id].residual_energy_j);
      states[id] = charged;
      (void)overflow;
    }

    // 3 + 4. Clustering and head election.
    std::map<int, int> head_of_cluster;
    if (echerp) {
      if (round % config.reelection_epoch == 0 || death_last_round) {
        // Re-form clusters over the alive ordinary nodes and re-solve the
        // rotation quotas. Super nodes stay out: they are dedicated relays.
        clusters.clear();
        schedules.clear();
        std::vector<ClusterPoint> pool;
        for (int id = 0; id < n; ++id) {
          states[id].cluster_id.reset();
          if (states[id].alive && specs[id].kind == NodeKind::Ordinary) {
            pool.push_back({id, specs[id].position});
          }
        }
        if (!pool.empty()) {
          const long wanted = std::lround(config.cluster_fraction * pool.size());
          const int k = static_cast<int>(
              std::clamp<long>(wanted, 1, static_cast<long>(pool.size())));
          clusters = form_clusters(pool, k, cluster_rng);
          for (const Cluster& cluster : clusters) {
            std::map<int, double> hop_distance;
            for (int id : cluster.member_ids) {
              // Planning distance if this member were head: the base station
              // or the nearest super relay, whichever is closer.
              double d = distance(specs[id].position, bs);
              for (int s = 0; s < n; ++s) {
                if (specs[s].kind == NodeKind::Super && states[s].alive) {
                  d = std::min(d, distance(specs[id].position, specs[s].position));
                }
              }
              hop_distance[id] = d;
            }
            schedules[cluster.cluster_id] = solve_rotation(cluster, specs, states, config.radio,
                                                           config.packet_bits, hop_distance);
            for (int id : cluster.member_ids) {
              states[id].cluster_id = cluster.cluster_id;
              states[id].ch_quota_remaining = schedules[cluster.cluster_id].quotas[id];
            }
          }
        }
      }
      for (int id = 0; id < n; ++id) {
        if (states[id].alive) states[id].role = Role::Member;
      }
      for (const Cluster& cluster : clusters) {
        const bool any_alive = std::any_of(cluster.member_ids.begin(), cluster.member_ids.end(),
                                           [&](int id) { return states[id].alive; });
        if (!any_alive) continue;
        const int head = elect_head_echerp(cluster, schedules[cluster.cluster_id], states);
        head_of_cluster[cluster.cluster_id] = head;
        states[head].role = Role::ClusterHead;
      }
    } else {
      // LEACH: stochastic self-election each round, members join the nearest
      // head. All node kinds participate alike.
      const int period = std::max(1, static_cast<int>(std::floor(1.0 / config.cluster_fraction)));
      const int epoch_start = round - (round % period);
      std::vector<LeachCandidate> candidates;
      for (int id = 0; id < n; ++id) {
        if (!states[id].alive) continue;
        candidates.push_back(
            {id, states[id].residual_energy_j, last_head_round[id] < epoch_start});
      }
      const std::vector<int> heads =
          elect_heads_leach(candidates, config.cluster_fraction, round, election_rng);

      clusters.clear();
      schedules.clear();
      clusters.resize(heads.size());
      for (std::size_t c = 0; c < heads.size(); ++c) {
        clusters[c].cluster_id = static_cast<int>(c);
        clusters[c].member_ids.push_back(heads[c]);
        head_of_cluster[static_cast<int>(c)] = heads[c];
        last_head_round[heads[c]] = round;
      }
      for (int id = 0; id < n; ++id) {
        if (!states[id].alive) continue;
        states[id].role = Role::Member;
        if (std::find(heads.begin(), heads.end(), id) != heads.end()) continue;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < heads.size(); ++c) {
          const double d = distance(specs[id].position, specs[heads[c]].position);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        clusters[best].member_ids.push_back(id);
      }
      for (Cluster& cluster : clusters) {
        std::sort(cluster.member_ids.begin(), cluster.member_ids.end());
        for (int id : cluster.member_ids) states[id].cluster_id = cluster.cluster_id;
      }
      for (int head : heads) states[head].role = Role::ClusterHead;
    }

    // 5. One acquisition cycle per sensing node. Super nodes carry no probes.
    std::fill(has_frame.begin(), has_frame.end(), 0);
    for (int id = 0; id < n; ++id) {
      if (!states[id].alive || specs[id].kind != NodeKind::Ordinary) continue;
      const bool timed_out = sensing_rng.bernoulli(config.sensor_timeout_probability);
      const int timeout_stage = timed_out ? static_cast<int>(sensing_rng.uniform_index(3)) : -1;
      const AcquisitionOutcome outcome = run_acquisition_cycle(acquisition[id], timeout_stage);
      if (!outcome.emitted) continue;  // aborted cycle: no frame, no debit

      const auto [after, paid] = drain(states[id], config.sensing_energy_j);
      cum_sensing.add(states[id].residual_energy_j - after.residual_energy_j);
      states[id] = after;
      if (paid < config.sensing_energy_j) continue;  // died mid-sense, frame lost

      const double t = round * config.timing.round_seconds;
      const WaterTruth truth = truth_at(config.water, specs[id].position, t);
      const double temp = sample_sensor(config.sensors.temperature, truth.temperature_c, sensing_rng);
      const double ph = sample_sensor(config.sensors.ph, truth.ph, sensing_rng);
      const double cond =
          sample_sensor(config.sensors.conductivity, truth.conductivity_ms_cm, sensing_rng);
      const MeasurementFrame frame =
          make_frame(id, next_sequence[id]++, std::llround(t), temp, ph, cond,
                     states[id].residual_energy_j);
      (void)frame;  // the radio abstracts the payload as packet_bits
      has_frame[id] = 1;
    }

    // 6. Data exchange toward the base station.
    RoundLedger ledger;
    ledger.dissipated_j.assign(n, 0.0);
    if (!head_of_cluster.empty()) {
      std::vector<HeadPoint> head_points;
      head_points.reserve(head_of_cluster.size());
      for (const auto& [cluster_id, head] : head_of_cluster) {
        head_points.push_back({head, specs[head].position});
      }
      std::vector<HeadPoint> relays;
      if (echerp) {
        for (int id = 0; id < n; ++id) {
          if (specs[id].kind == NodeKind::Super && states[id].alive) {
            relays.push_back({id, specs[id].position});
          }
        }
      }
      const RoutePlan plan = plan_routes(head_points, relays, bs, d0);
      auto [next_states, round_ledger] =
          run_round(specs, std::move(states), clusters, head_of_cluster, plan, config.radio,
                    config.packet_bits, has_frame, bs);
      states = std::move(next_states);
      ledger = std::move(round_ledger);
    }
    cum_dissipated.add(ledger.total_dissipated_j);
    metrics.total_frames += ledger.frames_delivered;

    // 7. Per-round record and lifetime bookkeeping.
    const int alive_end = count_alive();
    double residual_total = 0.0;
    for (const NodeState& s : states) residual_total += s.residual_energy_j;
    metrics.rounds.push_back({round, alive_end, residual_total, cum_dissipated.value(),
                              cum_harvested.value(), cum_sensing.value(),
                              ledger.frames_delivered});

    const int alive_ordinary = count_alive_ordinary();
    if (metrics.first_death_round < 0 && alive_ordinary < ordinary_total) {
      metrics.first_death_round = round;
    }
    if (metrics.half_death_round < 0 && 2 * alive_ordinary <= ordinary_total) {
      metrics.half_death_round = round;
    }
    if (metrics.last_death_round < 0 && alive_ordinary == 0) {
      metrics.last_death_round = round;
    }
    death_last_round = alive_end < alive_at_start;
  }
  return metrics;
}

std::map<std::string, Metrics> compare(const ScenarioConfig& config,
                                       const std::vector<std::string>& protocols) {
  if (protocols.empty()) throw ConfigError("compare: need at least one protocol");
  std::map<std::string, Metrics> results;
  for (const std::string& name : protocols) {
    const Protocol protocol = parse_protocol(name);
    ScenarioConfig run = config;
    run.protocol = protocol;
    results[name] = simulate(run);
  }
  return results;
}

void write_metrics_csv(const Metrics& metrics, std::ostream& out) {
  out << "round,alive,residual_j,dissipated_j,harvested_j,frames\n";
  char buf[160];
  for (const MetricsRecord& rec : metrics.rounds) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f,%ld\n", rec.round, rec.alive,
                  rec.residual_j, rec.dissipated_j, rec.harvested_j, rec.frames);
    out << buf;
  }
  if (!metrics.rounds.empty()) {
    out << "# first_death_round," << metrics.first_death_round << "\n";
    out << "# half_death_round," << metrics.half_death_round << "\n";
    out << "# last_death_round," << metrics.last_death_round << "\n";
    out << "# total_frames," << metrics.total_frames << "\n";
  }
}

void write_metrics_csv(const Metrics& metrics, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_metrics_csv(metrics, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string metrics_to_csv(const Metrics& metrics) {
  std::ostringstream out;
  write_metrics_csv(metrics, out);
  return out.str();
}

}  // namespace awqmp
