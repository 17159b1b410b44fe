#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "awqmp/energy.hpp"
#include "awqmp/linsolve.hpp"
#include "awqmp/model.hpp"
#include "awqmp/rng.hpp"

namespace awqmp {

/// Next-hop sentinel: deliver straight to the base station.
inline constexpr int kBaseStation = -1;

struct Cluster {
  int cluster_id = 0;
  std::vector<int> member_ids;  // includes the current head, ascending
};

/// Per-node head-duty quotas x_i (rounds, real-valued) from the equalized
/// rotation solve. Defined exactly for the cluster's members.
struct RotationSchedule {
  std::map<int, double> quotas;
};

/// head or relay id -> next head/relay id, or kBaseStation. Acyclic: every
/// path terminates at the base station.
struct RoutePlan {
  std::map<int, int> next_hop;
};

struct ClusterPoint {
  int id = 0;
  Position position{0.0, 0.0};
};

struct HeadPoint {
  int id = 0;
  Position position{0.0, 0.0};
};

struct LeachCandidate {
  int id = 0;
  double residual_energy_j = 0.0;
  bool eligible = true;  // has not served as head in the current epoch
};

/// Geographic clustering: seeded k-means on positions (k-means++ init, at
/// most 50 Lloyd iterations, empty clusters reseeded with the farthest
/// point). Deterministic given the rng stream. Requires 1 <= k <= |alive|.
std::vector<Cluster> form_clusters(const std::vector<ClusterPoint>& alive, int k, Rng& rng);

// Equalized-depletion system: one unknown x_i per member, the number of
// rounds member i serves as head. Row i states that i's residual energy is
// exactly spent over the schedule:
//
//   x_i * (E_head(i) - E_mem(i)) + sum_j x_j * E_mem(i) = E_resid(i)
//
// where E_head(i) = (n-1)*rx + aggregate(n signals) + tx(next-hop distance
// of i) and E_mem(i) is the transmit cost to the cluster centroid - the
// expected member cost under a fair rotation, which keeps the system linear.
// specs/states are indexed by node id.
LinearSystem build_equalization_system(const Cluster& cluster, std::span<const NodeSpec> specs,
                                       std::span<const NodeState> states, const RadioModel& radio,
                                       double packet_bits,
                                       const std::map<int, double>& next_hop_distance_m);

/// Solve the equalization system; negative quotas clamp to zero. A singular
/// system or an all-zero solution falls back to one round of duty for the
/// max-residual member (ties to the lowest id).
RotationSchedule solve_rotation(const Cluster& cluster, std::span<const NodeSpec> specs,
                                std::span<const NodeState> states, const RadioModel& radio,
                                double packet_bits,
                                const std::map<int, double>& next_hop_distance_m);

/// Pick the alive member with the largest remaining quota (ties: higher
/// residual energy, then lower id) and debit one round of duty from the
/// schedule and the node state. Throws std::runtime_error when no member is
/// alive.
int elect_head_echerp(const Cluster& cluster, RotationSchedule& schedule,
                      std::span<NodeState> states);

/// T(r) = p / (1 - p * (r mod floor(1/p))), the rotating election threshold.
double leach_threshold(double p, int round);

/// Each eligible candidate independently becomes head with probability
/// leach_threshold(p, round); if nobody is elected the max-residual candidate
/// is drafted. Consumes one uniform per eligible candidate, in input order.
std::vector<int> elect_heads_leach(const std::vector<LeachCandidate>& alive, double p, int round,
                                   Rng& rng);

/// Heads within d0 of the base station transmit directly; farther heads chain
/// to the nearest head strictly closer to the base station (ties to the lower
/// id) or, failing that, go direct. The strictly-closer rule keeps the plan
/// acyclic.
RoutePlan plan_routes(const std::vector<HeadPoint>& heads, const Position& bs, double d0_m);

/// Same, with dedicated relays (super nodes): a far head prefers the nearest
/// relay that is closer to it than the base station is; relays always forward
/// straight to the base station over their long-range link.
RoutePlan plan_routes(const std::vector<HeadPoint>& heads, const std::vector<HeadPoint>& relays,
                      const Position& bs, double d0_m);

struct RoundLedger {
  std::vector<double> dissipated_j;  // per node id, exactly residual_before - residual_after
  double total_dissipated_j = 0.0;
  long frames_delivered = 0;  // measurement frames that reached the base station
};

// One round of data exchange. Members with a frame transmit to their head
// (whether or not it is still listening); heads pay reception per delivered
// frame, aggregation over the fused signals, and transmission along the route
// plan; relays pay rx+tx per forwarded packet. A node that cannot cover a
// cost pays what it has and dies at the point of expenditure; partially paid
// transmissions are lost. Base-station reception is free.
std::pair<std::vector<NodeState>, RoundLedger> run_round(
    std::span<const NodeSpec> specs, std::vector<NodeState> states,
    const std::vector<Cluster>& clusters, const std::map<int, int>& head_of_cluster,
    const RoutePlan& plan, const RadioModel& radio, double packet_bits,
    const std::vector<std::uint8_t>& has_frame, const Position& bs_position);

}  // namespace awqmp
