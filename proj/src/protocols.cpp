#include "awqmp/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace awqmp {

namespace {

int nearest_center(const Position& p, const std::vector<Position>& centers) {
  int best = 0;
  double best_d2 = (p - centers[0]).squaredNorm();
  for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
    const double d2 = (p - centers[c]).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<Cluster> form_clusters(const std::vector<ClusterPoint>& alive, int k, Rng& rng) {
  const int n = static_cast<int>(alive.size());
  if (k < 1 || k > n) throw std::invalid_argument("form_clusters: need 1 <= k <= |alive|");

  // k-means++ seeding: first center uniform, the rest weighted by squared
  // distance to the nearest chosen center.
  std::vector<Position> centers;
  centers.reserve(k);
  centers.push_back(alive[rng.uniform_index(n)].position);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = (alive[i].position - centers[nearest_center(alive[i].position, centers)]).squaredNorm();
      total += d2[i];
    }
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_index(n));  // all points coincide with a center
    } else {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum >= target) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(alive[pick].position);
  }

  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      const int c = nearest_center(alive[i].position, centers);
      if (c != assignment[i]) changed = true;
      assignment[i] = c;
      ++counts[c];
    }
    // Reseed any empty cluster with the point farthest from its own center.
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int far = 0;
      double far_d2 = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d = (alive[i].position - centers[assignment[i]]).squaredNorm();
        if (d > far_d2) {
          far_d2 = d;
          far = i;
        }
      }
      centers[c] = alive[far].position;
      reseeded = true;
    }
    if (reseeded) continue;
    if (!changed && iter > 0) break;
    for (int c = 0; c < k; ++c) centers[c].setZero();
    std::vector<int> sizes(k, 0);
    for (int i = 0; i < n; ++i) {
      centers[assignment[i]] += alive[i].position;
      ++sizes[assignment[i]];
    }
    for (int c = 0; c < k; ++c) centers[c] /= static_cast<double>(sizes[c]);
  }

  // Guarantee non-empty clusters even for degenerate inputs (duplicate
  // points): hand each empty cluster one point from the largest one.
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) ++counts[assignment[i]];
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    int donor = 0;
    for (int d = 1; d < k; ++d) {
      if (counts[d] > counts[donor]) donor = d;
    }
    for (int i = n - 1; i >= 0; --i) {
      if (assignment[i] == donor) {
        assignment[i] = c;
        --counts[donor];
        ++counts[c];
        break;
      }
    }
  }

  std::vector<Cluster> clusters(k);
  for (int c = 0; c < k; ++c) clusters[c].cluster_id = c;
  for (int i = 0; i < n; ++i) clusters[assignment[i]].member_ids.push_back(alive[i].id);
  for (Cluster& c : clusters) std::sort(c.member_ids.begin(), c.member_ids.end());
  return clusters;
}

LinearSystem build_equalization_system(const Cluster& cluster, std::span<const NodeSpec> specs,
                                       std::span<const NodeState> states, const RadioModel& radio,
                                       double packet_bits,
                                       const std::map<int, double>& next_hop_distance_m) {
  const int n = static_cast<int>(cluster.member_ids.size());
  if (n == 0) throw std::invalid_argument("build_equalization_system: empty cluster");

  Position centroid(0.0, 0.0);
  for (int id : cluster.member_ids) centroid += specs[id].position;
  centroid /= static_cast<double>(n);

  LinearSystem sys;
  sys.a.resize(n, n);
  sys.b.resize(n);
  for (int i = 0; i < n; ++i) {
    const int id = cluster.member_ids[i];
    const auto hop = next_hop_distance_m.find(id);
    if (hop == next_hop_distance_m.end()) {
      throw std::invalid_argument("build_equalization_system: missing next-hop distance for node " +
                                  std::to_string(id));
    }
    const double e_mem = tx_energy(radio, packet_bits, distance(specs[id].position, centroid));
    const double e_head = (n - 1) * rx_energy(radio, packet_bits) +
                          aggregate_energy(radio, packet_bits, n) +
                          tx_energy(radio, packet_bits, hop->second);
    for (int j = 0; j < n; ++j) sys.a(i, j) = (i == j) ? e_head : e_mem;
    sys.b(i) = states[id].residual_energy_j;
  }
  return sys;
}

RotationSchedule solve_rotation(const Cluster& cluster, std::span<const NodeSpec> specs,
                                std::span<const NodeState> states, const RadioModel& radio,
                                double packet_bits,
                                const std::map<int, double>& next_hop_distance_m) {
  const LinearSystem sys =
      build_equalization_system(cluster, specs, states, radio, packet_bits, next_hop_distance_m);

  RotationSchedule schedule;
  bool all_zero = true;
  try {
    const Eigen::VectorXd x = gaussian_solve(sys);
    for (int i = 0; i < static_cast<int>(cluster.member_ids.size()); ++i) {
      const double quota = std::max(0.0, x(i));
      schedule.quotas[cluster.member_ids[i]] = quota;
      if (quota > 0.0) all_zero = false;
    }
  } catch (const SingularSystemError&) {
    for (int id : cluster.member_ids) schedule.quotas[id] = 0.0;
  }

  if (all_zero) {
    // Degenerate solve: grant one round of duty to the strongest member.
    int best = cluster.member_ids.front();
    for (int id : cluster.member_ids) {
      if (states[id].residual_energy_j > states[best].residual_energy_j) best = id;
    }
    schedule.quotas[best] = 1.0;
  }
  return schedule;
}

int elect_head_echerp(const Cluster& cluster, RotationSchedule& schedule,
                      std::span<NodeState> states) {
  int best = -1;
  double best_quota = 0.0;
  double best_residual = 0.0;
  for (int id : cluster.member_ids) {  // ascending, so strict > keeps the lowest id on ties
    if (!states[id].alive) continue;
    const auto it = schedule.quotas.find(id);
    const double quota = it == schedule.quotas.end() ? 0.0 : it->second;
    const double residual = states[id].residual_energy_j;
    if (best < 0 || quota > best_quota || (quota == best_quota && residual > best_residual)) {
      best = id;
      best_quota = quota;
      best_residual = residual;
    }
  }
  if (best < 0) throw std::runtime_error("elect_head_echerp: no alive members");
  const double remaining = std::max(0.0, best_quota - 1.0);
  schedule.quotas[best] = remaining;
  states[best].ch_quota_remaining = remaining;
  return best;
}

double leach_threshold(double p, int round) {
  const int period = std::max(1, static_cast<int>(std::floor(1.0 / p)));
  return p / (1.0 - p * (round % period));
}

std::vector<int> elect_heads_leach(const std::vector<LeachCandidate>& alive, double p, int round,
                                   Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("elect_heads_leach: need 0 < p <= 1");
  const double threshold = leach_threshold(p, round);

  std::vector<int> heads;
  for (const LeachCandidate& cand : alive) {
    if (cand.eligible && rng.uniform01() < threshold) heads.push_back(cand.id);
  }
  if (heads.empty() && !alive.empty()) {
    // Nobody volunteered; draft the strongest node so the round still reports.
    const LeachCandidate* best = &alive.front();
    for (const LeachCandidate& cand : alive) {
      if (cand.residual_energy_j > best->residual_energy_j) best = &cand;
    }
    heads.push_back(best->id);
  }
  return heads;
}

RoutePlan plan_routes(const std::vector<HeadPoint>& heads, const Position& bs, double d0_m) {
  return plan_routes(heads, {}, bs, d0_m);
}

RoutePlan plan_routes(const std::vector<HeadPoint>& heads, const std::vector<HeadPoint>& relays,
                      const Position& bs, double d0_m) {
  if (heads.empty()) throw std::invalid_argument("plan_routes: no heads");

  RoutePlan plan;
  for (const HeadPoint& relay : relays) plan.next_hop[relay.id] = kBaseStation;

  for (const HeadPoint& head : heads) {
    const double to_bs = distance(head.position, bs);
    if (to_bs <= d0_m) {
      plan.next_hop[head.id] = kBaseStation;
      continue;
    }
    int next = kBaseStation;
    double next_d = std::numeric_limits<double>::infinity();
    for (const HeadPoint& relay : relays) {
      const double d = distance(head.position, relay.position);
      if (d >= to_bs) continue;
      if (d < next_d || (d == next_d && relay.id < next)) {
        next = relay.id;
        next_d = d;
      }
    }
    if (next == kBaseStation) {
      for (const HeadPoint& peer : heads) {
        if (peer.id == head.id) continue;
        if (!(distance(peer.position, bs) < to_bs)) continue;  // strictly closer only
        const double d = distance(head.position, peer.position);
        if (d < next_d || (d == next_d && peer.id < next)) {
          next = peer.id;
          next_d = d;
        }
      }
    }
    plan.next_hop[head.id] = next;
  }
  return plan;
}

namespace {

/// Pay up to cost from the node; true when the full cost was covered (a node
/// that spends its last joule completes the action, then dies).
bool pay(std::vector<NodeState>& states, int id, double cost) {
  auto [next, paid] = drain(states[id], cost);
  states[id] = next;
  return paid == cost;
}

}  // namespace

std::pair<std::vector<NodeState>, RoundLedger> run_round(
    std::span<const NodeSpec> specs, std::vector<NodeState> states,
    const std::vector<Cluster>& clusters, const std::map<int, int>& head_of_cluster,
    const RoutePlan& plan, const RadioModel& radio, double packet_bits,
    const std::vector<std::uint8_t>& has_frame, const Position& bs_position) {
  const int n = static_cast<int>(specs.size());
  std::vector<double> residual_before(n);
  for (int i = 0; i < n; ++i) residual_before[i] = states[i].residual_energy_j;

  struct Packet {
    int head;
    long signals;
  };
  std::vector<Packet> outbox;

  // Intra-cluster collection: members transmit, the head receives and fuses.
  for (const Cluster& cluster : clusters) {
    const auto it = head_of_cluster.find(cluster.cluster_id);
    if (it == head_of_cluster.end()) continue;
    const int head = it->second;

    long collected = 0;
    for (int member : cluster.member_ids) {
      if (member == head || !states[member].alive || !has_frame[member]) continue;
      const double d = distance(specs[member].position, specs[head].position);
      const bool sent = pay(states, member, tx_energy(radio, packet_bits, d));
      if (!sent) continue;                // died mid-transmission, frame lost
      if (!states[head].alive) continue;  // head already gone; cost is still booked
      if (pay(states, head, rx_energy(radio, packet_bits))) ++collected;
    }
    if (!states[head].alive) continue;
    if (has_frame[head]) ++collected;
    if (collected == 0) continue;  // nothing to report this round
    if (!pay(states, head, aggregate_energy(radio, packet_bits, static_cast<double>(collected)))) {
      continue;  // died fusing; the aggregate never leaves the node
    }
    outbox.push_back({head, collected});
  }

  // Forwarding: walk each aggregate along the plan, charging relays rx+tx.
  RoundLedger ledger;
  for (const Packet& packet : outbox) {
    int at = packet.head;
    for (int hops = 0; hops <= n && states[at].alive; ++hops) {
      const auto hop = plan.next_hop.find(at);
      const int next = hop == plan.next_hop.end() ? kBaseStation : hop->second;
      const double d = next == kBaseStation ? distance(specs[at].position, bs_position)
                                            : distance(specs[at].position, specs[next].position);
      if (!pay(states, at, tx_energy(radio, packet_bits, d))) break;  // died transmitting
      if (next == kBaseStation) {
        ledger.frames_delivered += packet.signals;
        break;
      }
      if (!states[next].alive) break;  // relay already dead, packet lost in the water
      if (!pay(states, next, rx_energy(radio, packet_bits))) break;
      at = next;
    }
  }

  ledger.dissipated_j.resize(n);
  for (int i = 0; i < n; ++i) {
    ledger.dissipated_j[i] = residual_before[i] - states[i].residual_energy_j;
    ledger.total_dissipated_j += ledger.dissipated_j[i];
  }
  return {std::move(states), std::move(ledger)};
}

}  // namespace awqmp
