#pragma once

#include <Eigen/Dense>
#include <optional>

namespace awqmp {

using Position = Eigen::Vector2d;

inline double distance(const Position& a, const Position& b) { return (a - b).norm(); }

enum class NodeKind { Ordinary, Super };
enum class Role { Member, ClusterHead };

/// Immutable deployment record of one node.
struct NodeSpec {
  int id = 0;
  NodeKind kind = NodeKind::Ordinary;
  Position position{0.0, 0.0};
  double initial_energy_j = 0.5;
  double accumulator_capacity_j = 2.0;
  double failure_rate = 0.0;     // per round
  double harvest_peak_j = 5e-4;  // per round, at the diurnal peak
};

/// Mutable simulation state of one node. A node is alive only while it holds
/// energy; dead nodes never regain energy or a role.
struct NodeState {
  double residual_energy_j = 0.0;
  bool alive = true;
  Role role = Role::Member;
  std::optional<int> cluster_id;
  double ch_quota_remaining = 0.0;  // rounds of head duty left in the current schedule
};

}  // namespace awqmp
