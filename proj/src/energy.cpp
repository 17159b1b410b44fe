#include "awqmp/energy.hpp"

#include <algorithm>
#include <cmath>

namespace awqmp {

double tx_energy(const RadioModel& radio, double bits, double distance_m) {
  const double electronics = bits * radio.e_elec_j_per_bit;
  if (distance_m < radio.crossover_distance_m()) {
    return electronics + bits * radio.eps_fs_j_per_bit_m2 * distance_m * distance_m;
  }
  const double d2 = distance_m * distance_m;
  return electronics + bits * radio.eps_mp_j_per_bit_m4 * d2 * d2;
}

double rx_energy(const RadioModel& radio, double bits) {
  return bits * radio.e_elec_j_per_bit;
}

double aggregate_energy(const RadioModel& radio, double bits, double signals) {
  return bits * signals * radio.e_da_j_per_bit_signal;
}

double harvest(const SolarModel& solar, double harvest_peak_j, double round_index) {
  const double phase = 2.0 * M_PI * (round_index - solar.dawn_offset_rounds) / solar.day_length_rounds;
  return harvest_peak_j * std::max(0.0, std::sin(phase));
}

double harvest(const SolarModel& solar, const NodeSpec& node, double round_index) {
  return harvest(solar, node.harvest_peak_j, round_index);
}

std::pair<NodeState, double> charge(const NodeState& state, double capacity_j, double amount_j) {
  if (!state.alive) return {state, amount_j};
  NodeState next = state;
  const double sum = state.residual_energy_j + amount_j;
  next.residual_energy_j = std::min(capacity_j, sum);
  return {next, sum - next.residual_energy_j};
}

std::pair<NodeState, double> drain(const NodeState& state, double amount_j) {
  if (!state.alive) return {state, 0.0};
  NodeState next = state;
  const double paid = std::min(amount_j, state.residual_energy_j);
  next.residual_energy_j = state.residual_energy_j - paid;
  if (next.residual_energy_j <= 0.0) {
    next.residual_energy_j = 0.0;
    next.alive = false;
    next.role = Role::Member;
    next.cluster_id.reset();
    next.ch_quota_remaining = 0.0;
  }
  return {next, paid};
}

double reliability(const ReliabilityParams& params, double t_rounds) {
  return std::exp(-params.failure_rate * t_rounds);
}

bool sample_failure(const ReliabilityParams& params, double dt_rounds, Rng& rng) {
  const double p_fail = 1.0 - std::exp(-params.failure_rate * dt_rounds);
  return rng.bernoulli(p_fail);
}

}  // namespace awqmp
