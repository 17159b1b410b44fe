#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "awqmp/model.hpp"
#include "awqmp/rng.hpp"

namespace awqmp {

// First-order radio model. Transmitting b bits over distance d costs
//   b*e_elec + b*eps_fs*d^2   for d below the crossover distance d0,
//   b*e_elec + b*eps_mp*d^4   otherwise,
// receiving costs b*e_elec, and fusing s signals of b bits costs b*s*e_da.
// d0 = sqrt(eps_fs/eps_mp), which makes the two amplifier branches agree
// exactly at the crossover.
struct RadioModel {
  double e_elec_j_per_bit = 50e-9;
  double eps_fs_j_per_bit_m2 = 10e-12;
  double eps_mp_j_per_bit_m4 = 0.0013e-12;
  double e_da_j_per_bit_signal = 5e-9;

  double crossover_distance_m() const {
    if (eps_mp_j_per_bit_m4 <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(eps_fs_j_per_bit_m2 / eps_mp_j_per_bit_m4);
  }
};

/// Diurnal harvest cycle, measured in simulation rounds.
struct SolarModel {
  double day_length_rounds = 100.0;
  double dawn_offset_rounds = 0.0;
};

/// Exponential hardware failure: R(t) = exp(-lambda t).
struct ReliabilityParams {
  double failure_rate = 0.0;  // lambda, per round
};

double tx_energy(const RadioModel& radio, double bits, double distance_m);
double rx_energy(const RadioModel& radio, double bits);
double aggregate_energy(const RadioModel& radio, double bits, double signals);

/// Energy harvested during one round: peak * max(0, sin(2*pi*(r - dawn)/day)).
/// Zero through the night half of the cycle, peak a quarter day after dawn.
double harvest(const SolarModel& solar, double harvest_peak_j, double round_index);
double harvest(const SolarModel& solar, const NodeSpec& node, double round_index);

/// Add energy to the accumulator, clamped at capacity; the excess is returned
/// as overflow. Dead nodes absorb nothing and overflow the full amount.
std::pair<NodeState, double> charge(const NodeState& state, double capacity_j, double amount_j);

/// Withdraw up to amount_j, returning the updated state and the amount
/// actually paid. A node whose residual reaches zero dies at the point of
/// expenditure; dead nodes pay nothing.
std::pair<NodeState, double> drain(const NodeState& state, double amount_j);

double reliability(const ReliabilityParams& params, double t_rounds);

/// One Bernoulli draw over an interval: true with probability 1 - exp(-lambda*dt).
bool sample_failure(const ReliabilityParams& params, double dt_rounds, Rng& rng);

}  // namespace awqmp
