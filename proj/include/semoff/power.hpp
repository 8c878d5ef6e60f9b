#pragma once

#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Execution rates in tasks per slot. Frequencies outside [0, f_max] throw
// std::out_of_range.
double local_exec_rate(double f_local, const SystemConfig& cfg);   // τ n^L f / l
double encode_rate(double f_encode, const SystemConfig& cfg);      // τ n^L f / l^en
double edge_exec_rate(double f_edge, const SystemConfig& cfg);     // τ n^E f / l^de

// Inverses of the rate maps (no range check).
double local_freq_for(double tasks, const SystemConfig& cfg);
double encode_freq_for(double tasks, const SystemConfig& cfg);
double edge_freq_for(double tasks, const SystemConfig& cfg);

double local_power(double f_local, double f_encode, const SystemConfig& cfg);
double edge_power(double f_edge, const SystemConfig& cfg);

struct AccuracyRequirement {
  double epsilon = 0.0;
  bool achievable = true;  // epsilon <= curve ceiling
};

// ε = u^E S k / (τ b)
AccuracyRequirement required_accuracy(double u_edge, double bandwidth,
                                      const SystemConfig& cfg);

struct TxPower {
  double watts = 0.0;
  bool feasible = true;  // reachable and within p_tx_max
};

// Power that makes the semantic link deliver max(ε_required, ε_min).
TxPower semantic_tx_power(double epsilon_required, Complex h_edge, double bandwidth,
                          const SystemConfig& cfg);

// Semantic transmit power for offloading u_edge tasks; zero when nothing is sent.
TxPower edge_tx_power(double u_edge, Complex h_edge, double bandwidth,
                      const SystemConfig& cfg);

// (2^(u S k0 / (τ b)) - 1) σ² b / |h|²; the "-1" is dropped when
// cfg.shannon_minus_one is false. Zero when nothing is sent.
TxPower shannon_tx_power(double u_cloud, Complex h_cloud, double bandwidth,
                         const SystemConfig& cfg);

// (τ b / (S k0)) log2(1 + p_max |h|² / (b σ²))
double cloud_offload_cap(Complex h_cloud, double bandwidth, const SystemConfig& cfg);

// Largest semantic volume whose accuracy requirement is reachable with p_tx_max.
double semantic_offload_cap(Complex h_edge, double bandwidth, const SystemConfig& cfg);

// Volume at which the required accuracy reaches ε_min; below it the semantic
// transmit power is flat.
double semantic_floor_volume(double bandwidth, const SystemConfig& cfg);

struct PowerBreakdown {
  std::vector<double> local;
  std::vector<double> edge;
  std::vector<double> tx_edge;
  std::vector<double> tx_cloud;
  double total = 0.0;
  bool feasible = true;  // every transmit power within p_tx_max
};

// p(t) = Σ p^L + p^E + p^tx,C + p^tx,E; transmit terms vanish for devices
// without the matching association.
PowerBreakdown total_power(const Allocation& alloc, const Policy& policy,
                           const SlotState& state, const SystemConfig& cfg);

}  // namespace semoff
