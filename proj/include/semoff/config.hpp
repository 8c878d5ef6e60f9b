#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semoff/accuracy.hpp"

namespace semoff {

// Objective weights used by the P3.2-P3.4 closed forms.
//  g_consistent: weights implied by the per-slot objective G.
//  paper: the printed formulas (Q-only weights, u^E-reduced P3.2 weight).
enum class WeightMode { g_consistent, paper };

// How the critic couples the four closed-form subproblems of one device.
//  sequential: edge volume -> cloud volume -> local freq -> edge freq, once.
//  coordinated: additionally tries a cloud-first pass and a shared queue
//  price, keeping whichever allocation has the lowest G.
enum class CriticMode { coordinated, sequential };

// exact: sum(rho) == chi.  at_most: sum(rho) <= chi.
enum class CardinalityMode { exact, at_most };

enum class ShadowingMode { per_slot, static_per_run };

// track_required: transmit so the achieved accuracy equals max(required, ε_min).
// fixed_min: always transmit at the ε_min operating point.
enum class AccuracyMode { track_required, fixed_min };

// Queue-length threshold that may be unbounded.
class QueueLimit {
 public:
  constexpr QueueLimit() = default;
  static constexpr QueueLimit unbounded() { return QueueLimit{}; }
  static constexpr QueueLimit of(double tasks) { return QueueLimit{tasks}; }

  constexpr bool bounded() const { return limit_.has_value(); }
  double value() const;  // throws std::logic_error when unbounded

  friend bool operator==(const QueueLimit&, const QueueLimit&) = default;

 private:
  constexpr explicit QueueLimit(double v) : limit_(v) {}
  std::optional<double> limit_;
};

struct GeometryConfig {
  double radius_min_m = 50.0;
  double radius_max_m = 150.0;
  double mcc_distance_m = 500.0;

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct FadingConfig {
  double rician_k_db = 3.0;
  double shadowing_std_db = 8.0;
  ShadowingMode shadowing_mode = ShadowingMode::per_slot;
  // PL(dB) = intercept + slope * log10(d / 1 km)
  double pathloss_intercept_db = 128.1;
  double pathloss_slope_db = 37.6;

  friend bool operator==(const FadingConfig&, const FadingConfig&) = default;
};

struct TrainingConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int memory_size = 1024;
  int batch_size = 128;
  int training_interval = 10;
  int training_start = 256;
  int num_candidates = 64;
  double candidate_noise_std = 0.3;
  std::vector<int> hidden_layers{120, 80};
  int total_slots = 15000;
  // Feature normalisation.
  double queue_ref = 10.0;
  double edge_gain_ref_db = -90.0;
  double cloud_gain_ref_db = -117.0;
  double gain_scale_db = 10.0;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct SystemConfig {
  int num_devices = 8;
  double slot_length = 0.01;     // s
  double lyapunov_v = 2.0;
  double arrival_rate_per_sec = 100.0;
  QueueLimit q_max_local = QueueLimit::of(20.0);
  QueueLimit q_max_edge = QueueLimit::of(5.0);
  int chi_edge = 4;
  int chi_cloud = 2;
  double f_local_max = 1.2e9;    // Hz
  double f_edge_max = 1.41e9;    // Hz
  double flops_per_cycle_local = 2048.0;
  double flops_per_cycle_edge = 6912.0;
  double alpha_local = 5.787e-26;          // W / Hz^3
  double alpha_edge_weighted = 4.45e-26;   // W / Hz^3, eta^E folded in
  double task_flops_encode = 1.2e9;
  double task_flops_decode = 3.6e9;
  double task_flops_total = 4.8e9;
  double sentence_len = 10.0;       // words / task
  double symbols_per_word = 24.0;
  double bits_per_word = 40.0;
  double bw_edge_total = 1e6;       // Hz
  double bw_cloud_total = 5e4;      // Hz
  double noise_psd = 3.9810717055349565e-21;  // W/Hz  (-174 dBm/Hz)
  double p_tx_max = 0.1;            // W  (20 dBm)
  double epsilon_min = 0.9;
  // Per-slot arrival quantile used as Λ_max in the drift bound.
  double arrival_quantile = 0.9999;

  AccuracyModel accuracy_curve{};
  AccuracyMode accuracy_mode = AccuracyMode::track_required;
  bool shannon_minus_one = true;

  GeometryConfig geometry{};
  FadingConfig fading{};
  TrainingConfig training{};

  WeightMode p32_weight_mode = WeightMode::g_consistent;
  CriticMode critic_mode = CriticMode::coordinated;
  CardinalityMode cardinality = CardinalityMode::exact;

  // Derived quantities.
  int chi_edge_eff() const { return chi_edge < num_devices ? chi_edge : num_devices; }
  double bandwidth_edge() const { return bw_edge_total / chi_edge_eff(); }
  double bandwidth_cloud() const { return bw_cloud_total / chi_cloud; }
  double mean_arrivals_per_slot() const { return arrival_rate_per_sec * slot_length; }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct ConfigViolation {
  std::string field;
  std::string rule;
};

// Empty iff the configuration is usable. Never throws.
std::vector<ConfigViolation> validate_config(const SystemConfig& cfg);

// Throws std::invalid_argument listing every violation.
void require_valid(const SystemConfig& cfg);

}  // namespace semoff
