#include "semoff/config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace semoff {

double QueueLimit::value() const {
  if (!limit_) throw std::logic_error("QueueLimit::value on unbounded limit");
  return *limit_;
}

namespace {

struct Checker {
  std::vector<ConfigViolation> out;

  void require(bool ok, const char* field, const std::string& rule) {
    if (!ok) out.push_back({field, rule});
  }
  void positive(double v, const char* field) {
    require(std::isfinite(v) && v > 0.0, field, "must be finite and strictly positive");
  }
  void positive_int(int v, const char* field) {
    require(v > 0, field, "must be strictly positive");
  }
};

}  // namespace

std::vector<ConfigViolation> validate_config(const SystemConfig& c) {
  Checker k;
  k.positive_int(c.num_devices, "num_devices");
  k.positive(c.slot_length, "slot_length");
  k.positive(c.lyapunov_v, "lyapunov_v");
  k.require(std::isfinite(c.arrival_rate_per_sec) && c.arrival_rate_per_sec >= 0.0,
            "arrival_rate_per_sec", "must be finite and non-negative");

  if (c.q_max_local.bounded()) {
    k.positive(c.q_max_local.value(), "q_max_local");
    k.require(c.q_max_local.value() >= c.mean_arrivals_per_slot(), "q_max_local",
              "must be at least the mean arrivals per slot");
  }
  if (c.q_max_edge.bounded()) k.positive(c.q_max_edge.value(), "q_max_edge");

  k.positive_int(c.chi_edge, "chi_edge");
  k.positive_int(c.chi_cloud, "chi_cloud");
  k.require(c.chi_edge <= c.num_devices, "chi_edge", "chi_edge exceeds device count");
  k.require(c.chi_cloud <= c.num_devices, "chi_cloud", "chi_cloud exceeds device count");

  k.positive(c.f_local_max, "f_local_max");
  k.positive(c.f_edge_max, "f_edge_max");
  k.positive(c.flops_per_cycle_local, "flops_per_cycle_local");
  k.positive(c.flops_per_cycle_edge, "flops_per_cycle_edge");
  k.positive(c.alpha_local, "alpha_local");
  k.positive(c.alpha_edge_weighted, "alpha_edge_weighted");
  k.positive(c.task_flops_encode, "task_flops_encode");
  k.positive(c.task_flops_decode, "task_flops_decode");
  k.positive(c.task_flops_total, "task_flops_total");
  {
    const double sum = c.task_flops_encode + c.task_flops_decode;
    k.require(std::abs(c.task_flops_total - sum) <= 1e-12 * std::abs(sum),
              "task_flops_total", "must equal task_flops_encode + task_flops_decode");
  }
  k.positive(c.sentence_len, "sentence_len");
  k.positive(c.symbols_per_word, "symbols_per_word");
  k.positive(c.bits_per_word, "bits_per_word");
  k.positive(c.bw_edge_total, "bw_edge_total");
  k.positive(c.bw_cloud_total, "bw_cloud_total");
  k.positive(c.noise_psd, "noise_psd");
  k.positive(c.p_tx_max, "p_tx_max");
  k.require(c.epsilon_min > 0.0 && c.epsilon_min < 1.0, "epsilon_min",
            "must lie in (0, 1)");
  k.require(c.epsilon_min < c.accuracy_curve.ceiling(), "epsilon_min",
            "must be below the accuracy curve ceiling");
  k.require(c.arrival_quantile > 0.0 && c.arrival_quantile < 1.0, "arrival_quantile",
            "must lie in (0, 1)");

  const auto& g = c.geometry;
  k.positive(g.radius_min_m, "geometry.radius_min_m");
  k.require(g.radius_max_m > g.radius_min_m, "geometry.radius_max_m",
            "must exceed radius_min_m");
  k.positive(g.mcc_distance_m, "geometry.mcc_distance_m");
  k.require(g.mcc_distance_m > g.radius_max_m, "geometry.mcc_distance_m",
            "must lie outside the hotspot");

  const auto& f = c.fading;
  k.require(std::isfinite(f.rician_k_db), "fading.rician_k_db", "must be finite");
  k.require(std::isfinite(f.shadowing_std_db) && f.shadowing_std_db >= 0.0,
            "fading.shadowing_std_db", "must be finite and non-negative");

  const auto& t = c.training;
  k.positive(t.learning_rate, "training.learning_rate");
  k.require(t.adam_beta1 >= 0.0 && t.adam_beta1 < 1.0, "training.adam_beta1",
            "must lie in [0, 1)");
  k.require(t.adam_beta2 > 0.0 && t.adam_beta2 < 1.0, "training.adam_beta2",
            "must lie in (0, 1)");
  k.positive(t.adam_epsilon, "training.adam_epsilon");
  k.positive_int(t.memory_size, "training.memory_size");
  k.positive_int(t.batch_size, "training.batch_size");
  k.require(t.batch_size <= t.memory_size, "training.batch_size",
            "must not exceed memory_size");
  k.positive_int(t.training_interval, "training.training_interval");
  k.require(t.training_start >= 0, "training.training_start", "must be non-negative");
  k.positive_int(t.num_candidates, "training.num_candidates");
  k.require(t.candidate_noise_std >= 0.0, "training.candidate_noise_std",
            "must be non-negative");
  k.require(!t.hidden_layers.empty(), "training.hidden_layers", "must not be empty");
  for (int h : t.hidden_layers)
    k.require(h > 0, "training.hidden_layers", "sizes must be positive");
  k.positive_int(t.total_slots, "training.total_slots");
  k.positive(t.queue_ref, "training.queue_ref");
  k.positive(t.gain_scale_db, "training.gain_scale_db");
  return k.out;
}

void require_valid(const SystemConfig& cfg) {
  const auto v = validate_config(cfg);
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid configuration:";
  for (const auto& e : v) msg << "\n  " << e.field << ": " << e.rule;
  throw std::invalid_argument(msg.str());
}

}  // namespace semoff
