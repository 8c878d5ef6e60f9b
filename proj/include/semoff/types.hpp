#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace semoff {

using Complex = std::complex<double>;

// Observable at the start of a slot: channels plus the total backlog Θ(t).
struct SlotState {
  std::vector<Complex> h_edge;
  std::vector<Complex> h_cloud;
  std::vector<double> q_local;
  std::vector<double> q_edge;
  std::vector<double> z_local;
  std::vector<double> z_edge;

  // Empty queues and unit channels.
  static SlotState zeros(std::size_t num_devices);

  std::size_t num_devices() const { return q_local.size(); }

  // Sizes agree and every queue is finite and non-negative.
  bool well_formed() const;

  friend bool operator==(const SlotState&, const SlotState&) = default;
};

// Binary association per device.
struct Policy {
  std::vector<std::uint8_t> rho_edge;
  std::vector<std::uint8_t> rho_cloud;

  static Policy none(std::size_t num_devices);

  std::size_t num_devices() const { return rho_edge.size(); }
  int edge_count() const;
  int cloud_count() const;

  // "10110000/01000001" style rendering.
  std::string to_string() const;

  friend bool operator==(const Policy&, const Policy&) = default;
  friend auto operator<=>(const Policy&, const Policy&) = default;
};

struct RelaxedPolicy {
  std::vector<double> rho_hat_edge;
  std::vector<double> rho_hat_cloud;
};

// Continuous per-slot decisions. f_encode is the encoder share of the local
// GPU, so f_local + f_encode <= f_local_max.
struct Allocation {
  std::vector<double> u_edge;
  std::vector<double> u_cloud;
  std::vector<double> f_local;
  std::vector<double> f_encode;
  std::vector<double> f_edge;

  static Allocation zeros(std::size_t num_devices);
  std::size_t num_devices() const { return u_edge.size(); }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct SlotOutcome {
  std::vector<double> mu_local;  // u^L + u^E + u^C
  std::vector<double> mu_edge;
  std::vector<double> p_local;
  std::vector<double> p_edge;
  std::vector<double> p_tx_edge;
  std::vector<double> p_tx_cloud;
  double total_power = 0.0;
  double g_value = 0.0;
  SlotState next_state;
};

}  // namespace semoff
