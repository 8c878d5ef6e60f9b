#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Raised by evaluate_g for an allocation outside the feasible set. what()
// names the violated constraint.
class InfeasibleAllocation : public std::invalid_argument {
 public:
  InfeasibleAllocation(std::string constraint, std::size_t device);
  const std::string& constraint() const { return constraint_; }
  std::size_t device() const { return device_; }

 private:
  std::string constraint_;
  std::size_t device_;
};

// Per-device split of G into its three terms.
struct GTerms {
  double local_queue = 0.0;  // -(Q^L + Z^L)(μ^L - Λτ)
  double edge_queue = 0.0;   // -(Q^E + Z^E)(μ^E - u^E)
  double penalty = 0.0;      // v (p^L + p^E + p^tx,E + p^tx,C)
  double total() const { return local_queue + edge_queue + penalty; }
};

// Terms of one device. Summing these in device order is exactly evaluate_g.
GTerms device_g_terms(std::size_t i, const Allocation& alloc, const Policy& policy,
                      const SlotState& state, const SystemConfig& cfg);

std::vector<GTerms> g_breakdown(const Allocation& alloc, const Policy& policy,
                                const SlotState& state, const SystemConfig& cfg);

// Per-slot objective G(X(t)). Throws InfeasibleAllocation.
double evaluate_g(const Allocation& alloc, const Policy& policy, const SlotState& state,
                  const SystemConfig& cfg);

// Throws InfeasibleAllocation for the first violated constraint.
void check_feasible(const Allocation& alloc, const Policy& policy, const SlotState& state,
                    const SystemConfig& cfg);

// Printed closed forms, each clamped into [0, upper].
double u_edge_stationary(double weight, const SystemConfig& cfg);
double u_edge_closed_form(double weight, double upper, const SystemConfig& cfg);
double u_cloud_stationary(double weight, Complex h_cloud, const SystemConfig& cfg);
double u_cloud_closed_form(double weight, Complex h_cloud, double upper,
                           const SystemConfig& cfg);
double f_local_stationary(double weight, const SystemConfig& cfg);
double f_local_closed_form(double weight, double upper, const SystemConfig& cfg);
double f_edge_stationary(double weight, const SystemConfig& cfg);
double f_edge_closed_form(double weight, double q_edge, const SystemConfig& cfg);

// τ b ε_max / (S k): volume whose required accuracy sits at the curve ceiling.
double semantic_ceiling_volume(double bandwidth, const SystemConfig& cfg);

// Upper end of the P3.1 interval: min{Q^L, u^E_max, semantic cap at p_tx_max}.
double u_edge_upper(const SlotState& state, std::size_t i, const SystemConfig& cfg);

// Subproblem solvers for one device. u_edge is transmit-power aware: the
// stationary point, the semantic floor and the interior minimiser of the full
// objective are compared, keeping the lowest.
double solve_u_edge(const SlotState& state, std::size_t i, const SystemConfig& cfg);
double solve_u_cloud(const SlotState& state, std::size_t i, double u_edge,
                     const SystemConfig& cfg);
double solve_f_local(const SlotState& state, std::size_t i, double u_edge, double u_cloud,
                     const SystemConfig& cfg);
double solve_f_edge(const SlotState& state, std::size_t i, const SystemConfig& cfg);

// Vector forms over a whole policy; unassociated devices get 0.
std::vector<double> solve_u_edge(const SlotState& state, const Policy& policy,
                                 const SystemConfig& cfg);
std::vector<double> solve_u_cloud(const SlotState& state, const Policy& policy,
                                  std::span<const double> u_edge, const SystemConfig& cfg);
std::vector<double> solve_f_local(const SlotState& state, const Policy& policy,
                                  std::span<const double> u_edge,
                                  std::span<const double> u_cloud, const SystemConfig& cfg);
std::vector<double> solve_f_edge(const SlotState& state, const Policy& policy,
                                 const SystemConfig& cfg);

struct DeviceChoice {
  double u_edge = 0.0;
  double u_cloud = 0.0;
  double f_local = 0.0;
  double f_encode = 0.0;
};

// Best front-end allocation of one device for the given association bits.
DeviceChoice solve_device(const SlotState& state, std::size_t i, bool rho_edge,
                          bool rho_cloud, const SystemConfig& cfg);

struct CriticResult {
  Allocation alloc;
  double g_value = 0.0;
  std::vector<GTerms> terms;
  bool feasible = true;
};

// Solves the continuous allocation for a fixed policy and evaluates G.
CriticResult evaluate_policy(const Policy& policy, const SlotState& state,
                             const SystemConfig& cfg);

// Per-slot cache of every device's solution under each of the four
// association pairs. G of a policy is the device-order sum of table entries,
// bit-identical to evaluate_policy.
class SlotCritic {
 public:
  SlotCritic(const SlotState& state, const SystemConfig& cfg);

  double g(const Policy& policy) const;
  CriticResult evaluate(const Policy& policy) const;

  const SlotState& state() const { return state_; }

 private:
  struct Entry {
    DeviceChoice choice;
    GTerms terms;
  };
  const Entry& entry(std::size_t i, bool e, bool c) const {
    return table_[i][(e ? 2 : 0) + (c ? 1 : 0)];
  }

  SlotState state_;
  const SystemConfig* cfg_;
  std::vector<double> f_edge_;
  std::vector<std::array<Entry, 4>> table_;
};

}  // namespace semoff
