#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Raised when a queue operator receives negative or non-finite input.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Q' = max(Q - μ, 0) + Λ
double update_local_queue(double q, double mu, double arrivals);
// Q^E' = max(Q^E - μ^E, 0) + u^E
double update_edge_queue(double q, double mu_edge, double u_edge);
// Z' = max(Z + Q_next - Q_max, 0); identically zero for an unbounded limit.
double update_virtual_queue(double z, double q_next, const QueueLimit& limit);

struct VirtualQueues {
  std::vector<double> z_local;
  std::vector<double> z_edge;
};

VirtualQueues update_virtual_queues(std::span<const double> z_local,
                                    std::span<const double> z_edge,
                                    std::span<const double> q_local_next,
                                    std::span<const double> q_edge_next,
                                    const SystemConfig& cfg);

// ½ Σ_i (Q^L)² + (Q^E)² + (Z^L)² + (Z^E)²
double lyapunov_value(const SlotState& state);

// L(Θ(t+1)) - L(Θ(t)) + v p(t) for one realised transition.
double drift_plus_penalty(const SlotState& before, const SlotState& after,
                          double power, double v);

// Smallest k with P[Poisson(mean) <= k] >= q.
int poisson_quantile(double mean, double q);

// Per-slot upper bounds on every rate entering the drift bound.
struct RateCaps {
  std::vector<double> mu_local_max;  // u^L_max + u^E_max + u^C_max(h)
  std::vector<double> u_edge_max;    // τ f^L_max n^L / l^en
  std::vector<double> u_cloud_max;   // channel dependent
  double mu_edge_max = 0.0;          // τ n^E f^E_max / l^de
  double arrival_max = 0.0;          // Poisson quantile of the per-slot arrivals
};

RateCaps rate_caps(const SlotState& state, const SystemConfig& cfg);

// Rates realised in one slot.
struct SlotRates {
  std::vector<double> mu_local;
  std::vector<double> u_edge;
  std::vector<double> mu_edge;
};

struct DriftBound {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double b4 = 0.0;
  double cross = 0.0;  // Σ Z^L (Q^L - Q^L_max) + Z^E (Q^E - Q^E_max)
  double b_hat = 0.0;
  double control = 0.0;  // -Σ (Q^L+Z^L)(μ^L-Λ) - ... as it enters the bound
  double penalty = 0.0;  // v p(t)
  double value = 0.0;    // b_hat + control + penalty
};

// Per-sample drift-plus-penalty bound assembled from the four queue lemmas.
// The realised arrivals raise Λ_max when they exceed the a-priori quantile.
// Virtual-queue terms vanish for unbounded thresholds.
DriftBound theorem1_bound(const SlotState& state, const SlotRates& rates,
                          std::span<const double> arrivals, double power,
                          const RateCaps& caps, const SystemConfig& cfg);

}  // namespace semoff
