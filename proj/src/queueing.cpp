#include "semoff/queueing.hpp"

#include <algorithm>
#include <cmath>

#include "semoff/power.hpp"

namespace semoff {

namespace {

void require_nonneg(double v, const char* what) {
  if (!(std::isfinite(v) && v >= 0.0))
    throw ContractViolation(std::string(what) + ": inputs must be finite and non-negative");
}

}  // namespace

double update_local_queue(double q, double mu, double arrivals) {
  require_nonneg(q, "update_local_queue");
  require_nonneg(mu, "update_local_queue");
  require_nonneg(arrivals, "update_local_queue");
  return std::max(q - mu, 0.0) + arrivals;
}

double update_edge_queue(double q, double mu_edge, double u_edge) {
  require_nonneg(q, "update_edge_queue");
  require_nonneg(mu_edge, "update_edge_queue");
  require_nonneg(u_edge, "update_edge_queue");
  return std::max(q - mu_edge, 0.0) + u_edge;
}

double update_virtual_queue(double z, double q_next, const QueueLimit& limit) {
  require_nonneg(z, "update_virtual_queue");
  require_nonneg(q_next, "update_virtual_queue");
  if (!limit.bounded()) return 0.0;
  return std::max(z + q_next - limit.value(), 0.0);
}

VirtualQueues update_virtual_queues(std::span<const double> z_local,
                                    std::span<const double> z_edge,
                                    std::span<const double> q_local_next,
                                    std::span<const double> q_edge_next,
                                    const SystemConfig& cfg) {
  const std::size_t n = z_local.size();
  if (z_edge.size() != n || q_local_next.size() != n || q_edge_next.size() != n)
    throw ContractViolation("update_virtual_queues: size mismatch");
  VirtualQueues out;
  out.z_local.resize(n);
  out.z_edge.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.z_local[i] = update_virtual_queue(z_local[i], q_local_next[i], cfg.q_max_local);
    out.z_edge[i] = update_virtual_queue(z_edge[i], q_edge_next[i], cfg.q_max_edge);
  }
  return out;
}

double lyapunov_value(const SlotState& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    acc += s.q_local[i] * s.q_local[i] + s.q_edge[i] * s.q_edge[i] +
           s.z_local[i] * s.z_local[i] + s.z_edge[i] * s.z_edge[i];
  }
  return 0.5 * acc;
}

double drift_plus_penalty(const SlotState& before, const SlotState& after, double power,
                          double v) {
  return (lyapunov_value(after) - lyapunov_value(before)) + v * power;
}

int poisson_quantile(double mean, double q) {
  if (!(mean >= 0.0) || !(q > 0.0 && q < 1.0))
    throw std::invalid_argument("poisson_quantile: bad arguments");
  if (mean == 0.0) return 0;
  // Accumulate the pmf in log space to stay finite for large means.
  double cdf = 0.0;
  for (int k = 0;; ++k) {
    const double log_pmf = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
    cdf += std::exp(log_pmf);
    if (cdf >= q) return k;
    if (k > 100 + 20 * static_cast<int>(mean)) return k;
  }
}

RateCaps rate_caps(const SlotState& s, const SystemConfig& c) {
  const std::size_t n = s.num_devices();
  const double u_local_max = c.slot_length * c.flops_per_cycle_local * c.f_local_max /
                             c.task_flops_total;
  const double u_edge_max = c.slot_length * c.f_local_max * c.flops_per_cycle_local /
                            c.task_flops_encode;
  RateCaps caps;
  caps.u_edge_max.assign(n, u_edge_max);
  caps.u_cloud_max.resize(n);
  caps.mu_local_max.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    caps.u_cloud_max[i] = cloud_offload_cap(s.h_cloud[i], c.bandwidth_cloud(), c);
    caps.mu_local_max[i] = u_local_max + u_edge_max + caps.u_cloud_max[i];
  }
  caps.mu_edge_max = c.slot_length * c.flops_per_cycle_edge * c.f_edge_max /
                     c.task_flops_decode;
  caps.arrival_max = poisson_quantile(c.mean_arrivals_per_slot(), c.arrival_quantile);
  return caps;
}

DriftBound theorem1_bound(const SlotState& s, const SlotRates& r,
                          std::span<const double> arrivals, double power,
                          const RateCaps& caps, const SystemConfig& c) {
  const std::size_t n = s.num_devices();
  if (r.mu_local.size() != n || r.u_edge.size() != n || r.mu_edge.size() != n ||
      arrivals.size() != n)
    throw ContractViolation("theorem1_bound: size mismatch");

  double lam_max = caps.arrival_max;
  for (double a : arrivals) lam_max = std::max(lam_max, a);
  const double mue_max = caps.mu_edge_max;

  DriftBound b;
  for (std::size_t i = 0; i < n; ++i) {
    const double mul_max = caps.mu_local_max[i];
    const double ue_max = caps.u_edge_max[i];
    const double ql = s.q_local[i], qe = s.q_edge[i];
    const double zl = s.z_local[i], ze = s.z_edge[i];
    const double lam = arrivals[i];

    b.b1 += 0.5 * (mul_max * mul_max + lam_max * lam_max);
    b.b3 += 0.5 * (mue_max * mue_max + ue_max * ue_max);
    if (c.q_max_local.bounded()) {
      const double qm = c.q_max_local.value();
      b.b2 += 0.5 * (mul_max * mul_max + lam * lam + ql * ql + qm * qm) +
              mul_max * qm + lam * ql;
      b.cross += zl * (ql - qm);
    }
    if (c.q_max_edge.bounded()) {
      const double qm = c.q_max_edge.value();
      const double ue = r.u_edge[i];
      b.b4 += 0.5 * (mue_max * mue_max + ue * ue + qe * qe + qm * qm) + mue_max * qm +
              ue_max * qe;
      b.cross += ze * (qe - qm);
    }
    b.control -= (ql + zl) * (r.mu_local[i] - lam);
    b.control -= (qe + ze) * (r.mu_edge[i] - r.u_edge[i]);
  }
  b.b_hat = b.b1 + b.b2 + b.b3 + b.b4 + b.cross;
  b.penalty = c.lyapunov_v * power;
  b.value = b.b_hat + b.control + b.penalty;
  return b;
}

}  // namespace semoff
