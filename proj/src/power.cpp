#include "semoff/power.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semoff {

namespace {

// Transmit powers are compared against p_tx_max with a relative slack that
// absorbs the round trip through the accuracy curve's inverse.
constexpr double kPowerSlack = 1e-6;

void check_freq(double f, double f_max, const char* what) {
  if (!(f >= 0.0) || f > f_max * (1.0 + 1e-12))
    throw std::out_of_range(std::string(what) + ": frequency outside [0, f_max]");
}

}  // namespace

double local_exec_rate(double f, const SystemConfig& c) {
  check_freq(f, c.f_local_max, "local_exec_rate");
  return c.slot_length * c.flops_per_cycle_local * f / c.task_flops_total;
}

double encode_rate(double f, const SystemConfig& c) {
  check_freq(f, c.f_local_max, "encode_rate");
  return c.slot_length * c.flops_per_cycle_local * f / c.task_flops_encode;
}

double edge_exec_rate(double f, const SystemConfig& c) {
  check_freq(f, c.f_edge_max, "edge_exec_rate");
  return c.slot_length * c.flops_per_cycle_edge * f / c.task_flops_decode;
}

double local_freq_for(double tasks, const SystemConfig& c) {
  return tasks * c.task_flops_total / (c.slot_length * c.flops_per_cycle_local);
}

double encode_freq_for(double tasks, const SystemConfig& c) {
  return tasks * c.task_flops_encode / (c.slot_length * c.flops_per_cycle_local);
}

double edge_freq_for(double tasks, const SystemConfig& c) {
  return tasks * c.task_flops_decode / (c.slot_length * c.flops_per_cycle_edge);
}

double local_power(double f_local, double f_encode, const SystemConfig& c) {
  return c.alpha_local * (f_local * f_local * f_local + f_encode * f_encode * f_encode);
}

double edge_power(double f_edge, const SystemConfig& c) {
  return c.alpha_edge_weighted * f_edge * f_edge * f_edge;
}

AccuracyRequirement required_accuracy(double u_edge, double b, const SystemConfig& c) {
  if (!(u_edge >= 0.0) || !(b > 0.0))
    throw std::invalid_argument("required_accuracy: need u_edge >= 0 and b > 0");
  AccuracyRequirement r;
  r.epsilon = u_edge * c.sentence_len * c.symbols_per_word / (c.slot_length * b);
  r.achievable = r.epsilon <= c.accuracy_curve.ceiling();
  return r;
}

TxPower semantic_tx_power(double eps_req, Complex h, double b, const SystemConfig& c) {
  const double gain = std::norm(h);
  if (!(gain > 0.0) || !(b > 0.0))
    throw std::invalid_argument("semantic_tx_power: need |h|^2 > 0 and b > 0");
  double eps = eps_req > c.epsilon_min ? eps_req : c.epsilon_min;
  if (c.accuracy_mode == AccuracyMode::fixed_min) {
    if (eps_req > c.epsilon_min)
      return {std::numeric_limits<double>::infinity(), false};
    eps = c.epsilon_min;
  }
  const auto gamma_db = c.accuracy_curve.gamma_db_for(eps);
  if (!gamma_db) return {std::numeric_limits<double>::infinity(), false};
  const double gamma = std::pow(10.0, *gamma_db / 10.0);
  const double p = gamma * c.noise_psd * b / gain;
  return {p, p <= c.p_tx_max * (1.0 + kPowerSlack)};
}

TxPower edge_tx_power(double u_edge, Complex h, double b, const SystemConfig& c) {
  if (u_edge <= 0.0) return {0.0, true};
  const auto req = required_accuracy(u_edge, b, c);
  if (!req.achievable) return {std::numeric_limits<double>::infinity(), false};
  return semantic_tx_power(req.epsilon, h, b, c);
}

TxPower shannon_tx_power(double u_cloud, Complex h, double b, const SystemConfig& c) {
  if (!(u_cloud >= 0.0)) throw std::invalid_argument("shannon_tx_power: u_cloud < 0");
  if (u_cloud == 0.0) return {0.0, true};
  const double gain = std::norm(h);
  if (!(gain > 0.0)) return {std::numeric_limits<double>::infinity(), false};
  const double bits = u_cloud * c.sentence_len * c.bits_per_word;
  const double x = bits / (c.slot_length * b);
  const double lead = c.shannon_minus_one ? std::expm1(x * std::log(2.0)) : std::exp2(x);
  const double p = lead * c.noise_psd * b / gain;
  return {p, p <= c.p_tx_max * (1.0 + kPowerSlack)};
}

double cloud_offload_cap(Complex h, double b, const SystemConfig& c) {
  const double snr = c.p_tx_max * std::norm(h) / (b * c.noise_psd);
  const double scale = c.slot_length * b / (c.sentence_len * c.bits_per_word);
  if (c.shannon_minus_one) return scale * std::log1p(snr) / std::log(2.0);
  return snr > 1.0 ? scale * std::log2(snr) : 0.0;
}

double semantic_floor_volume(double b, const SystemConfig& c) {
  return c.slot_length * b * c.epsilon_min / (c.sentence_len * c.symbols_per_word);
}

double semantic_offload_cap(Complex h, double b, const SystemConfig& c) {
  const double gain = std::norm(h);
  if (!(gain > 0.0)) return 0.0;
  const double gamma_max_db = 10.0 * std::log10(c.p_tx_max * gain / (b * c.noise_psd));
  const double eps_reach = c.accuracy_curve.epsilon(gamma_max_db);
  if (eps_reach < c.epsilon_min) return 0.0;
  if (c.accuracy_mode == AccuracyMode::fixed_min) return semantic_floor_volume(b, c);
  const double vol = c.slot_length * b * eps_reach / (c.sentence_len * c.symbols_per_word);
  return vol * (1.0 - 1e-12);
}

PowerBreakdown total_power(const Allocation& a, const Policy& pol, const SlotState& s,
                           const SystemConfig& c) {
  const std::size_t n = a.num_devices();
  if (pol.num_devices() != n || s.num_devices() != n)
    throw std::invalid_argument("total_power: size mismatch");
  PowerBreakdown out;
  out.local.resize(n);
  out.edge.resize(n);
  out.tx_edge.assign(n, 0.0);
  out.tx_cloud.assign(n, 0.0);
  const double be = c.bandwidth_edge();
  const double bc = c.bandwidth_cloud();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.local[i] = local_power(a.f_local[i], a.f_encode[i], c);
    out.edge[i] = edge_power(a.f_edge[i], c);
    if (pol.rho_edge[i]) {
      const auto tx = edge_tx_power(a.u_edge[i], s.h_edge[i], be, c);
      out.tx_edge[i] = tx.watts;
      out.feasible = out.feasible && tx.feasible;
    }
    if (pol.rho_cloud[i]) {
      const auto tx = shannon_tx_power(a.u_cloud[i], s.h_cloud[i], bc, c);
      out.tx_cloud[i] = tx.watts;
      out.feasible = out.feasible && tx.feasible;
    }
    total += out.local[i] + out.edge[i] + out.tx_cloud[i] + out.tx_edge[i];
  }
  out.total = total;
  return out;
}

}  // namespace semoff
