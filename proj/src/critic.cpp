#include "semoff/critic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "semoff/power.hpp"

namespace semoff {

namespace {

constexpr double kRelTol = 1e-9;

double clamp0(double x, double hi) { return std::max(0.0, std::min(x, std::max(hi, 0.0))); }

bool above(double value, double limit) {
  return value > limit + kRelTol * std::max(1.0, std::abs(limit));
}

// Encoder frequency per offloaded task, Hz.
double encode_hz_per_task(const SystemConfig& c) {
  return c.task_flops_encode / (c.slot_length * c.flops_per_cycle_local);
}

// Local execution tasks per Hz.
double local_tasks_per_hz(const SystemConfig& c) {
  return c.slot_length * c.flops_per_cycle_local / c.task_flops_total;
}

struct DeviceVars {
  double u_edge, u_cloud, f_local, f_encode, f_edge;
  bool rho_edge, rho_cloud;
};

GTerms terms_of(std::size_t i, const DeviceVars& d, const SlotState& s,
                const SystemConfig& c) {
  const double mu_local = d.u_edge + d.u_cloud + d.f_local * local_tasks_per_hz(c);
  const double mu_edge = d.f_edge * c.slot_length * c.flops_per_cycle_edge / c.task_flops_decode;
  double p = local_power(d.f_local, d.f_encode, c) + edge_power(d.f_edge, c);
  if (d.rho_edge) p += edge_tx_power(d.u_edge, s.h_edge[i], c.bandwidth_edge(), c).watts;
  if (d.rho_cloud) p += shannon_tx_power(d.u_cloud, s.h_cloud[i], c.bandwidth_cloud(), c).watts;
  GTerms t;
  t.local_queue = -(s.q_local[i] + s.z_local[i]) * (mu_local - c.mean_arrivals_per_slot());
  t.edge_queue = -(s.q_edge[i] + s.z_edge[i]) * (mu_edge - d.u_edge);
  t.penalty = c.lyapunov_v * p;
  return t;
}

DeviceVars vars_of(std::size_t i, const Allocation& a, const Policy& p) {
  return {a.u_edge[i],   a.u_cloud[i],        a.f_local[i],        a.f_encode[i],
          a.f_edge[i],   p.rho_edge[i] != 0, p.rho_cloud[i] != 0};
}

void check_sizes(const Allocation& a, const Policy& p, const SlotState& s) {
  const std::size_t n = s.num_devices();
  if (a.num_devices() != n || a.u_cloud.size() != n || a.f_local.size() != n ||
      a.f_encode.size() != n || a.f_edge.size() != n || p.num_devices() != n ||
      p.rho_cloud.size() != n || !s.well_formed())
    throw std::invalid_argument("critic: allocation, policy and state sizes differ");
}

// Objective of the encoder volume alone: -W u + v α^L (c u)^3 + v p^tx,E(u).
double edge_volume_objective(double u, double w, Complex h, const SystemConfig& c) {
  const double f = encode_hz_per_task(c) * u;
  return -w * u +
         c.lyapunov_v * (c.alpha_local * f * f * f +
                         edge_tx_power(u, h, c.bandwidth_edge(), c).watts);
}

double golden_min(double lo, double hi, auto&& f) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 90 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

// Best encoder volume on [0, upper] for weight w including transmit power.
double best_u_edge(double w, double upper, Complex h, const SystemConfig& c) {
  if (!(w > 0.0) || !(upper > 0.0)) return 0.0;
  auto obj = [&](double u) { return edge_volume_objective(u, w, h, c); };
  double best_u = 0.0, best = 0.0;
  auto consider = [&](double u) {
    const double v = obj(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  };
  const double floor_vol = semantic_floor_volume(c.bandwidth_edge(), c);
  const double below = std::min(upper, floor_vol);
  consider(u_edge_closed_form(w, below, c));
  if (upper > floor_vol) {
    consider(golden_min(floor_vol, upper, obj));
    consider(upper);
  }
  return best_u;
}

double weight_local(const SlotState& s, std::size_t i) { return s.q_local[i] + s.z_local[i]; }
double weight_edge_volume(const SlotState& s, std::size_t i) {
  return s.q_local[i] + s.z_local[i] - s.q_edge[i] - s.z_edge[i];
}

double cloud_cap(const SlotState& s, std::size_t i, const SystemConfig& c) {
  return cloud_offload_cap(s.h_cloud[i], c.bandwidth_cloud(), c);
}

double edge_cap_without_queue(const SlotState& s, std::size_t i, const SystemConfig& c) {
  const double u_max = c.slot_length * c.flops_per_cycle_local * c.f_local_max /
                       c.task_flops_encode;
  return std::min(u_max, semantic_offload_cap(s.h_edge[i], c.bandwidth_edge(), c));
}

// Cloud volume for weight w on [0, upper]; 0 is kept when the literal
// (no "-1") power law makes the first bit cost more than it saves.
double best_u_cloud(double w, Complex h, double upper, const SystemConfig& c) {
  const double u = u_cloud_closed_form(w, h, upper, c);
  if (u <= 0.0 || c.shannon_minus_one) return u;
  const double gain = -w * u + c.lyapunov_v * shannon_tx_power(u, h, c.bandwidth_cloud(), c).watts;
  return gain < 0.0 ? u : 0.0;
}

DeviceChoice finish_local(const SlotState& s, std::size_t i, double ue, double uc,
                          const SystemConfig& c) {
  DeviceChoice d;
  d.u_edge = ue;
  d.u_cloud = uc;
  d.f_encode = encode_freq_for(ue, c);
  d.f_local = solve_f_local(s, i, ue, uc, c);
  return d;
}

// Shared prices on the queue budget (λ) and the local GPU budget (ν), with
// every variable at its own closed form. Bisection keeps the feasible side.
DeviceChoice priced_choice(const SlotState& s, std::size_t i, bool e, bool cl,
                           const SystemConfig& c) {
  const double q = s.q_local[i];
  const double we = weight_edge_volume(s, i);
  const double wl = weight_local(s, i);
  const double cen = encode_hz_per_task(c);
  const double kl = local_tasks_per_hz(c);
  const double ue_cap = e ? std::min(q, edge_cap_without_queue(s, i, c)) : 0.0;
  const double uc_cap = cl ? std::min(q, cloud_cap(s, i, c)) : 0.0;
  const double fmax = c.f_local_max;
  const double va3 = 3.0 * c.lyapunov_v * c.alpha_local;

  struct Pt {
    double ue, uc, fl;
  };
  auto at = [&](double lam, double nu) {
    Pt p{};
    if (e) {
      const double m = we - lam - nu * cen;
      p.ue = m > 0.0 ? clamp0(std::sqrt(m / (va3 * cen * cen * cen)), ue_cap) : 0.0;
    }
    if (cl && wl - lam > 0.0)
      p.uc = clamp0(u_cloud_stationary(wl - lam, s.h_cloud[i], c), uc_cap);
    const double m = (wl - lam) * kl - nu;
    p.fl = m > 0.0 ? clamp0(std::sqrt(m / va3), fmax) : 0.0;
    return p;
  };
  auto freq_ok = [&](const Pt& p) { return cen * p.ue + p.fl <= fmax; };
  auto with_nu = [&](double lam) {
    Pt p = at(lam, 0.0);
    if (freq_ok(p)) return p;
    double lo = 0.0, hi = std::max(std::max(we, 0.0) / cen, std::max(wl, 0.0) * kl) + 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (freq_ok(at(lam, mid))) hi = mid;
      else lo = mid;
    }
    return at(lam, hi);
  };
  auto total = [&](const Pt& p) { return p.ue + p.uc + p.fl * kl; };

  Pt p = with_nu(0.0);
  if (total(p) > q) {
    double lo = 0.0, hi = std::max(std::max(we, wl), 0.0) + 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (total(with_nu(mid)) <= q) hi = mid;
      else lo = mid;
    }
    p = with_nu(hi);
  }
  DeviceChoice d;
  d.u_edge = p.ue;
  d.u_cloud = p.uc;
  d.f_encode = encode_freq_for(p.ue, c);
  const double room_hz = std::max(0.0, (q - p.ue - p.uc) / kl);
  d.f_local = clamp0(std::min(p.fl, room_hz), fmax - d.f_encode);
  return d;
}

}  // namespace

InfeasibleAllocation::InfeasibleAllocation(std::string constraint, std::size_t device)
    : std::invalid_argument("infeasible allocation at device " + std::to_string(device) +
                            ": " + constraint),
      constraint_(std::move(constraint)),
      device_(device) {}

GTerms device_g_terms(std::size_t i, const Allocation& a, const Policy& p,
                      const SlotState& s, const SystemConfig& c) {
  return terms_of(i, vars_of(i, a, p), s, c);
}

std::vector<GTerms> g_breakdown(const Allocation& a, const Policy& p, const SlotState& s,
                                const SystemConfig& c) {
  check_sizes(a, p, s);
  std::vector<GTerms> out;
  out.reserve(s.num_devices());
  for (std::size_t i = 0; i < s.num_devices(); ++i) out.push_back(device_g_terms(i, a, p, s, c));
  return out;
}

void check_feasible(const Allocation& a, const Policy& p, const SlotState& s,
                    const SystemConfig& c) {
  check_sizes(a, p, s);
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    const DeviceVars d = vars_of(i, a, p);
    for (double x : {d.u_edge, d.u_cloud, d.f_local, d.f_encode, d.f_edge})
      if (!(std::isfinite(x) && x >= 0.0)) throw InfeasibleAllocation("non-negativity", i);
    if (!d.rho_edge && d.u_edge != 0.0)
      throw InfeasibleAllocation("u_edge must be 0 without MEC association", i);
    if (!d.rho_cloud && d.u_cloud != 0.0)
      throw InfeasibleAllocation("u_cloud must be 0 without MCC association", i);
    if (above(d.f_local + d.f_encode, c.f_local_max))
      throw InfeasibleAllocation("f_local + f_encode <= f_local_max", i);
    if (above(d.f_edge, c.f_edge_max)) throw InfeasibleAllocation("f_edge <= f_edge_max", i);
    if (above(encode_freq_for(d.u_edge, c), d.f_encode))
      throw InfeasibleAllocation("encoder frequency covers u_edge", i);
    const double mu_local = d.u_edge + d.u_cloud + d.f_local * local_tasks_per_hz(c);
    if (above(mu_local, s.q_local[i])) throw InfeasibleAllocation("mu_local <= Q_local", i);
    if (above(edge_exec_rate(std::min(d.f_edge, c.f_edge_max), c), s.q_edge[i]))
      throw InfeasibleAllocation("mu_edge <= Q_edge", i);
    if (d.rho_edge && !edge_tx_power(d.u_edge, s.h_edge[i], c.bandwidth_edge(), c).feasible)
      throw InfeasibleAllocation("semantic transmit power within p_tx_max", i);
    if (d.rho_cloud &&
        !shannon_tx_power(d.u_cloud, s.h_cloud[i], c.bandwidth_cloud(), c).feasible)
      throw InfeasibleAllocation("cloud transmit power within p_tx_max", i);
  }
}

double evaluate_g(const Allocation& a, const Policy& p, const SlotState& s,
                  const SystemConfig& c) {
  check_feasible(a, p, s, c);
  double g = 0.0;
  for (std::size_t i = 0; i < s.num_devices(); ++i) g += device_g_terms(i, a, p, s, c).total();
  return g;
}

double u_edge_stationary(double w, const SystemConfig& c) {
  if (!(w > 0.0)) return 0.0;
  const double r = c.slot_length * c.flops_per_cycle_local / c.task_flops_encode;
  return std::sqrt(r * r * r * w / (3.0 * c.lyapunov_v * c.alpha_local));
}

double u_edge_closed_form(double w, double upper, const SystemConfig& c) {
  return clamp0(u_edge_stationary(w, c), upper);
}

double u_cloud_stationary(double w, Complex h, const SystemConfig& c) {
  if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
  const double sk0 = c.sentence_len * c.bits_per_word;
  const double arg = w * c.slot_length * std::norm(h) /
                     (std::numbers::ln2 * c.lyapunov_v * sk0 * c.noise_psd);
  return c.slot_length * c.bandwidth_cloud() / sk0 * std::log2(arg);
}

double u_cloud_closed_form(double w, Complex h, double upper, const SystemConfig& c) {
  return clamp0(u_cloud_stationary(w, h, c), upper);
}

double f_local_stationary(double w, const SystemConfig& c) {
  if (!(w > 0.0)) return 0.0;
  return std::sqrt(c.slot_length * w * c.flops_per_cycle_local /
                   (3.0 * c.lyapunov_v * c.task_flops_total * c.alpha_local));
}

double f_local_closed_form(double w, double upper, const SystemConfig& c) {
  return clamp0(f_local_stationary(w, c), upper);
}

double f_edge_stationary(double w, const SystemConfig& c) {
  if (!(w > 0.0)) return 0.0;
  return std::sqrt(c.slot_length * w * c.flops_per_cycle_edge /
                   (3.0 * c.lyapunov_v * c.task_flops_decode * c.alpha_edge_weighted));
}

double f_edge_closed_form(double w, double q_edge, const SystemConfig& c) {
  const double drain = q_edge * c.task_flops_decode / (c.slot_length * c.flops_per_cycle_edge);
  return clamp0(f_edge_stationary(w, c), std::min(c.f_edge_max, drain));
}

double semantic_ceiling_volume(double b, const SystemConfig& c) {
  return c.slot_length * b * c.accuracy_curve.ceiling() /
         (c.sentence_len * c.symbols_per_word);
}

double u_edge_upper(const SlotState& s, std::size_t i, const SystemConfig& c) {
  return std::min(s.q_local[i], edge_cap_without_queue(s, i, c));
}

double solve_u_edge(const SlotState& s, std::size_t i, const SystemConfig& c) {
  return best_u_edge(weight_edge_volume(s, i), u_edge_upper(s, i, c), s.h_edge[i], c);
}

double solve_u_cloud(const SlotState& s, std::size_t i, double u_edge, const SystemConfig& c) {
  double w = weight_local(s, i);
  if (c.p32_weight_mode == WeightMode::paper) w -= u_edge;
  const double upper = std::min(s.q_local[i] - u_edge, cloud_cap(s, i, c));
  return best_u_cloud(w, s.h_cloud[i], upper, c);
}

double solve_f_local(const SlotState& s, std::size_t i, double u_edge, double u_cloud,
                     const SystemConfig& c) {
  const double w = c.p32_weight_mode == WeightMode::paper ? s.q_local[i] : weight_local(s, i);
  const double room_hz = (s.q_local[i] - u_edge - u_cloud) / local_tasks_per_hz(c);
  const double upper = std::min(c.f_local_max - encode_freq_for(u_edge, c), room_hz);
  return f_local_closed_form(w, upper, c);
}

double solve_f_edge(const SlotState& s, std::size_t i, const SystemConfig& c) {
  const double w = c.p32_weight_mode == WeightMode::paper ? s.q_edge[i]
                                                          : s.q_edge[i] + s.z_edge[i];
  return f_edge_closed_form(w, s.q_edge[i], c);
}

std::vector<double> solve_u_edge(const SlotState& s, const Policy& p, const SystemConfig& c) {
  std::vector<double> out(s.num_devices(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (p.rho_edge[i]) out[i] = solve_u_edge(s, i, c);
  return out;
}

std::vector<double> solve_u_cloud(const SlotState& s, const Policy& p,
                                  std::span<const double> ue, const SystemConfig& c) {
  std::vector<double> out(s.num_devices(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (p.rho_cloud[i]) out[i] = solve_u_cloud(s, i, ue[i], c);
  return out;
}

std::vector<double> solve_f_local(const SlotState& s, const Policy&,
                                  std::span<const double> ue, std::span<const double> uc,
                                  const SystemConfig& c) {
  std::vector<double> out(s.num_devices(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = solve_f_local(s, i, ue[i], uc[i], c);
  return out;
}

std::vector<double> solve_f_edge(const SlotState& s, const Policy&, const SystemConfig& c) {
  std::vector<double> out(s.num_devices(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = solve_f_edge(s, i, c);
  return out;
}

DeviceChoice solve_device(const SlotState& s, std::size_t i, bool e, bool cl,
                          const SystemConfig& c) {
  const double ue = e ? solve_u_edge(s, i, c) : 0.0;
  const double uc = cl ? solve_u_cloud(s, i, ue, c) : 0.0;
  DeviceChoice best = finish_local(s, i, ue, uc, c);
  if (c.critic_mode == CriticMode::sequential) return best;

  const double f_edge = solve_f_edge(s, i, c);
  auto score = [&](const DeviceChoice& d) {
    return terms_of(i, {d.u_edge, d.u_cloud, d.f_local, d.f_encode, f_edge, e, cl}, s, c)
        .total();
  };
  double best_g = score(best);
  auto consider = [&](const DeviceChoice& d) {
    const double g = score(d);
    if (g < best_g) {
      best_g = g;
      best = d;
    }
  };

  if (cl) {
    const double uc1 = best_u_cloud(weight_local(s, i), s.h_cloud[i],
                                    std::min(s.q_local[i], cloud_cap(s, i, c)), c);
    const double ue1 =
        e ? best_u_edge(weight_edge_volume(s, i),
                        std::min(s.q_local[i] - uc1, edge_cap_without_queue(s, i, c)),
                        s.h_edge[i], c)
          : 0.0;
    consider(finish_local(s, i, ue1, uc1, c));
  }
  consider(priced_choice(s, i, e, cl, c));
  return best;
}

CriticResult evaluate_policy(const Policy& policy, const SlotState& s, const SystemConfig& c) {
  const std::size_t n = s.num_devices();
  if (policy.num_devices() != n) throw std::invalid_argument("evaluate_policy: size mismatch");
  CriticResult r;
  r.alloc = Allocation::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = solve_device(s, i, policy.rho_edge[i] != 0, policy.rho_cloud[i] != 0, c);
    r.alloc.u_edge[i] = d.u_edge;
    r.alloc.u_cloud[i] = d.u_cloud;
    r.alloc.f_local[i] = d.f_local;
    r.alloc.f_encode[i] = d.f_encode;
    r.alloc.f_edge[i] = solve_f_edge(s, i, c);
  }
  r.g_value = evaluate_g(r.alloc, policy, s, c);
  r.terms = g_breakdown(r.alloc, policy, s, c);
  return r;
}

SlotCritic::SlotCritic(const SlotState& state, const SystemConfig& cfg)
    : state_(state), cfg_(&cfg) {
  const std::size_t n = state_.num_devices();
  f_edge_.resize(n);
  table_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f_edge_[i] = solve_f_edge(state_, i, cfg);
    for (int e = 0; e < 2; ++e) {
      for (int c = 0; c < 2; ++c) {
        Entry& en = table_[i][2 * e + c];
        en.choice = solve_device(state_, i, e != 0, c != 0, cfg);
        const auto& d = en.choice;
        en.terms = terms_of(
            i, {d.u_edge, d.u_cloud, d.f_local, d.f_encode, f_edge_[i], e != 0, c != 0}, state_,
            cfg);
      }
    }
  }
}

double SlotCritic::g(const Policy& p) const {
  double g = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i)
    g += entry(i, p.rho_edge[i] != 0, p.rho_cloud[i] != 0).terms.total();
  return g;
}

CriticResult SlotCritic::evaluate(const Policy& p) const {
  const std::size_t n = table_.size();
  if (p.num_devices() != n) throw std::invalid_argument("SlotCritic: size mismatch");
  CriticResult r;
  r.alloc = Allocation::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = entry(i, p.rho_edge[i] != 0, p.rho_cloud[i] != 0).choice;
    r.alloc.u_edge[i] = d.u_edge;
    r.alloc.u_cloud[i] = d.u_cloud;
    r.alloc.f_local[i] = d.f_local;
    r.alloc.f_encode[i] = d.f_encode;
    r.alloc.f_edge[i] = f_edge_[i];
  }
  r.g_value = evaluate_g(r.alloc, p, state_, *cfg_);
  r.terms = g_breakdown(r.alloc, p, state_, *cfg_);
  return r;
}

}  // namespace semoff
