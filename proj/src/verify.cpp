#include "semoff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "semoff/actor.hpp"
#include "semoff/channel.hpp"
#include "semoff/critic.hpp"
#include "semoff/engine.hpp"
#include "semoff/oracle.hpp"
#include "semoff/power.hpp"

namespace semoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Device i of `s` as a one-device state.
SlotState single(const SlotState& s, std::size_t i) {
  SlotState o;
  o.h_edge = {s.h_edge[i]};
  o.h_cloud = {s.h_cloud[i]};
  o.q_local = {s.q_local[i]};
  o.q_edge = {s.q_edge[i]};
  o.z_local = {s.z_local[i]};
  o.z_edge = {s.z_edge[i]};
  return o;
}

struct DevicePoint {
  double u_edge = 0.0, u_cloud = 0.0, f_local = 0.0, f_edge = 0.0;
};

// G of the lone device, or +inf when the point is infeasible.
double device_g(const DevicePoint& d, bool e, bool c, const SlotState& one,
                const SystemConfig& cfg) {
  Allocation a = Allocation::zeros(1);
  a.u_edge[0] = d.u_edge;
  a.u_cloud[0] = d.u_cloud;
  a.f_local[0] = d.f_local;
  a.f_encode[0] = encode_freq_for(d.u_edge, cfg);
  a.f_edge[0] = d.f_edge;
  Policy p = Policy::none(1);
  p.rho_edge[0] = e;
  p.rho_cloud[0] = c;
  try {
    check_feasible(a, p, one, cfg);
  } catch (const InfeasibleAllocation&) {
    return kInf;
  }
  return device_g_terms(0, a, p, one, cfg).total();
}

double grid_min(double upper, int points, const std::function<double(double)>& f) {
  double best = f(0.0);
  if (!(upper > 0.0)) return best;
  for (int k = 1; k < points; ++k) best = std::min(best, f(upper * k / (points - 1)));
  return best;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

SlotState random_slot_state(const SystemConfig& cfg, std::uint64_t seed, double queue_hi) {
  const auto geom = place_devices(cfg, seed);
  const auto draw = draw_channels(geom, cfg, seed % 100003, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> q(0.0, queue_hi);
  std::bernoulli_distribution empty(0.25);
  const auto n = static_cast<std::size_t>(cfg.num_devices);
  SlotState s = SlotState::zeros(n);
  s.h_edge = draw.h_edge;
  s.h_cloud = draw.h_cloud;
  for (std::size_t i = 0; i < n; ++i) {
    s.q_local[i] = empty(rng) ? 0.0 : q(rng);
    s.q_edge[i] = empty(rng) ? 0.0 : q(rng);
    if (cfg.q_max_local.bounded()) s.z_local[i] = empty(rng) ? 0.0 : q(rng);
    if (cfg.q_max_edge.bounded()) s.z_edge[i] = empty(rng) ? 0.0 : q(rng);
  }
  return s;
}

const char* subproblem_name(Subproblem k) {
  switch (k) {
    case Subproblem::u_edge: return "u_edge";
    case Subproblem::u_cloud: return "u_cloud";
    case Subproblem::f_local: return "f_local";
    case Subproblem::f_edge: return "f_edge";
  }
  return "?";
}

double subproblem_gap(Subproblem k, const SlotState& s, std::size_t i, const SystemConfig& cfg,
                      int grid_points) {
  const SlotState one = single(s, i);
  const double q = s.q_local[i];
  const double kl = local_exec_rate(cfg.f_local_max, cfg) / cfg.f_local_max;
  switch (k) {
    case Subproblem::u_edge: {
      auto f = [&](double u) { return device_g({u, 0, 0, 0}, true, false, one, cfg); };
      return f(solve_u_edge(one, 0, cfg)) - grid_min(u_edge_upper(one, 0, cfg), grid_points, f);
    }
    case Subproblem::u_cloud: {
      const double ue = solve_u_edge(one, 0, cfg);
      auto f = [&](double u) { return device_g({ue, u, 0, 0}, true, true, one, cfg); };
      const double upper =
          std::min(q - ue, cloud_offload_cap(s.h_cloud[i], cfg.bandwidth_cloud(), cfg));
      return f(solve_u_cloud(one, 0, ue, cfg)) - grid_min(upper, grid_points, f);
    }
    case Subproblem::f_local: {
      const double ue = solve_u_edge(one, 0, cfg);
      const double uc = solve_u_cloud(one, 0, ue, cfg);
      auto f = [&](double x) { return device_g({ue, uc, x, 0}, true, true, one, cfg); };
      const double upper = std::min(cfg.f_local_max - encode_freq_for(ue, cfg),
                                    (q - ue - uc) / kl);
      return f(solve_f_local(one, 0, ue, uc, cfg)) - grid_min(upper, grid_points, f);
    }
    case Subproblem::f_edge: {
      auto f = [&](double x) { return device_g({0, 0, 0, x}, false, false, one, cfg); };
      const double upper = std::min(cfg.f_edge_max, edge_freq_for(s.q_edge[i], cfg));
      return f(solve_f_edge(one, 0, cfg)) - grid_min(upper, grid_points, f);
    }
  }
  return 0.0;
}

double joint_grid_g(const Policy& policy, const SlotState& s, const SystemConfig& cfg,
                    int points) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    const SlotState one = single(s, i);
    const bool e = policy.rho_edge[i] != 0, c = policy.rho_cloud[i] != 0;
    const double ue_hi = e ? u_edge_upper(one, 0, cfg) : 0.0;
    const double uc_hi =
        c ? std::min(s.q_local[i], cloud_offload_cap(s.h_cloud[i], cfg.bandwidth_cloud(), cfg))
          : 0.0;
    const double fe_hi = std::min(cfg.f_edge_max, edge_freq_for(s.q_edge[i], cfg));
    auto axis = [&](double hi, int k) { return hi > 0.0 ? hi * k / (points - 1) : 0.0; };
    const int nue = ue_hi > 0.0 ? points : 1, nuc = uc_hi > 0.0 ? points : 1;
    const int nfe = fe_hi > 0.0 ? points : 1;
    double best = kInf;
    for (int a = 0; a < nue; ++a)
      for (int b = 0; b < nuc; ++b)
        for (int l = 0; l < points; ++l)
          for (int d = 0; d < nfe; ++d) {
            const DevicePoint p{axis(ue_hi, a), axis(uc_hi, b), axis(cfg.f_local_max, l),
                                axis(fe_hi, d)};
            best = std::min(best, device_g(p, e, c, one, cfg));
          }
    total += best;
  }
  return total;
}

std::vector<VerifyCheck> run_verification(const SystemConfig& base, const VerifyOptions& opt,
                                          const std::function<void(const VerifyCheck&)>& on_check) {
  std::vector<VerifyCheck> out;
  auto report = [&](VerifyCheck c) {
    if (on_check) on_check(c);
    out.push_back(std::move(c));
  };

  SystemConfig cfg = base;
  cfg.p32_weight_mode = WeightMode::g_consistent;
  for (Subproblem k : {Subproblem::u_edge, Subproblem::u_cloud, Subproblem::f_local,
                       Subproblem::f_edge}) {
    double worst = -kInf;
    for (int n = 0; n < opt.solver_cases; ++n) {
      const auto seed = opt.seed * 1000003 + static_cast<std::uint64_t>(n);
      const SlotState s = random_slot_state(cfg, seed);
      const std::size_t i = seed % s.num_devices();
      worst = std::max(worst, subproblem_gap(k, s, i, cfg));
    }
    report({std::string("solver ") + subproblem_name(k), worst <= 1e-9,
            fmt("worst objective gap to grid %.3g", worst)});
  }

  {
    SystemConfig small = cfg;
    small.num_devices = 4;
    small.chi_edge = std::min(small.chi_edge, 4);
    small.chi_cloud = std::min(small.chi_cloud, 4);
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    for (int n = 0; n < opt.joint_cases; ++n) {
      const SlotState s = random_slot_state(small, opt.seed * 7919 + n);
      const Policy p = random_policy(rng, 4, small.chi_edge, small.chi_cloud, small.cardinality);
      const double g = SlotCritic(s, small).g(p);
      const double grid = joint_grid_g(p, s, small);
      worst = std::max(worst, (g - grid) / std::max(std::abs(grid), 1e-12));
    }
    report({"joint allocation vs 4-D grid", worst <= 5e-3,
            fmt("worst relative excess %.3g", worst)});
  }

  {
    const auto net = ActorNetwork::glorot({24, 16, 8}, opt.seed);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> x(0.0, 1.0);
    std::bernoulli_distribution bit(0.5);
    std::vector<std::vector<double>> xs(16, std::vector<double>(24)), ys(16, std::vector<double>(8));
    for (auto& v : xs)
      for (auto& e : v) e = x(rng);
    for (auto& v : ys)
      for (auto& e : v) e = bit(rng) ? 1.0 : 0.0;
    const double r = gradient_check(net, xs, ys);
    report({"actor gradient", r <= 1.0, fmt("worst error / tolerance %.3g", r)});
  }

  {
    ScenarioConfig sc;
    sc.policy = PolicySource::parse("drlh", base.training.num_candidates);
    sc.seed = opt.seed;
    const auto log = run_scenario(base, sc, opt.bound_slots);
    report({"drift-plus-penalty bound", log.bound_violations == 0,
            fmt("%.0f violations in %.0f slots", static_cast<double>(log.bound_violations),
                static_cast<double>(log.records.size()))});
  }
  return out;
}

}  // namespace semoff
