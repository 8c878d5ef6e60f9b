#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "semoff/critic.hpp"
#include "semoff/oracle.hpp"
#include "semoff/power.hpp"
#include "semoff/verify.hpp"

using namespace semoff;

namespace {

Complex at_pathloss(double db) { return {std::pow(10.0, -db / 20.0), 0.0}; }

oracle::Device device_of(const SlotState& s, const Policy& p, std::size_t i) {
  return {s.q_local[i],          s.q_edge[i],          s.z_local[i],
          s.z_edge[i],           std::norm(s.h_edge[i]), std::norm(s.h_cloud[i]),
          p.rho_edge[i] != 0,    p.rho_cloud[i] != 0};
}

double oracle_g(const Allocation& a, const Policy& p, const SlotState& s, const SystemConfig& c) {
  double g = 0;
  for (std::size_t i = 0; i < s.num_devices(); ++i)
    g += oracle::device_g(device_of(s, p, i), {a.u_edge[i], a.u_cloud[i], a.f_local[i], a.f_edge[i]},
                          c);
  return g;
}

// Sum over devices of the best point on a points^4 grid, straight from the formulas.
double oracle_joint_grid(const Policy& p, const SlotState& s, const SystemConfig& c, int points) {
  double total = 0;
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    const auto d = device_of(s, p, i);
    const double ue_hi = d.rho_e ? std::min(d.ql, oracle::encode_rate(c.f_local_max, c)) : 0;
    const double uc_hi = d.rho_c ? std::min(d.ql, oracle::cloud_cap(d.gain_cloud, c)) : 0;
    const double fe_hi = std::min(c.f_edge_max, d.qe * c.task_flops_decode /
                                                     (c.slot_length * c.flops_per_cycle_edge));
    auto ax = [&](double hi, int k) { return hi * k / (points - 1); };
    double best = oracle::device_g(d, {}, c);
    for (int a = 0; a < points; ++a)
      for (int b = 0; b < points; ++b)
        for (int l = 0; l < points; ++l)
          for (int e = 0; e < points; ++e)
            best = std::min(best, oracle::device_g(d, {ax(ue_hi, a), ax(uc_hi, b),
                                                       ax(c.f_local_max, l), ax(fe_hi, e)},
                                                   c));
    total += best;
  }
  return total;
}

SystemConfig scenario1() {
  SystemConfig c;
  c.q_max_local = QueueLimit::of(5);
  c.q_max_edge = QueueLimit::of(1);
  return c;
}

}  // namespace

TEST_CASE("G of an idle allocation") {
  const SystemConfig c;
  SlotState s = SlotState::zeros(8);
  const Allocation a = Allocation::zeros(8);
  const Policy p = Policy::none(8);
  CHECK(evaluate_g(a, p, s, c) == 0);
  for (auto& q : s.q_local) q = 5;
  s.z_local[3] = 2;
  // Only the arrival term survives: Σ (Q^L + Z^L) Λτ.
  CHECK(evaluate_g(a, p, s, c) == doctest::Approx((8 * 5 + 2) * 1.0));
}

TEST_CASE("G matches a term-by-term recomputation") {
  const SystemConfig c = scenario1();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const SlotState s = random_slot_state(c, 500 + n);
    const Policy p = random_policy(rng, 8, 4, 2);
    Allocation a = evaluate_policy(p, s, c).alloc;
    for (std::size_t i = 0; i < 8; ++i) {
      const double k = U(rng);
      a.u_cloud[i] *= k;
      a.f_local[i] *= k;
      a.f_edge[i] *= k;
    }
    const double g = evaluate_g(a, p, s, c);
    CHECK(g == doctest::Approx(oracle_g(a, p, s, c)).epsilon(1e-10));
    double sum = 0;
    for (const auto& t : g_breakdown(a, p, s, c)) sum += t.total();
    CHECK(sum == g);
  }
}

TEST_CASE("infeasible allocations name the violated constraint") {
  const SystemConfig c;
  SlotState s = SlotState::zeros(2);
  s.q_local = {3, 3};
  s.q_edge = {1, 1};
  Policy p = Policy::none(2);
  Allocation a = Allocation::zeros(2);
  a.u_edge[0] = 0.5;
  try {
    evaluate_g(a, p, s, c);
    FAIL("expected a throw");
  } catch (const InfeasibleAllocation& e) {
    CHECK(e.device() == 0);
    CHECK(e.constraint() == "u_edge must be 0 without MEC association");
  }
  a = Allocation::zeros(2);
  a.f_local[1] = 1.0e9;
  a.f_encode[1] = 0.3e9;
  CHECK_THROWS_WITH_AS(evaluate_g(a, p, s, c), doctest::Contains("f_local + f_encode"),
                       InfeasibleAllocation);
  a = Allocation::zeros(2);
  a.f_edge[0] = 1.0e9;  // 19.2 tasks of service against a backlog of 1
  CHECK_THROWS_WITH_AS(evaluate_g(a, p, s, c), doctest::Contains("mu_edge <= Q_edge"),
                       InfeasibleAllocation);
  a = Allocation::zeros(2);
  a.u_cloud[0] = 1;
  p.rho_cloud[0] = 1;
  a.f_local[0] = 1.2e9;
  CHECK_THROWS_WITH_AS(evaluate_g(a, p, s, c), doctest::Contains("mu_local <= Q_local"),
                       InfeasibleAllocation);
  a = Allocation::zeros(2);
  p.rho_edge[1] = 1;
  a.u_edge[1] = 0.5;
  CHECK_THROWS_WITH_AS(evaluate_g(a, p, s, c), doctest::Contains("encoder frequency"),
                       InfeasibleAllocation);
}

TEST_CASE("edge volume closed form") {
  const SystemConfig c;
  const double r = 20.48 / 1.2e9;
  const double stationary = std::sqrt(r * r * r * 10 / (3 * 2 * 5.787e-26));
  CHECK(u_edge_stationary(10, c) == doctest::Approx(stationary));
  CHECK(u_edge_stationary(10, c) == doctest::Approx(11.97).epsilon(1e-3));
  const double ceiling = semantic_ceiling_volume(c.bandwidth_edge(), c);
  CHECK(ceiling == doctest::Approx(10.26).epsilon(1e-3));
  CHECK(u_edge_closed_form(10, ceiling, c) == ceiling);
  CHECK(u_edge_closed_form(-1, ceiling, c) == 0);
  CHECK(u_edge_closed_form(10, 0.5, c) == 0.5);
  // Printed P3.1 objective on a 1e-4 task grid.
  auto obj = [&](double u) {
    const double f = u / r;
    return -10 * u + 2 * 5.787e-26 * f * f * f;
  };
  const double grid = oracle::grid_min(0, ceiling, static_cast<int>(ceiling / 1e-4) + 1, obj);
  CHECK(obj(u_edge_closed_form(10, ceiling, c)) <= grid + 1e-9);
}

TEST_CASE("edge volume solver accounts for transmit power") {
  const SystemConfig c;
  SlotState s = SlotState::zeros(1);
  s.q_local[0] = 15;
  s.h_edge[0] = at_pathloss(100);
  const double u = solve_u_edge(s, 0, c);
  oracle::Device d{15, 0, 0, 0, std::norm(s.h_edge[0]), 1, true, false};
  auto obj = [&](double x) { return oracle::device_g(d, {x, 0, 0, 0}, c); };
  const double hi = u_edge_upper(s, 0, c);
  CHECK(obj(u) <= oracle::grid_min(0, hi, 20001, obj) + 1e-9);
  s.q_local[0] = 0.5;
  CHECK(solve_u_edge(s, 0, c) <= 0.5);
  s.q_local[0] = 0;
  CHECK(solve_u_edge(s, 0, c) == 0);
}

TEST_CASE("cloud volume closed form") {
  const SystemConfig c;
  const Complex h = at_pathloss(116.8);
  const double stationary =
      0.01 * 25e3 / 400 * std::log2(8 * 0.01 * std::norm(h) / (std::log(2.0) * 2 * 400 * c.noise_psd));
  CHECK(u_cloud_stationary(8, h, c) == doctest::Approx(stationary));
  CHECK(u_cloud_stationary(8, h, c) == doctest::Approx(10.1).epsilon(0.01));
  const double cap = oracle::cloud_cap(std::norm(h), c);
  CHECK(u_cloud_closed_form(8, h, cap, c) == doctest::Approx(cap));
  CHECK(cap == doctest::Approx(6.9).epsilon(0.01));
  CHECK(u_cloud_closed_form(0, h, cap, c) == 0);
  CHECK(u_cloud_closed_form(-3, h, cap, c) == 0);
  CHECK(u_cloud_closed_form(8, h, 0, c) == 0);
  auto obj = [&](double u) { return -8 * u + 2 * oracle::cloud_tx(u, std::norm(h), c); };
  CHECK(obj(u_cloud_closed_form(8, h, cap, c)) <= oracle::grid_min(0, cap, 10000, obj) + 1e-9);
  // Interior optimum when the weight is small.
  const double w = 0.05;
  const double u = u_cloud_closed_form(w, h, cap, c);
  CHECK(u > 0);
  CHECK(u < cap);
  auto obj2 = [&](double x) { return -w * x + 2 * oracle::cloud_tx(x, std::norm(h), c); };
  CHECK(obj2(u) <= oracle::grid_min(0, cap, 10000, obj2) + 1e-9);
}

TEST_CASE("cloud solver respects the remaining queue") {
  const SystemConfig c;
  SlotState s = SlotState::zeros(1);
  s.q_local[0] = 2;
  s.h_cloud[0] = at_pathloss(116.8);
  CHECK(solve_u_cloud(s, 0, 2, c) == 0);
  CHECK(solve_u_cloud(s, 0, 0.5, c) <= 1.5);
}

TEST_CASE("local frequency closed form") {
  const SystemConfig c;
  const double f = std::sqrt(0.01 * 10 * 2048 / (3 * 2 * 4.8e9 * 5.787e-26));
  CHECK(f_local_stationary(10, c) == doctest::Approx(f));
  CHECK(f == doctest::Approx(3.505e8).epsilon(1e-3));
  SlotState s = SlotState::zeros(1);
  s.q_local[0] = 10;
  CHECK(solve_f_local(s, 0, 0, 0, c) == doctest::Approx(f));
  auto obj = [&](double x) { return -10 * oracle::local_rate(x, c) + 2 * 5.787e-26 * x * x * x; };
  CHECK(obj(solve_f_local(s, 0, 0, 0, c)) <= oracle::grid_min(0, 1.2e9, 120001, obj) + 1e-9);
  s.q_local[0] = 0;
  CHECK(solve_f_local(s, 0, 0, 0, c) == 0);
  s.q_local[0] = 0.1;
  CHECK(solve_f_local(s, 0, 0, 0, c) == doctest::Approx(0.1 * 4.8e9 / (0.01 * 2048)));
  CHECK(solve_f_local(s, 0, 0, 0, c) == doctest::Approx(2.34e7).epsilon(1e-2));
}

TEST_CASE("local frequency shares the GPU with the encoder") {
  const SystemConfig c;
  SlotState s = SlotState::zeros(1);
  s.q_local[0] = 1000;
  const double ue = 15;
  const double f = solve_f_local(s, 0, ue, 0, c);
  CHECK(f + encode_freq_for(ue, c) <= c.f_local_max * (1 + 1e-12));
}

TEST_CASE("edge frequency closed form") {
  const SystemConfig c;
  const double f = std::sqrt(0.01 * 3 * 6912 / (3 * 2 * 3.6e9 * 4.45e-26));
  CHECK(f_edge_stationary(3, c) == doctest::Approx(f));
  CHECK(f == doctest::Approx(4.645e8).epsilon(1e-3));
  CHECK(f_edge_closed_form(3, 3, c) == doctest::Approx(3 * 3.6e9 / (0.01 * 6912)));
  CHECK(f_edge_closed_form(3, 3, c) == doctest::Approx(1.5625e8));
  CHECK(f_edge_closed_form(0, 0, c) == 0);
  CHECK(f_edge_closed_form(1e6, 1e6, c) == c.f_edge_max);
  SlotState s = SlotState::zeros(1);
  s.q_edge[0] = 40;
  auto obj = [&](double x) {
    return -40 * oracle::edge_rate(x, c) + 2 * 4.45e-26 * x * x * x;
  };
  CHECK(obj(solve_f_edge(s, 0, c)) <= oracle::grid_min(0, c.f_edge_max, 10000, obj) + 1e-9);
}

TEST_CASE("zero queues give a zero allocation") {
  const SystemConfig c;
  SlotState s = random_slot_state(c, 3);
  for (std::size_t i = 0; i < 8; ++i) s.q_local[i] = s.q_edge[i] = s.z_local[i] = s.z_edge[i] = 0;
  std::mt19937_64 rng(1);
  const auto r = evaluate_policy(random_policy(rng, 8, 4, 2), s, c);
  CHECK(r.alloc == Allocation::zeros(8));
  CHECK(r.g_value == 0);
}

TEST_CASE("critic beats random feasible allocations of the same policy") {
  const SystemConfig c = scenario1();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int worse = 0;
  for (int n = 0; n < 20; ++n) {
    const SlotState s = random_slot_state(c, 900 + n);
    const Policy p = random_policy(rng, 8, 4, 2);
    const double g = evaluate_policy(p, s, c).g_value;
    for (int k = 0; k < 1000; ++k) {
      double gr = 0;
      for (std::size_t i = 0; i < 8; ++i) {
        const auto d = device_of(s, p, i);
        // Uniform point of the box, thinned until it is feasible.
        oracle::Point x{d.rho_e ? U(rng) * std::min(d.ql, 20.48) : 0,
                        d.rho_c ? U(rng) * std::min(d.ql, oracle::cloud_cap(d.gain_cloud, c)) : 0,
                        U(rng) * c.f_local_max, U(rng) * c.f_edge_max};
        double v = oracle::device_g(d, x, c);
        while (!std::isfinite(v)) {
          x.ue *= 0.5;
          x.uc *= 0.5;
          x.fl *= 0.5;
          x.fe *= 0.5;
          v = oracle::device_g(d, x, c);
        }
        gr += v;
      }
      if (gr < g - 1e-9 * std::max(1.0, std::abs(g))) ++worse;
    }
  }
  CHECK(worse == 0);
}

TEST_CASE("joint allocation against a 4-D grid on small instances") {
  SystemConfig c = scenario1();
  c.num_devices = 4;
  std::mt19937_64 rng(8);
  for (int n = 0; n < 4; ++n) {
    const SlotState s = random_slot_state(c, 70 + n);
    const Policy p = random_policy(rng, 4, 4, 2);
    const double g = SlotCritic(s, c).g(p);
    const double grid = oracle_joint_grid(p, s, c, 16);
    CHECK(g <= grid + 5e-3 * std::abs(grid));
  }
}

TEST_CASE("slot critic table agrees with the direct evaluation") {
  const SystemConfig c = scenario1();
  std::mt19937_64 rng(2);
  for (int n = 0; n < 30; ++n) {
    const SlotState s = random_slot_state(c, 40 + n);
    const SlotCritic sc(s, c);
    const Policy p = random_policy(rng, 8, 4, 2);
    const auto direct = evaluate_policy(p, s, c);
    CHECK(sc.g(p) == direct.g_value);
    const auto cached = sc.evaluate(p);
    CHECK(cached.g_value == direct.g_value);
    CHECK(cached.alloc == direct.alloc);
  }
}

TEST_CASE("coordinated critic never loses to the single sequential pass") {
  SystemConfig coord = scenario1();
  SystemConfig seq = coord;
  seq.critic_mode = CriticMode::sequential;
  std::mt19937_64 rng(4);
  for (int n = 0; n < 50; ++n) {
    const SlotState s = random_slot_state(coord, 300 + n);
    const Policy p = random_policy(rng, 8, 4, 2);
    CHECK(evaluate_policy(p, s, coord).g_value <= evaluate_policy(p, s, seq).g_value + 1e-12);
  }
}

TEST_CASE("critic allocations are always feasible") {
  for (int preset = 1; preset <= 2; ++preset) {
    SystemConfig c = scenario1();
    if (preset == 2) {
      c.arrival_rate_per_sec = 750;
      c.q_max_local = QueueLimit::unbounded();
      c.q_max_edge = QueueLimit::unbounded();
    }
    std::mt19937_64 rng(preset);
    for (int n = 0; n < 100; ++n) {
      const SlotState s = random_slot_state(c, 1000 * preset + n, 30.0);
      const Policy p = random_policy(rng, 8, 4, 2);
      const auto r = evaluate_policy(p, s, c);
      CHECK_NOTHROW(check_feasible(r.alloc, p, s, c));
    }
  }
}

TEST_CASE("paper weight mode uses the printed weights") {
  SystemConfig c;
  c.p32_weight_mode = WeightMode::paper;
  SlotState s = SlotState::zeros(1);
  s.q_local[0] = 10;
  s.z_local[0] = 6;
  s.q_edge[0] = 3;
  s.z_edge[0] = 4;
  CHECK(solve_f_local(s, 0, 0, 0, c) == doctest::Approx(f_local_stationary(10, c)));
  CHECK(solve_f_edge(s, 0, c) == doctest::Approx(f_edge_closed_form(3, 3, c)));
  SystemConfig g = c;
  g.p32_weight_mode = WeightMode::g_consistent;
  CHECK(solve_f_local(s, 0, 0, 0, g) == doctest::Approx(f_local_stationary(16, g)));
}
