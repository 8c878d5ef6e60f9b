// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "semoff/actor.hpp"
#include "semoff/critic.hpp"
#include "semoff/engine.hpp"
#include "semoff/oracle.hpp"
#include "semoff/scenario.hpp"
#include "semoff/verify.hpp"

using namespace semoff;

namespace {

constexpr std::uint64_t kSlots = 15000;
constexpr std::uint64_t kSeed = 1;

std::string fmt(const char* f, auto... args) {
  char buf[2048];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

SystemConfig preset(int k) { return apply_preset(SystemConfig{}, k); }

ScenarioConfig scen(const std::string& policy) {
  ScenarioConfig s;
  s.policy = PolicySource::parse(policy);
  s.seed = kSeed;
  return s;
}

// Full-length runs shared between criteria.
std::map<std::pair<int, std::string>, MetricsLog> cache;

const MetricsLog& run(int scenario, const std::string& policy) {
  const auto key = std::make_pair(scenario, policy);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto t0 = std::chrono::steady_clock::now();
    it = cache.emplace(key, run_scenario(preset(scenario), scen(policy), kSlots)).first;
    std::fprintf(stderr, "  ran scenario %d %s in %.1f s\n", scenario, policy.c_str(),
                 seconds_since(t0));
  }
  return it->second;
}

const RunSummary& summary(int scenario, const std::string& policy) {
  static std::map<std::pair<int, std::string>, RunSummary> memo;
  const auto key = std::make_pair(scenario, policy);
  auto it = memo.find(key);
  if (it == memo.end()) it = memo.emplace(key, summarize(run(scenario, policy))).first;
  return it->second;
}

double mean_queue(const RunSummary& s) { return s.mean_q_local_all + s.mean_q_edge_all; }

// 1 -------------------------------------------------------------------------

std::pair<int, std::string> shell(const std::string& args) {
  const std::string cmd = std::string(SEMOFF_BIN) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void enumeration_counts() {
  const std::vector<std::pair<int, std::string>> want{
      {4, "6"}, {6, "225"}, {8, "1960"}, {10, "9450"}, {12, "32670"}};
  bool ok = true;
  double slowest = 0;
  std::string got;
  for (const auto& [users, count] : want) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto [code, out] =
        shell("enumerate --users " + std::to_string(users) + " --chi-e 4 --chi-c 2 --count-only");
    slowest = std::max(slowest, seconds_since(t0));
    const std::string line = out.substr(0, out.find('\n'));
    got += (got.empty() ? "" : ",") + line;
    ok = ok && code == 0 && line == count;
  }
  report(1, "enumeration counts", ok && slowest < 1.0,
         fmt("counts %s, slowest %.3f s (limit 1 s)", got.c_str(), slowest));
}

// 2 -------------------------------------------------------------------------

oracle::Device device_of(const SlotState& s, std::size_t i, bool e, bool c) {
  return {s.q_local[i], s.q_edge[i], s.z_local[i], s.z_edge[i],
          std::norm(s.h_edge[i]), std::norm(s.h_cloud[i]), e, c};
}

// Each subproblem's objective is the device's share of G with the earlier
// subproblems at their solver values and the later ones at zero.
std::array<double, 4> subproblem_gaps(const SlotState& s, std::size_t i, const SystemConfig& c,
                                      int n) {
  const oracle::Device d = device_of(s, i, true, true);
  const double b_edge = c.bw_edge_total / std::min(c.chi_edge, c.num_devices);
  const double ceiling = 0.985 * c.slot_length * b_edge / (c.sentence_len * c.symbols_per_word);
  const double ue = solve_u_edge(s, i, c);
  const double uc = solve_u_cloud(s, i, ue, c);
  const double fl = solve_f_local(s, i, ue, uc, c);
  const double fe = solve_f_edge(s, i, c);
  const double fen = ue * c.task_flops_encode / (c.slot_length * c.flops_per_cycle_local);
  const double kl = oracle::local_rate(1.0, c);

  std::array<double, 4> gap{};
  {
    const oracle::Device de = device_of(s, i, true, false);
    auto f = [&](double x) { return oracle::device_g(de, {x, 0, 0, 0}, c); };
    const double hi = std::min({d.ql, oracle::encode_rate(c.f_local_max, c), ceiling});
    gap[0] = f(ue) - oracle::grid_min(0, hi, n, f);
  }
  {
    auto f = [&](double x) { return oracle::device_g(d, {ue, x, 0, 0}, c); };
    const double hi = std::max(0.0, std::min(d.ql - ue, oracle::cloud_cap(d.gain_cloud, c)));
    gap[1] = f(uc) - oracle::grid_min(0, hi, n, f);
  }
  {
    auto f = [&](double x) { return oracle::device_g(d, {ue, uc, x, 0}, c); };
    const double hi = std::max(0.0, std::min(c.f_local_max - fen, (d.ql - ue - uc) / kl));
    gap[2] = f(fl) - oracle::grid_min(0, hi, n, f);
  }
  {
    const oracle::Device dn = device_of(s, i, false, false);
    auto f = [&](double x) { return oracle::device_g(dn, {0, 0, 0, x}, c); };
    const double hi = std::min(c.f_edge_max, d.qe / oracle::edge_rate(1.0, c));
    gap[3] = f(fe) - oracle::grid_min(0, hi, n, f);
  }
  return gap;
}

double oracle_joint_grid(const Policy& p, const SlotState& s, const SystemConfig& c, int points) {
  double total = 0;
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    const auto d = device_of(s, i, p.rho_edge[i] != 0, p.rho_cloud[i] != 0);
    const double ue_hi = d.rho_e ? std::min(d.ql, oracle::encode_rate(c.f_local_max, c)) : 0;
    const double uc_hi = d.rho_c ? std::min(d.ql, oracle::cloud_cap(d.gain_cloud, c)) : 0;
    const double fe_hi = std::min(c.f_edge_max, d.qe / oracle::edge_rate(1.0, c));
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

void solver_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::array<double, 4> worst{};
  for (int n = 0; n < 1000; ++n) {
    const SystemConfig c = preset(1 + n % 2);
    const SlotState s = random_slot_state(c, 1000 + n);
    const auto g = subproblem_gaps(s, n % c.num_devices, c, 10000);
    for (int k = 0; k < 4; ++k) worst[k] = std::max(worst[k], g[k]);
  }
  SystemConfig small = preset(1);
  small.num_devices = 4;
  std::mt19937_64 rng(kSeed);
  double joint = 0;
  for (int n = 0; n < 20; ++n) {
    const SlotState s = random_slot_state(small, 5000 + n);
    const Policy p = random_policy(rng, 4, small.chi_edge, small.chi_cloud);
    const double g = SlotCritic(s, small).g(p);
    const double grid = oracle_joint_grid(p, s, small, 24);
    joint = std::max(joint, (g - grid) / std::max(std::abs(grid), 1e-12));
  }
  const double secs = seconds_since(t0);
  const bool ok = *std::max_element(worst.begin(), worst.end()) <= 1e-9 && joint <= 5e-3 &&
                  secs < 120;
  report(2, "solver-oracle equivalence", ok,
         fmt("worst gaps u_edge %.2g u_cloud %.2g f_local %.2g f_edge %.2g (limit 1e-9), "
             "joint I=4 excess %.2g (limit 5e-3), %.1f s",
             worst[0], worst[1], worst[2], worst[3], joint, secs));
}

// 3 -------------------------------------------------------------------------

void gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  SystemConfig c;
  c.num_devices = 4;
  auto net = ActorNetwork::for_config(c, kSeed);
  std::mt19937_64 rng(kSeed);
  std::vector<std::vector<double>> xs, ys;
  for (int k = 0; k < 8; ++k) {
    xs.push_back(featurize(random_slot_state(c, 700 + k), c));
    std::vector<double> y(8);
    for (auto& v : y) v = static_cast<double>(rng() & 1u);
    ys.push_back(y);
  }
  std::vector<double> grad;
  net.bce(xs, ys, &grad);
  const auto p0 = net.parameters();
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t k = 0; k < p0.size(); ++k) {
    auto p = p0;
    p[k] = p0[k] + h;
    net.set_parameters(p);
    const double up = net.bce(xs, ys);
    p[k] = p0[k] - h;
    net.set_parameters(p);
    const double down = net.bce(xs, ys);
    const double fd = (up - down) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(grad[k]));
    if (scale > 1e-8) worst = std::max(worst, std::abs(fd - grad[k]) / scale);
  }
  const double secs = seconds_since(t0);
  report(3, "gradient check", worst <= 1e-4 && secs < 10,
         fmt("%zu parameters, worst relative error %.2g (limit 1e-4), %.1f s", p0.size(), worst,
             secs));
}

// 4 -------------------------------------------------------------------------

void drift_bound() {
  std::uint64_t worst = 0, slots = 0;
  for (const char* p : {"drlh:64", "exhaustive", "random"}) {
    worst = std::max(worst, run(1, p).bound_violations);
    slots += run(1, p).records.size();
  }
  report(4, "drift-plus-penalty bound", worst == 0,
         fmt("%llu violations over %llu scenario I slots", (unsigned long long)worst,
             (unsigned long long)slots));
}

// 5 -------------------------------------------------------------------------

void stability() {
  bool ok = true;
  std::string detail;
  for (const char* p : {"exhaustive", "drlh:64"}) {
    const auto& s = summary(1, p);
    const double ql = *std::max_element(s.mean_q_local.begin(), s.mean_q_local.end());
    const double qe = *std::max_element(s.mean_q_edge.begin(), s.mean_q_edge.end());
    ok = ok && ql <= 5.0 && qe <= 1.0;
    detail += fmt("%s max QL %.3f QE %.3f; ", p, ql, qe);
  }
  report(5, "queue stability scenario I", ok, detail + "limits 5 and 1");
}

// 6 -------------------------------------------------------------------------

void near_optimality() {
  bool ok = true;
  std::string detail;
  for (int sc : {1, 2}) {
    const double ex = summary(sc, "exhaustive").mean_power;
    const double d64 = summary(sc, "drlh:64").mean_power;
    const double d16 = summary(sc, "drlh:16").mean_power;
    const double d8 = summary(sc, "drlh:8").mean_power;
    const double gap = (d64 - ex) / ex;
    ok = ok && std::abs(gap) <= 0.05 && d16 >= 0.98 * d64 && d8 >= 0.98 * d64;
    detail += fmt("S%d exhaustive %.4g W, DRLH64 %.4g W (%+.2f%%), DRLH16 %.4g W, DRLH8 %.4g W; ",
                  sc, ex, d64, 100 * gap, d16, d8);
  }
  report(6, "near-optimality", ok, detail + "limits 5% and -2%");
}

// 7 -------------------------------------------------------------------------

void learning_dynamics() {
  auto queue = [](const SlotRecord& r) { return r.mean_q_local() + r.mean_q_edge(); };
  std::array<std::size_t, 3> stab{};
  bool rise_fall = true;
  std::string detail;
  const std::array<const char*, 3> names{"drlh:64", "drlh:16", "drlh:8"};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto w = windowed_means(run(2, names[k]), queue, 1000);
    stab[k] = stabilization_window(w);
    const auto peak = std::max_element(w.begin(), w.end());
    const bool rf = peak != w.end() - 1 && *peak > w.back();
    rise_fall = rise_fall && rf;
    const auto& log = run(2, names[k]);
    const auto wl = windowed_means(log, [](const SlotRecord& r) { return r.mean_q_local(); });
    const auto we = windowed_means(log, [](const SlotRecord& r) { return r.mean_q_edge(); });
    detail += fmt("%s stable from window %zu (local %zu, edge %zu), peak %.2f in window %td, "
                  "final %.2f; ",
                  names[k], stab[k], stabilization_window(wl), stabilization_window(we), *peak,
                  peak - w.begin(), w.back());
  }
  report(7, "learning dynamics scenario II", rise_fall && stab[0] < stab[1] && stab[1] < stab[2],
         detail + "need 64 < 16 < 8");
}

// 8 -------------------------------------------------------------------------

void baseline_dominance() {
  bool ok = true;
  std::string detail;
  for (int sc : {1, 2}) {
    const auto& d = summary(sc, "drlh:64");
    const auto& r = summary(sc, "random");
    ok = ok && mean_queue(d) < mean_queue(r) && d.mean_power < r.mean_power;
    detail += fmt("S%d queue %.3f vs %.3f, power %.4g vs %.4g W; ", sc, mean_queue(d),
                  mean_queue(r), d.mean_power, r.mean_power);
  }
  report(8, "baseline dominance", ok, detail + "DRLH64 vs random");
}

// 9 -------------------------------------------------------------------------

// Every device at both maximum frequencies and every associated link at p_tx_max.
double power_ceiling(const SystemConfig& c) {
  const double fl = c.f_local_max, fe = c.f_edge_max;
  return c.num_devices * (c.alpha_local * fl * fl * fl + c.alpha_edge_weighted * fe * fe * fe) +
         (c.chi_edge_eff() + c.chi_cloud) * c.p_tx_max;
}

template <class F>
bool monotone(const std::vector<SweepRow>& rows, F&& f, int dir) {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (dir * (f(rows[k].summary) - f(rows[k - 1].summary)) < 0) return false;
  return true;
}

void trends() {
  const auto t0 = std::chrono::steady_clock::now();
  auto power = [](const RunSummary& s) { return s.mean_power; };
  auto q = [](const RunSummary& s) { return mean_queue(s); };

  // Λ = 750 needs the unbounded thresholds of scenario II.
  const SystemConfig unbounded = preset(2);
  const auto arr =
      sweep(SweepKind::arrival, {50, 100, 200, 500, 750}, unbounded, scen("drlh:64"), kSlots);
  const double ceiling = power_ceiling(unbounded);
  std::vector<double> ap;
  for (const auto& r : arr) ap.push_back(r.summary.mean_power);
  bool increasing = true;
  for (std::size_t k = 1; k < ap.size(); ++k) increasing = increasing && ap[k] > ap[k - 1];
  const bool arrival_ok = monotone(arr, q, +1) && increasing && ap.back() >= 0.9 * ceiling;

  const auto v2 = sweep(SweepKind::v, {0.5, 1, 2, 4, 8}, preset(2), scen("drlh:64"), kSlots);
  const bool v2_ok = monotone(v2, power, -1) && monotone(v2, q, +1);

  const auto v1 = sweep(SweepKind::v, {0.5, 1, 2, 4, 8}, preset(1), scen("drlh:64"), kSlots);
  double lo = INFINITY, hi = 0, mean = 0;
  for (const auto& r : v1) {
    lo = std::min(lo, r.summary.mean_power);
    hi = std::max(hi, r.summary.mean_power);
    mean += r.summary.mean_power / v1.size();
  }
  const double spread = (hi - lo) / mean;
  const bool v1_ok = spread <= 0.05;

  auto list = [](const std::vector<SweepRow>& rows, auto f) {
    std::string s;
    for (const auto& r : rows) s += fmt("%s%.3g", s.empty() ? "" : "/", f(r.summary));
    return s;
  };
  report(9, "trend reproduction", arrival_ok && v2_ok && v1_ok,
         fmt("arrival: queue %s, power %s W vs ceiling %.4g W (need >= 90%%) [%s]; "
             "S2 v: power %s, queue %s [%s]; S1 v: power %s, spread %.1f%% (limit 5%%) [%s]; %.0f s",
             list(arr, q).c_str(), list(arr, power).c_str(), ceiling,
             arrival_ok ? "ok" : "fail", list(v2, power).c_str(), list(v2, q).c_str(),
             v2_ok ? "ok" : "fail", list(v1, power).c_str(), 100 * spread,
             v1_ok ? "ok" : "fail", seconds_since(t0)));
}

// 10 ------------------------------------------------------------------------

void loss_convergence() {
  bool ok = true;
  std::string detail;
  for (int sc : {1, 2}) {
    const auto& log = run(sc, "drlh:64");
    const auto& s = summary(sc, "drlh:64");
    bool finite = s.losses_finite;
    for (const auto& l : log.losses)
      finite = finite && std::isfinite(l.train_loss) && std::isfinite(l.test_loss);
    const double first_train = log.losses.empty() ? NAN : log.losses.front().train_loss;
    const double first_test = log.losses.empty() ? NAN : log.losses.front().test_loss;
    const bool decreasing = s.tail_train_loss < std::numbers::ln2 &&
                            s.tail_test_loss < std::numbers::ln2 &&
                            s.tail_train_loss < first_train && s.tail_test_loss < first_test;
    ok = ok && finite && decreasing && s.tail_test_loss < 0.15;
    detail += fmt("S%d first train/test %.3f/%.3f, final-third %.4f/%.4f, %s; ", sc, first_train,
                  first_test, s.tail_train_loss, s.tail_test_loss, finite ? "finite" : "NON-FINITE");
  }
  report(10, "loss convergence", ok, detail + "test limit 0.15");
}

// 11 ------------------------------------------------------------------------

std::string metrics_csv(const MetricsLog& log) {
  std::ostringstream out;
  write_metrics_csv(log, out);
  return out.str();
}

void determinism() {
  bool ok = true;
  std::string detail;
  for (const auto& [sc, p] : std::vector<std::pair<int, std::string>>{{1, "drlh:64"},
                                                                        {2, "random"}}) {
    const auto again = run_scenario(preset(sc), scen(p), kSlots);
    const bool same = metrics_csv(again) == metrics_csv(run(sc, p));
    ok = ok && same;
    detail += fmt("S%d %s %s; ", sc, p.c_str(), same ? "identical" : "DIFFERS");
  }
  report(11, "determinism", ok, detail + "metrics.csv byte comparison");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  enumeration_counts();
  solver_oracles();
  gradient();
  drift_bound();
  stability();
  near_optimality();
  learning_dynamics();
  baseline_dominance();
  trends();
  loss_convergence();
  determinism();
  std::printf("%d of 11 criteria failed, %.0f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
