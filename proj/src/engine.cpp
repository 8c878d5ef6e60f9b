#include "semoff/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "semoff/config_io.hpp"
#include "semoff/oracle.hpp"
#include "semoff/power.hpp"
#include "semoff/queueing.hpp"
#include "semoff/rng.hpp"

namespace semoff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool exceeds(double value, double limit) {
  return value > limit + 1e-9 * std::max(1.0, std::abs(limit));
}

}  // namespace

double SlotRecord::mean_q_local() const { return mean_of(q_local); }
double SlotRecord::mean_q_edge() const { return mean_of(q_edge); }

std::vector<double> windowed_means(const MetricsLog& log,
                                   const std::function<double(const SlotRecord&)>& field,
                                   std::size_t window) {
  if (window == 0) throw std::invalid_argument("windowed_means: window must be positive");
  std::vector<double> out;
  for (std::size_t start = 0; start < log.records.size(); start += window) {
    const std::size_t end = std::min(start + window, log.records.size());
    double s = 0.0;
    for (std::size_t k = start; k < end; ++k) s += field(log.records[k]);
    out.push_back(s / static_cast<double>(end - start));
  }
  return out;
}

std::size_t stabilization_window(const std::vector<double>& m, double tol) {
  if (m.empty()) return 0;
  const double final = m.back();
  for (std::size_t k = 0; k < m.size(); ++k)
    if (std::abs(m[k] - final) <= tol * std::abs(final)) return k;
  return m.size() - 1;
}

RunSummary summarize(const MetricsLog& log, double tail_fraction) {
  RunSummary s;
  const auto& r = log.records;
  s.slots = r.size();
  s.bound_violations = log.bound_violations;
  s.service_violations = log.service_violations;
  if (r.empty()) return s;
  const auto tail = static_cast<std::uint64_t>(std::floor(tail_fraction * r.size()));
  s.tail_start = r.size() - std::max<std::uint64_t>(tail, 1);
  const std::size_t n = r.front().q_local.size();
  s.mean_q_local.assign(n, 0.0);
  s.mean_q_edge.assign(n, 0.0);
  double power = 0.0, g = 0.0;
  for (std::size_t k = s.tail_start; k < r.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      s.mean_q_local[i] += r[k].q_local[i];
      s.mean_q_edge[i] += r[k].q_edge[i];
    }
    power += r[k].total_power;
    g += r[k].g_value;
  }
  const double cnt = static_cast<double>(r.size() - s.tail_start);
  for (std::size_t i = 0; i < n; ++i) {
    s.mean_q_local[i] /= cnt;
    s.mean_q_edge[i] /= cnt;
  }
  s.mean_q_local_all = mean_of(s.mean_q_local);
  s.mean_q_edge_all = mean_of(s.mean_q_edge);
  s.mean_power = power / cnt;
  s.mean_g = g / cnt;
  const double t = static_cast<double>(r.size());
  for (std::size_t i = 0; i < n; ++i) {
    s.final_z_local_over_t = std::max(s.final_z_local_over_t, r.back().z_local[i] / t);
    s.final_z_edge_over_t = std::max(s.final_z_edge_over_t, r.back().z_edge[i] / t);
  }

  double tr = 0.0, te = 0.0;
  std::size_t ntr = 0, nte = 0;
  for (const auto& l : log.losses) {
    if (!std::isfinite(l.train_loss)) s.losses_finite = false;
    if (!std::isnan(l.test_loss) && !std::isfinite(l.test_loss)) s.losses_finite = false;
    if (l.slot < s.tail_start) continue;
    tr += l.train_loss;
    ++ntr;
    if (!std::isnan(l.test_loss)) {
      te += l.test_loss;
      ++nte;
    }
  }
  s.tail_train_loss = ntr ? tr / ntr : kNaN;
  s.tail_test_loss = nte ? te / nte : kNaN;
  return s;
}

int draw_arrivals(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t slot,
                  std::size_t device) {
  const double mean = cfg.mean_arrivals_per_slot();
  if (!(mean > 0.0)) return 0;
  CounterEngine eng(derive_seed(seed, Stream::arrivals, slot, device));
  std::poisson_distribution<int> d(mean);
  return d(eng);
}

Simulator::Simulator(const SystemConfig& cfg, const ScenarioConfig& scenario)
    : cfg_(cfg), scenario_(scenario) {
  require_valid(cfg_);
  const auto seed = scenario_.seed;
  geom_ = place_devices(cfg_, seed);
  state_ = SlotState::zeros(static_cast<std::size_t>(cfg_.num_devices));
  noise_rng_.seed(derive_seed(seed, Stream::actor_noise));
  replay_rng_.seed(derive_seed(seed, Stream::replay));
  random_rng_.seed(derive_seed(seed, Stream::random_policy));
  if (scenario_.policy.kind == PolicySource::Kind::drlh) {
    if (scenario_.policy.num_candidates < 1)
      throw std::invalid_argument("drlh needs at least one candidate");
    net_ = ActorNetwork::for_config(cfg_, derive_seed(seed, Stream::actor_init));
    const auto& t = cfg_.training;
    opt_ = AdamOptimizer(net_->parameter_count(), t.learning_rate, t.adam_beta1, t.adam_beta2,
                         t.adam_epsilon);
    memory_ = std::make_unique<ReplayMemory>(static_cast<std::size_t>(t.memory_size));
  }
}

const std::vector<Policy>& Simulator::candidates(const SlotState& s,
                                                 std::vector<double>& features) {
  const int n = cfg_.num_devices;
  switch (scenario_.policy.kind) {
    case PolicySource::Kind::random:
      cands_.assign(
          1, random_policy(random_rng_, n, cfg_.chi_edge, cfg_.chi_cloud, cfg_.cardinality));
      return cands_;
    case PolicySource::Kind::exhaustive:
      if (cands_.empty())
        for_each_policy(n, cfg_.chi_edge, cfg_.chi_cloud, cfg_.cardinality,
                        [&](const Policy& p) { cands_.push_back(p); });
      return cands_;
    case PolicySource::Kind::drlh: break;
  }
  features = featurize(s, cfg_);
  cands_ = generate_candidates(forward(*net_, features), scenario_.policy.num_candidates,
                               noise_rng_, cfg_);
  return cands_;
}

void Simulator::learn(std::vector<double> features, const Policy& chosen) {
  auto target = policy_bits(chosen);
  fresh_x_.push_back(features);
  fresh_y_.push_back(target);
  memory_->push(std::move(features), std::move(target));

  const auto& t = cfg_.training;
  const std::uint64_t done = t_ + 1;
  const auto batch = static_cast<std::size_t>(t.batch_size);
  if (done < static_cast<std::uint64_t>(t.training_start) ||
      done % static_cast<std::uint64_t>(t.training_interval) != 0 || memory_->size() < batch)
    return;
  LossRecord rec;
  rec.slot = t_;
  rec.test_loss = fresh_x_.empty() ? kNaN : test_loss(*net_, fresh_x_, fresh_y_);
  rec.train_loss = *train_step(*net_, opt_, *memory_, batch, replay_rng_);
  fresh_x_.clear();
  fresh_y_.clear();
  log_.losses.push_back(rec);
}

SlotOutcome Simulator::run_slot() {
  const std::size_t n = state_.num_devices();
  const auto draw = draw_channels(geom_, cfg_, t_, scenario_.seed);
  if (on_channels) on_channels(t_, draw);
  SlotState s = state_;
  s.h_edge = draw.h_edge;
  s.h_cloud = draw.h_cloud;

  std::vector<double> features;
  const auto& cands = candidates(s, features);
  const SlotCritic critic(s, cfg_);
  std::size_t best = 0;
  double best_g = critic.g(cands[0]);
  for (std::size_t k = 1; k < cands.size(); ++k) {
    const double g = critic.g(cands[k]);
    if (g < best_g) {
      best_g = g;
      best = k;
    }
  }
  const Policy& policy = cands[best];
  const CriticResult res = critic.evaluate(policy);
  const auto& a = res.alloc;
  const PowerBreakdown pw = total_power(a, policy, s, cfg_);

  SlotRates rates;
  rates.mu_local.resize(n);
  rates.u_edge = a.u_edge;
  rates.mu_edge.resize(n);
  std::vector<double> arrivals(n);
  SlotState next = s;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu_l = a.u_edge[i] + a.u_cloud[i] + local_exec_rate(a.f_local[i], cfg_);
    const double mu_e = edge_exec_rate(a.f_edge[i], cfg_);
    if (exceeds(mu_l, s.q_local[i]) || exceeds(mu_e, s.q_edge[i])) ++log_.service_violations;
    rates.mu_local[i] = std::min(mu_l, s.q_local[i]);
    rates.mu_edge[i] = std::min(mu_e, s.q_edge[i]);
    arrivals[i] = draw_arrivals(cfg_, scenario_.seed, t_, i);
    next.q_local[i] = update_local_queue(s.q_local[i], rates.mu_local[i], arrivals[i]);
    next.q_edge[i] = update_edge_queue(s.q_edge[i], rates.mu_edge[i], rates.u_edge[i]);
  }
  auto z = update_virtual_queues(s.z_local, s.z_edge, next.q_local, next.q_edge, cfg_);
  next.z_local = std::move(z.z_local);
  next.z_edge = std::move(z.z_edge);

  const double dpp = drift_plus_penalty(s, next, pw.total, cfg_.lyapunov_v);
  const auto bound = theorem1_bound(s, rates, arrivals, pw.total, rate_caps(s, cfg_), cfg_);
  if (exceeds(dpp, bound.value)) ++log_.bound_violations;

  SlotRecord rec;
  rec.slot = t_;
  rec.q_local = s.q_local;
  rec.q_edge = s.q_edge;
  rec.z_local = s.z_local;
  rec.z_edge = s.z_edge;
  for (std::size_t i = 0; i < n; ++i) {
    rec.p_local += pw.local[i];
    rec.p_edge += pw.edge[i];
    rec.p_tx_edge += pw.tx_edge[i];
    rec.p_tx_cloud += pw.tx_cloud[i];
    rec.arrivals += arrivals[i];
    rec.mu_local += rates.mu_local[i];
    rec.mu_edge += rates.mu_edge[i];
  }
  rec.total_power = pw.total;
  rec.g_value = res.g_value;
  rec.drift_plus_penalty = dpp;
  rec.bound = bound.value;
  rec.num_candidates = static_cast<int>(cands.size());
  rec.policy = policy.to_string();
  log_.records.push_back(std::move(rec));

  if (net_) learn(std::move(features), policy);

  SlotOutcome out;
  out.mu_local = rates.mu_local;
  out.mu_edge = rates.mu_edge;
  out.p_local = pw.local;
  out.p_edge = pw.edge;
  out.p_tx_edge = pw.tx_edge;
  out.p_tx_cloud = pw.tx_cloud;
  out.total_power = pw.total;
  out.g_value = res.g_value;
  out.next_state = next;
  out.next_state.h_edge = s.h_edge;
  out.next_state.h_cloud = s.h_cloud;

  state_.q_local = next.q_local;
  state_.q_edge = next.q_edge;
  state_.z_local = next.z_local;
  state_.z_edge = next.z_edge;
  ++t_;
  return out;
}

MetricsLog run_scenario(const SystemConfig& cfg, const ScenarioConfig& scenario,
                        std::optional<std::uint64_t> slots,
                        const std::function<void(std::uint64_t)>& progress) {
  Simulator sim(cfg, scenario);
  const std::uint64_t total = slots.value_or(static_cast<std::uint64_t>(cfg.training.total_slots));
  for (std::uint64_t t = 0; t < total; ++t) {
    sim.run_slot();
    if (progress && (t + 1) % 1000 == 0) progress(t + 1);
  }
  return sim.take_log();
}

SweepKind parse_sweep_kind(const std::string& s) {
  if (s == "arrival") return SweepKind::arrival;
  if (s == "v") return SweepKind::v;
  if (s == "users") return SweepKind::users;
  throw std::invalid_argument("unknown sweep kind '" + s + "' (expected arrival, v or users)");
}

const char* sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::arrival: return "arrival";
    case SweepKind::v: return "v";
    case SweepKind::users: return "users";
  }
  return "?";
}

unsigned worker_threads() {
  if (const char* env = std::getenv("SEMOFF_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

std::vector<SweepRow> sweep(SweepKind kind, const std::vector<double>& values,
                            const SystemConfig& cfg, const ScenarioConfig& scenario,
                            std::optional<std::uint64_t> slots, unsigned threads) {
  std::vector<SystemConfig> cfgs;
  for (double v : values) {
    SystemConfig c = cfg;
    switch (kind) {
      case SweepKind::arrival: c.arrival_rate_per_sec = v; break;
      case SweepKind::v: c.lyapunov_v = v; break;
      case SweepKind::users:
        if (v != std::floor(v) || v < 1) throw std::invalid_argument("users sweep needs integers");
        c.num_devices = static_cast<int>(v);
        break;
    }
    require_valid(c);
    cfgs.push_back(std::move(c));
  }
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t k; (k = next++) < cfgs.size();) {
      try {
        rows[k].value = values[k];
        rows[k].search_space =
            policy_count(cfgs[k].num_devices, cfgs[k].chi_edge, cfgs[k].chi_cloud, cfgs[k].cardinality);
        rows[k].summary = summarize(run_scenario(cfgs[k], scenario, slots));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads ? threads : worker_threads(),
                                                      static_cast<unsigned>(cfgs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < nt; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  const auto prec = out.precision(17);
  const std::size_t n = log.records.empty() ? 0 : log.records.front().q_local.size();
  out << "slot";
  for (const char* q : {"ql", "qe", "zl", "ze"})
    for (std::size_t i = 0; i < n; ++i) out << ',' << q << '_' << i;
  out << ",p_local,p_edge,p_tx_edge,p_tx_cloud,total_power,g,drift_plus_penalty,bound,"
         "arrivals,mu_local,mu_edge,candidates,policy\n";
  for (const auto& r : log.records) {
    out << r.slot;
    for (const auto* v : {&r.q_local, &r.q_edge, &r.z_local, &r.z_edge})
      for (double x : *v) out << ',' << x;
    out << ',' << r.p_local << ',' << r.p_edge << ',' << r.p_tx_edge << ',' << r.p_tx_cloud
        << ',' << r.total_power << ',' << r.g_value << ',' << r.drift_plus_penalty << ','
        << r.bound << ',' << r.arrivals << ',' << r.mu_local << ',' << r.mu_edge << ','
        << r.num_candidates << ',' << r.policy << '\n';
  }
  out.precision(prec);
}

void write_loss_csv(const MetricsLog& log, std::ostream& out) {
  const auto prec = out.precision(17);
  out << "slot,train_loss,test_loss\n";
  for (const auto& l : log.losses) out << l.slot << ',' << l.train_loss << ',' << l.test_loss << '\n';
  out.precision(prec);
}

void write_sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows, std::ostream& out) {
  const auto prec = out.precision(17);
  out << sweep_kind_name(kind)
      << ",search_space,mean_q_local,mean_q_edge,mean_power,mean_g,tail_test_loss\n";
  for (const auto& r : rows) {
    out << r.value << ',' << r.search_space << ',' << r.summary.mean_q_local_all << ','
        << r.summary.mean_q_edge_all << ',' << r.summary.mean_power << ',' << r.summary.mean_g
        << ',' << r.summary.tail_test_loss << '\n';
  }
  out.precision(prec);
}

std::string summary_json(const RunSummary& s, const RunConfig& run) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::json j;
  j["seed"] = run.scenario.seed;
  j["policy"] = run.scenario.policy.to_string();
  j["slots"] = s.slots;
  j["tail_start"] = s.tail_start;
  j["mean_q_local"] = s.mean_q_local;
  j["mean_q_edge"] = s.mean_q_edge;
  j["mean_q_local_all"] = s.mean_q_local_all;
  j["mean_q_edge_all"] = s.mean_q_edge_all;
  j["mean_power"] = s.mean_power;
  j["mean_g"] = s.mean_g;
  j["final_z_local_over_t"] = s.final_z_local_over_t;
  j["final_z_edge_over_t"] = s.final_z_edge_over_t;
  j["tail_train_loss"] = num(s.tail_train_loss);
  j["tail_test_loss"] = num(s.tail_test_loss);
  j["losses_finite"] = s.losses_finite;
  j["bound_violations"] = s.bound_violations;
  j["service_violations"] = s.service_violations;
  j["config"] = to_json(run);
  return j.dump(2);
}

}  // namespace semoff
