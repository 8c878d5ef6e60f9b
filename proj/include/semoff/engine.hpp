#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semoff/actor.hpp"
#include "semoff/channel.hpp"
#include "semoff/config.hpp"
#include "semoff/critic.hpp"
#include "semoff/scenario.hpp"
#include "semoff/types.hpp"

namespace semoff {

// One row of metrics.csv. Queue vectors are the backlog at the start of the slot.
struct SlotRecord {
  std::uint64_t slot = 0;
  std::vector<double> q_local, q_edge, z_local, z_edge;
  double p_local = 0.0, p_edge = 0.0, p_tx_edge = 0.0, p_tx_cloud = 0.0;
  double total_power = 0.0;
  double g_value = 0.0;
  double drift_plus_penalty = 0.0;
  double bound = 0.0;
  double arrivals = 0.0;   // summed over devices
  double mu_local = 0.0;   // summed realised local-queue service
  double mu_edge = 0.0;    // summed realised edge-queue service
  int num_candidates = 0;
  std::string policy;

  double mean_q_local() const;
  double mean_q_edge() const;
};

struct LossRecord {
  std::uint64_t slot = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;  // NaN when no fresh pairs were available
};

struct MetricsLog {
  std::vector<SlotRecord> records;
  std::vector<LossRecord> losses;
  std::uint64_t bound_violations = 0;
  std::uint64_t service_violations = 0;  // μ exceeding the backlog
};

// Mean of `field` over consecutive windows of `window` slots (last one may be short).
std::vector<double> windowed_means(const MetricsLog& log,
                                   const std::function<double(const SlotRecord&)>& field,
                                   std::size_t window = 1000);

// First window whose mean lies within `tolerance` (relative) of the final window.
std::size_t stabilization_window(const std::vector<double>& window_means,
                                 double tolerance = 0.1);

struct RunSummary {
  std::uint64_t slots = 0;
  std::uint64_t tail_start = 0;
  std::vector<double> mean_q_local;  // per device over the tail
  std::vector<double> mean_q_edge;
  double mean_q_local_all = 0.0;
  double mean_q_edge_all = 0.0;
  double mean_power = 0.0;
  double mean_g = 0.0;
  double final_z_local_over_t = 0.0;  // max_i Z^L_i(T) / T
  double final_z_edge_over_t = 0.0;
  double tail_train_loss = 0.0;  // NaN without DRLH
  double tail_test_loss = 0.0;
  bool losses_finite = true;
  std::uint64_t bound_violations = 0;
  std::uint64_t service_violations = 0;
};

// Tail = final `tail_fraction` of the slots.
RunSummary summarize(const MetricsLog& log, double tail_fraction = 1.0 / 3.0);

// Slot-by-slot simulation of one scenario.
class Simulator {
 public:
  Simulator(const SystemConfig& cfg, const ScenarioConfig& scenario);

  // Draw channels, choose a policy, execute, draw arrivals, update queues.
  SlotOutcome run_slot();

  std::uint64_t slot() const { return t_; }
  const SlotState& queues() const { return state_; }
  const MetricsLog& log() const { return log_; }
  MetricsLog take_log() { return std::move(log_); }
  const LinkGeometry& geometry() const { return geom_; }
  const ActorNetwork* actor() const { return net_ ? &*net_ : nullptr; }
  const SystemConfig& config() const { return cfg_; }

  // Per-slot hook for channel traces.
  std::function<void(std::uint64_t, const ChannelDraw&)> on_channels;

 private:
  const std::vector<Policy>& candidates(const SlotState& s, std::vector<double>& features);
  void learn(std::vector<double> features, const Policy& chosen);

  SystemConfig cfg_;
  ScenarioConfig scenario_;
  LinkGeometry geom_;
  SlotState state_;  // queue part only; channels filled per slot
  std::uint64_t t_ = 0;
  MetricsLog log_;

  std::optional<ActorNetwork> net_;
  AdamOptimizer opt_;
  std::unique_ptr<ReplayMemory> memory_;
  std::vector<std::vector<double>> fresh_x_, fresh_y_;
  std::vector<Policy> cands_;
  std::mt19937_64 noise_rng_, replay_rng_, random_rng_;
};

// Poisson arrivals of one device in one slot, counter-based.
int draw_arrivals(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t slot,
                  std::size_t device);

// Runs training.total_slots slots (or `slots` when given).
MetricsLog run_scenario(const SystemConfig& cfg, const ScenarioConfig& scenario,
                        std::optional<std::uint64_t> slots = std::nullopt,
                        const std::function<void(std::uint64_t)>& progress = {});

enum class SweepKind { arrival, v, users };
SweepKind parse_sweep_kind(const std::string& s);
const char* sweep_kind_name(SweepKind k);

struct SweepRow {
  double value = 0.0;
  std::uint64_t search_space = 0;
  RunSummary summary;
};

// Runs one scenario per value on `threads` workers (0: SEMOFF_THREADS or 1).
std::vector<SweepRow> sweep(SweepKind kind, const std::vector<double>& values,
                            const SystemConfig& cfg, const ScenarioConfig& scenario,
                            std::optional<std::uint64_t> slots = std::nullopt,
                            unsigned threads = 0);

// SEMOFF_THREADS when set and positive, else 1.
unsigned worker_threads();

void write_metrics_csv(const MetricsLog& log, std::ostream& out);
void write_loss_csv(const MetricsLog& log, std::ostream& out);
void write_sweep_csv(SweepKind kind, const std::vector<SweepRow>& rows, std::ostream& out);
std::string summary_json(const RunSummary& s, const RunConfig& run);

}  // namespace semoff
