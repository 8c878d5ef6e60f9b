#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Random but physically drawn slot state: channels from a random geometry and
// slot index, queues uniform on [0, queue_hi] with roughly a quarter of them
// empty. Virtual queues are drawn only for bounded thresholds.
SlotState random_slot_state(const SystemConfig& cfg, std::uint64_t seed, double queue_hi = 20.0);

enum class Subproblem { u_edge, u_cloud, f_local, f_edge };
const char* subproblem_name(Subproblem k);

// Objective of the solver's choice minus the best point of a uniform
// `grid_points` grid over the subproblem's feasible interval (device i, with
// the earlier subproblems fixed at their solver values). Positive means the
// grid found something better.
double subproblem_gap(Subproblem k, const SlotState& state, std::size_t i,
                      const SystemConfig& cfg, int grid_points = 10000);

// Per-device minimum of G over a `points`^4 grid in (u^E, u^C, f^L, f^E),
// summed over devices. Infeasible grid points are skipped.
double joint_grid_g(const Policy& policy, const SlotState& state, const SystemConfig& cfg,
                    int points = 24);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  int solver_cases = 1000;
  int joint_cases = 20;
  std::uint64_t bound_slots = 3000;
  std::uint64_t seed = 1;
};

// Solver-vs-grid oracles, actor gradient check and a drift-bound run on `cfg`.
std::vector<VerifyCheck> run_verification(
    const SystemConfig& cfg, const VerifyOptions& opt = {},
    const std::function<void(const VerifyCheck&)>& on_check = {});

}  // namespace semoff
