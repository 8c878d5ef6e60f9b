#pragma once

#include <cstdint>
#include <string>

#include "semoff/config.hpp"

namespace semoff {

// Where the slot's candidate policies come from.
struct PolicySource {
  enum class Kind { drlh, exhaustive, random };
  Kind kind = Kind::drlh;
  int num_candidates = 64;  // drlh only

  // "drlh:N", "drlh" (N from the training config), "exhaustive", "random".
  static PolicySource parse(const std::string& text, int default_candidates = 64);
  std::string to_string() const;

  friend bool operator==(const PolicySource&, const PolicySource&) = default;
};

struct ScenarioConfig {
  std::string name = "default";
  int preset = 0;  // 0 keeps the system block as given; 1 and 2 are the reference scenarios
  PolicySource policy{};
  std::uint64_t seed = 1;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct RunConfig {
  SystemConfig system{};
  ScenarioConfig scenario{};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Preset 1: Λ = 100/s, Q^L_max = 5, Q^E_max = 1.
// Preset 2: Λ = 750/s, both thresholds unbounded.
SystemConfig apply_preset(SystemConfig cfg, int preset);

// System config with the scenario preset applied.
SystemConfig effective_system(const RunConfig& run);

}  // namespace semoff
