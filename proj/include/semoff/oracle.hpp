#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/critic.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Number of feasible association policies. Exact cardinality gives
// C(I, min(χ^E, I)) * C(I, χ^C). Throws std::invalid_argument when χ^C > I.
std::uint64_t policy_count(int num_devices, int chi_edge, int chi_cloud,
                           CardinalityMode mode = CardinalityMode::exact);

// Streams every feasible policy: edge subsets in the outer loop, cloud subsets
// in the inner loop, each in lexicographic order of their sorted index lists
// (smaller subsets first under at_most).
class PolicyEnumerator {
 public:
  PolicyEnumerator(int num_devices, int chi_edge, int chi_cloud,
                   CardinalityMode mode = CardinalityMode::exact);

  // Writes the next policy into `out`; false once exhausted.
  bool next(Policy& out);

 private:
  struct Subsets {
    int n = 0, max_k = 0, k = 0;
    bool exact = true;
    std::vector<int> idx;
    void reset();
    bool advance();
  };

  int n_;
  Subsets edge_, cloud_;
  bool started_ = false;
  bool done_ = false;
};

void for_each_policy(int num_devices, int chi_edge, int chi_cloud, CardinalityMode mode,
                     const std::function<void(const Policy&)>& fn);

// Argmin of G over all policies; ties go to the first in enumeration order.
std::pair<Policy, CriticResult> exhaustive_best(const SlotState& state,
                                                const SystemConfig& cfg);

// Uniform draw over the enumerated set.
Policy random_policy(std::mt19937_64& rng, int num_devices, int chi_edge, int chi_cloud,
                     CardinalityMode mode = CardinalityMode::exact);

std::uint64_t binomial(int n, int k);

}  // namespace semoff
