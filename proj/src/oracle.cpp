#include "semoff/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace semoff {

namespace {

void check_args(int n, int chi_edge, int chi_cloud) {
  if (n < 1) throw std::invalid_argument("policy enumeration: need at least one device");
  if (chi_edge < 0 || chi_cloud < 0)
    throw std::invalid_argument("policy enumeration: negative cardinality");
  if (chi_cloud > n) throw std::invalid_argument("policy enumeration: chi_cloud exceeds device count");
}

std::uint64_t subset_count(int n, int k, CardinalityMode mode) {
  if (mode == CardinalityMode::exact) return binomial(n, k);
  std::uint64_t s = 0;
  for (int j = 0; j <= k; ++j) s += binomial(n, j);
  return s;
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int j = 1; j <= k; ++j) r = r * static_cast<std::uint64_t>(n - k + j) / j;
  return r;
}

std::uint64_t policy_count(int n, int chi_edge, int chi_cloud, CardinalityMode mode) {
  check_args(n, chi_edge, chi_cloud);
  return subset_count(n, std::min(chi_edge, n), mode) * subset_count(n, chi_cloud, mode);
}

void PolicyEnumerator::Subsets::reset() {
  k = exact ? max_k : 0;
  idx.resize(k);
  std::iota(idx.begin(), idx.end(), 0);
}

bool PolicyEnumerator::Subsets::advance() {
  int j = k - 1;
  while (j >= 0 && idx[j] == n - k + j) --j;
  if (j >= 0) {
    ++idx[j];
    for (int m = j + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
    return true;
  }
  if (exact || k == max_k) return false;
  ++k;
  idx.resize(k);
  std::iota(idx.begin(), idx.end(), 0);
  return true;
}

PolicyEnumerator::PolicyEnumerator(int n, int chi_edge, int chi_cloud, CardinalityMode mode)
    : n_(n) {
  check_args(n, chi_edge, chi_cloud);
  const bool exact = mode == CardinalityMode::exact;
  edge_.n = n;
  edge_.max_k = std::min(chi_edge, n);
  edge_.exact = exact;
  cloud_.n = n;
  cloud_.max_k = chi_cloud;
  cloud_.exact = exact;
  edge_.reset();
  cloud_.reset();
}

bool PolicyEnumerator::next(Policy& out) {
  if (done_) return false;
  if (started_) {
    if (!cloud_.advance()) {
      if (!edge_.advance()) {
        done_ = true;
        return false;
      }
      cloud_.reset();
    }
  }
  started_ = true;
  out = Policy::none(static_cast<std::size_t>(n_));
  for (int i : edge_.idx) out.rho_edge[i] = 1;
  for (int i : cloud_.idx) out.rho_cloud[i] = 1;
  return true;
}

void for_each_policy(int n, int chi_edge, int chi_cloud, CardinalityMode mode,
                     const std::function<void(const Policy&)>& fn) {
  PolicyEnumerator en(n, chi_edge, chi_cloud, mode);
  Policy p;
  while (en.next(p)) fn(p);
}

std::pair<Policy, CriticResult> exhaustive_best(const SlotState& state, const SystemConfig& cfg) {
  const SlotCritic critic(state, cfg);
  PolicyEnumerator en(static_cast<int>(state.num_devices()), cfg.chi_edge, cfg.chi_cloud,
                      cfg.cardinality);
  Policy p, best;
  double best_g = 0.0;
  bool any = false;
  while (en.next(p)) {
    const double g = critic.g(p);
    if (!any || g < best_g) {
      best_g = g;
      best = p;
      any = true;
    }
  }
  auto result = critic.evaluate(best);
  return {std::move(best), std::move(result)};
}

Policy random_policy(std::mt19937_64& rng, int n, int chi_edge, int chi_cloud,
                     CardinalityMode mode) {
  check_args(n, chi_edge, chi_cloud);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  auto draw_size = [&](int max_k) {
    if (mode == CardinalityMode::exact) return max_k;
    std::vector<double> w;
    for (int k = 0; k <= max_k; ++k) w.push_back(static_cast<double>(binomial(n, k)));
    std::discrete_distribution<int> d(w.begin(), w.end());
    return d(rng);
  };
  Policy p = Policy::none(static_cast<std::size_t>(n));
  std::vector<int> pick;
  const int ke = draw_size(std::min(chi_edge, n));
  std::sample(all.begin(), all.end(), std::back_inserter(pick), ke, rng);
  for (int i : pick) p.rho_edge[i] = 1;
  pick.clear();
  const int kc = draw_size(chi_cloud);
  std::sample(all.begin(), all.end(), std::back_inserter(pick), kc, rng);
  for (int i : pick) p.rho_cloud[i] = 1;
  return p;
}

}  // namespace semoff
