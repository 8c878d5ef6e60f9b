#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

// Per device: [edge gain, cloud gain (dB, centred and scaled), Q^L, Q^E, Z^L,
// Z^E (divided by queue_ref)], devices concatenated.
std::vector<double> featurize(const SlotState& state, const SystemConfig& cfg);

// Fully connected rectifier network with a sigmoid head.
class ActorNetwork {
 public:
  struct Layer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
  };

  ActorNetwork() = default;
  // All parameters zero.
  explicit ActorNetwork(std::vector<int> sizes);
  // Glorot-uniform weights, zero biases.
  static ActorNetwork glorot(std::vector<int> sizes, std::uint64_t seed);
  // input 6I, configured hidden layers, output 2I.
  static ActorNetwork for_config(const SystemConfig& cfg, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> x) const;

  // Mean binary cross-entropy over samples and outputs; clipped to
  // [1e-7, 1 - 1e-7] inside the logs. With `grad` non-null, fills it with the
  // gradient in layer order (w then b per layer).
  double bce(std::span<const std::vector<double>> inputs,
             std::span<const std::vector<double>> targets,
             std::vector<double>* grad = nullptr) const;

  // Flat parameter view in the same order as the gradient.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> p);

  void save(std::ostream& out) const;
  static ActorNetwork load(std::istream& in);
  void save(const std::string& path) const;
  static ActorNetwork load(const std::string& path);

  friend bool operator==(const ActorNetwork& a, const ActorNetwork& b);

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

// Adam with configurable first-moment decay (0 disables momentum).
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(std::size_t n, double lr, double beta1, double beta2, double eps);
  void step(ActorNetwork& net, std::span<const double> grad);
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.0, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_, v_;
};

RelaxedPolicy forward(const ActorNetwork& net, std::span<const double> features);

// Top-χ per half, ties to the lower index. Under at_most only entries >= 0.5
// among the top χ are kept.
std::vector<std::uint8_t> top_chi(std::span<const double> values, int chi,
                                  CardinalityMode mode = CardinalityMode::exact);
Policy quantize(const RelaxedPolicy& relaxed, const SystemConfig& cfg);

// The noiseless quantisation first, then quantisations of Gaussian-perturbed
// scores, duplicates dropped (first occurrence kept).
std::vector<Policy> generate_candidates(const RelaxedPolicy& relaxed, int num_candidates,
                                        std::mt19937_64& rng, const SystemConfig& cfg);

std::vector<double> policy_bits(const Policy& p);

class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(std::vector<double> features, std::vector<double> target);
  std::size_t size() const { return features_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return pushed_; }

  // Distinct indices, uniform.
  std::vector<std::size_t> sample(std::size_t batch, std::mt19937_64& rng) const;

  const std::vector<double>& features(std::size_t k) const { return features_[k]; }
  const std::vector<double>& target(std::size_t k) const { return targets_[k]; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::uint64_t pushed_ = 0;
  std::vector<std::vector<double>> features_;
  std::vector<std::vector<double>> targets_;
};

// One minibatch step; returns the pre-step loss, or nullopt while the memory
// holds fewer than batch_size pairs.
std::optional<double> train_step(ActorNetwork& net, AdamOptimizer& opt,
                                 const ReplayMemory& memory, std::size_t batch_size,
                                 std::mt19937_64& rng);

// Cross-entropy on held-out pairs, no parameter change.
double test_loss(const ActorNetwork& net, std::span<const std::vector<double>> features,
                 std::span<const std::vector<double>> targets);

// Central-difference check of the backpropagated gradient. Returns the worst
// ratio |analytic - numeric| / (1e-4 max(|a|,|n|) + 1e-10); <= 1 passes.
double gradient_check(const ActorNetwork& net, std::span<const std::vector<double>> inputs,
                      std::span<const std::vector<double>> targets, double step = 1e-5);

}  // namespace semoff
