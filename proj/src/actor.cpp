#include "semoff/actor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "semoff/rng.hpp"

namespace semoff {

namespace {

constexpr double kClip = 1e-7;
constexpr const char* kMagic = "semoff-actor";
constexpr int kVersion = 1;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double gain_db(Complex h) {
  const double p = std::norm(h);
  return p > 0.0 ? 10.0 * std::log10(p) : -300.0;
}

}  // namespace

std::vector<double> featurize(const SlotState& s, const SystemConfig& c) {
  const auto& t = c.training;
  std::vector<double> x;
  x.reserve(6 * s.num_devices());
  for (std::size_t i = 0; i < s.num_devices(); ++i) {
    x.push_back((gain_db(s.h_edge[i]) - t.edge_gain_ref_db) / t.gain_scale_db);
    x.push_back((gain_db(s.h_cloud[i]) - t.cloud_gain_ref_db) / t.gain_scale_db);
    x.push_back(s.q_local[i] / t.queue_ref);
    x.push_back(s.q_edge[i] / t.queue_ref);
    x.push_back(s.z_local[i] / t.queue_ref);
    x.push_back(s.z_edge[i] / t.queue_ref);
  }
  return x;
}

ActorNetwork::ActorNetwork(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("ActorNetwork: need input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("ActorNetwork: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer L;
    L.in = sizes_[l];
    L.out = sizes_[l + 1];
    L.w.assign(static_cast<std::size_t>(L.in) * L.out, 0.0);
    L.b.assign(L.out, 0.0);
    layers_.push_back(std::move(L));
  }
}

ActorNetwork ActorNetwork::glorot(std::vector<int> sizes, std::uint64_t seed) {
  ActorNetwork net(std::move(sizes));
  std::mt19937_64 rng(seed);
  for (auto& L : net.layers_) {
    const double lim = std::sqrt(6.0 / (L.in + L.out));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (double& w : L.w) w = u(rng);
  }
  return net;
}

ActorNetwork ActorNetwork::for_config(const SystemConfig& c, std::uint64_t seed) {
  std::vector<int> sizes{6 * c.num_devices};
  sizes.insert(sizes.end(), c.training.hidden_layers.begin(), c.training.hidden_layers.end());
  sizes.push_back(2 * c.num_devices);
  return glorot(std::move(sizes), seed);
}

std::size_t ActorNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& L : layers_) n += L.w.size() + L.b.size();
  return n;
}

std::vector<double> ActorNetwork::forward(std::span<const double> x) const {
  if (x.size() != input_size()) throw std::invalid_argument("ActorNetwork::forward: input size");
  std::vector<double> a(x.begin(), x.end()), z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    z.assign(L.b.begin(), L.b.end());
    for (int o = 0; o < L.out; ++o) {
      const double* row = &L.w[static_cast<std::size_t>(o) * L.in];
      double acc = z[o];
      for (int k = 0; k < L.in; ++k) acc += row[k] * a[k];
      z[o] = acc;
    }
    const bool last = l + 1 == layers_.size();
    for (double& v : z) v = last ? sigmoid(v) : std::max(v, 0.0);
    a.swap(z);
  }
  return a;
}

double ActorNetwork::bce(std::span<const std::vector<double>> inputs,
                         std::span<const std::vector<double>> targets,
                         std::vector<double>* grad) const {
  if (inputs.size() != targets.size() || inputs.empty())
    throw std::invalid_argument("ActorNetwork::bce: need matching non-empty batches");
  const std::size_t nl = layers_.size();
  const double scale = 1.0 / (static_cast<double>(inputs.size()) * output_size());
  if (grad) grad->assign(parameter_count(), 0.0);

  std::vector<std::size_t> offset(nl);
  for (std::size_t l = 0, o = 0; l < nl; ++l) {
    offset[l] = o;
    o += layers_[l].w.size() + layers_[l].b.size();
  }

  double loss = 0.0;
  std::vector<std::vector<double>> acts(nl + 1);
  std::vector<double> delta, prev;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto& y = targets[s];
    if (y.size() != output_size()) throw std::invalid_argument("ActorNetwork::bce: target size");
    acts[0] = inputs[s];
    for (std::size_t l = 0; l < nl; ++l) {
      const auto& L = layers_[l];
      auto& out = acts[l + 1];
      out.assign(L.b.begin(), L.b.end());
      for (int o = 0; o < L.out; ++o) {
        const double* row = &L.w[static_cast<std::size_t>(o) * L.in];
        double acc = out[o];
        for (int k = 0; k < L.in; ++k) acc += row[k] * acts[l][k];
        out[o] = acc;
      }
      const bool last = l + 1 == nl;
      for (double& v : out) v = last ? sigmoid(v) : std::max(v, 0.0);
    }
    const auto& p = acts[nl];
    delta.assign(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double pc = std::clamp(p[j], kClip, 1.0 - kClip);
      loss -= y[j] * std::log(pc) + (1.0 - y[j]) * std::log(1.0 - pc);
      // d/dz of the clipped loss; zero where the clip is active.
      if (p[j] > kClip && p[j] < 1.0 - kClip) delta[j] = (p[j] - y[j]) * scale;
    }
    if (!grad) continue;
    for (std::size_t l = nl; l-- > 0;) {
      const auto& L = layers_[l];
      const auto& a = acts[l];
      double* gw = grad->data() + offset[l];
      double* gb = gw + L.w.size();
      for (int o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* row = gw + static_cast<std::size_t>(o) * L.in;
        for (int k = 0; k < L.in; ++k) row[k] += d * a[k];
      }
      if (l == 0) break;
      prev.assign(L.in, 0.0);
      for (int o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = &L.w[static_cast<std::size_t>(o) * L.in];
        for (int k = 0; k < L.in; ++k) prev[k] += d * row[k];
      }
      for (int k = 0; k < L.in; ++k)
        if (!(a[k] > 0.0)) prev[k] = 0.0;
      delta.swap(prev);
    }
  }
  return loss * scale;
}

std::vector<double> ActorNetwork::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& L : layers_) {
    p.insert(p.end(), L.w.begin(), L.w.end());
    p.insert(p.end(), L.b.begin(), L.b.end());
  }
  return p;
}

void ActorNetwork::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count())
    throw std::invalid_argument("ActorNetwork::set_parameters: size mismatch");
  std::size_t k = 0;
  for (auto& L : layers_) {
    for (double& w : L.w) w = p[k++];
    for (double& b : L.b) b = p[k++];
  }
}

void ActorNetwork::save(std::ostream& out) const {
  const auto prec = out.precision(17);
  out << kMagic << ' ' << kVersion << '\n' << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  for (const auto& L : layers_) {
    for (double w : L.w) out << w << '\n';
    for (double b : L.b) out << b << '\n';
  }
  out.precision(prec);
}

ActorNetwork ActorNetwork::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t n = 0;
  if (!(in >> magic >> version >> n) || magic != kMagic || version != kVersion || n < 2)
    throw std::runtime_error("actor checkpoint: bad header");
  std::vector<int> sizes(n);
  for (auto& s : sizes)
    if (!(in >> s)) throw std::runtime_error("actor checkpoint: truncated layer sizes");
  ActorNetwork net(std::move(sizes));
  for (auto& L : net.layers_) {
    for (double& w : L.w)
      if (!(in >> w)) throw std::runtime_error("actor checkpoint: truncated weights");
    for (double& b : L.b)
      if (!(in >> b)) throw std::runtime_error("actor checkpoint: truncated biases");
  }
  return net;
}

void ActorNetwork::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save(out);
}

ActorNetwork ActorNetwork::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load(in);
}

bool operator==(const ActorNetwork& a, const ActorNetwork& b) {
  return a.sizes_ == b.sizes_ && a.parameters() == b.parameters();
}

AdamOptimizer::AdamOptimizer(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void AdamOptimizer::step(ActorNetwork& net, std::span<const double> g) {
  if (g.size() != m_.size()) throw std::invalid_argument("AdamOptimizer: gradient size");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  auto upd = [&](double& p) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[k] * g[k];
    p -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
    ++k;
  };
  for (auto& L : net.layers()) {
    for (double& w : L.w) upd(w);
    for (double& b : L.b) upd(b);
  }
}

RelaxedPolicy forward(const ActorNetwork& net, std::span<const double> features) {
  const auto y = net.forward(features);
  const std::size_t n = y.size() / 2;
  RelaxedPolicy r;
  r.rho_hat_edge.assign(y.begin(), y.begin() + n);
  r.rho_hat_cloud.assign(y.begin() + n, y.end());
  return r;
}

std::vector<std::uint8_t> top_chi(std::span<const double> v, int chi, CardinalityMode mode) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<std::uint8_t> bits(v.size(), 0);
  const std::size_t k = std::min<std::size_t>(std::max(chi, 0), v.size());
  for (std::size_t j = 0; j < k; ++j) {
    if (mode == CardinalityMode::at_most && v[order[j]] < 0.5) break;
    bits[order[j]] = 1;
  }
  return bits;
}

Policy quantize(const RelaxedPolicy& r, const SystemConfig& c) {
  Policy p;
  p.rho_edge = top_chi(r.rho_hat_edge, c.chi_edge_eff(), c.cardinality);
  p.rho_cloud = top_chi(r.rho_hat_cloud, c.chi_cloud, c.cardinality);
  return p;
}

std::vector<Policy> generate_candidates(const RelaxedPolicy& r, int num_candidates,
                                        std::mt19937_64& rng, const SystemConfig& c) {
  if (num_candidates < 1) throw std::invalid_argument("generate_candidates: N_A must be >= 1");
  std::vector<Policy> out{quantize(r, c)};
  const double sd = c.training.candidate_noise_std;
  std::normal_distribution<double> noise(0.0, sd > 0.0 ? sd : 1.0);
  RelaxedPolicy perturbed = r;
  for (int k = 1; k < num_candidates; ++k) {
    for (std::size_t i = 0; i < r.rho_hat_edge.size(); ++i) {
      perturbed.rho_hat_edge[i] = r.rho_hat_edge[i] + (sd > 0.0 ? noise(rng) : 0.0);
      perturbed.rho_hat_cloud[i] = r.rho_hat_cloud[i] + (sd > 0.0 ? noise(rng) : 0.0);
    }
    Policy p = quantize(perturbed, c);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> policy_bits(const Policy& p) {
  std::vector<double> y;
  y.reserve(2 * p.num_devices());
  for (auto b : p.rho_edge) y.push_back(b);
  for (auto b : p.rho_cloud) y.push_back(b);
  return y;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::push(std::vector<double> f, std::vector<double> t) {
  ++pushed_;
  if (features_.size() < capacity_) {
    features_.push_back(std::move(f));
    targets_.push_back(std::move(t));
    return;
  }
  features_[cursor_] = std::move(f);
  targets_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayMemory::sample(std::size_t batch, std::mt19937_64& rng) const {
  if (batch > size()) throw std::invalid_argument("ReplayMemory::sample: batch exceeds size");
  std::vector<std::size_t> all(size()), out;
  std::iota(all.begin(), all.end(), 0);
  std::sample(all.begin(), all.end(), std::back_inserter(out), batch, rng);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::optional<double> train_step(ActorNetwork& net, AdamOptimizer& opt, const ReplayMemory& mem,
                                 std::size_t batch_size, std::mt19937_64& rng) {
  if (batch_size == 0 || mem.size() < batch_size) return std::nullopt;
  const auto idx = mem.sample(batch_size, rng);
  std::vector<std::vector<double>> x, y;
  x.reserve(batch_size);
  y.reserve(batch_size);
  for (auto k : idx) {
    x.push_back(mem.features(k));
    y.push_back(mem.target(k));
  }
  std::vector<double> grad;
  const double loss = net.bce(x, y, &grad);
  opt.step(net, grad);
  return loss;
}

double test_loss(const ActorNetwork& net, std::span<const std::vector<double>> features,
                 std::span<const std::vector<double>> targets) {
  return net.bce(features, targets);
}

double gradient_check(const ActorNetwork& net, std::span<const std::vector<double>> inputs,
                      std::span<const std::vector<double>> targets, double step) {
  std::vector<double> grad;
  net.bce(inputs, targets, &grad);
  ActorNetwork probe = net;
  auto p = net.parameters();
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + step;
    probe.set_parameters(p);
    const double up = probe.bce(inputs, targets);
    p[k] = keep - step;
    probe.set_parameters(p);
    const double down = probe.bce(inputs, targets);
    p[k] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double tol = 1e-4 * std::max(std::abs(grad[k]), std::abs(numeric)) + 1e-10;
    worst = std::max(worst, std::abs(grad[k] - numeric) / tol);
  }
  return worst;
}

}  // namespace semoff
