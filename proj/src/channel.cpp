#include "semoff/channel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "semoff/rng.hpp"

namespace semoff {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Shadowing key: per-slot draws use the slot index, static mode pins slot 0.
std::uint64_t shadow_slot(const SystemConfig& cfg, std::uint64_t slot) {
  return cfg.fading.shadowing_mode == ShadowingMode::per_slot ? slot : 0;
}

}  // namespace

double pathloss_db(double distance_m, const FadingConfig& fading) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss_db: distance must be positive");
  return fading.pathloss_intercept_db + fading.pathloss_slope_db * std::log10(distance_m / 1000.0);
}

LinkGeometry place_devices(const SystemConfig& cfg, std::uint64_t seed) {
  const auto& g = cfg.geometry;
  LinkGeometry geom;
  geom.mec = {0.0, 0.0};
  geom.mcc = {g.mcc_distance_m, 0.0};
  const auto n = static_cast<std::size_t>(cfg.num_devices);
  geom.devices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterEngine eng(derive_seed(seed, Stream::geometry, i));
    std::uniform_real_distribution<double> r2(g.radius_min_m * g.radius_min_m,
                                              g.radius_max_m * g.radius_max_m);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(r2(eng));
    const double a = angle(eng);
    geom.devices.push_back({r * std::cos(a), r * std::sin(a)});
  }
  for (const auto& p : geom.devices) {
    geom.d_edge.push_back(std::hypot(p.x - geom.mec.x, p.y - geom.mec.y));
    geom.d_cloud.push_back(std::hypot(p.x - geom.mcc.x, p.y - geom.mcc.y));
  }
  return geom;
}

ChannelDraw draw_channels(const LinkGeometry& geom, const SystemConfig& cfg,
                          std::uint64_t slot, std::uint64_t seed) {
  const std::size_t n = geom.num_devices();
  const double k = db_to_linear(cfg.fading.rician_k_db);
  const double los = std::sqrt(k / (k + 1.0));
  const double nlos_sd = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  const double rayleigh_sd = std::sqrt(0.5);

  ChannelDraw d;
  d.g_edge.resize(n);
  d.g_cloud.resize(n);
  d.psi.resize(n);
  d.htilde_edge.resize(n);
  d.htilde_cloud.resize(n);
  d.h_edge.resize(n);
  d.h_cloud.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    CounterEngine eng(derive_seed(seed, Stream::channel, slot, i));
    std::normal_distribution<double> nl(0.0, nlos_sd);
    std::normal_distribution<double> ry(0.0, rayleigh_sd);
    const double er = nl(eng);
    const double ei = nl(eng);
    const double cr = ry(eng);
    const double ci = ry(eng);

    CounterEngine shadow_eng(derive_seed(seed, Stream::shadowing, shadow_slot(cfg, slot), i));
    std::normal_distribution<double> sh(0.0, cfg.fading.shadowing_std_db);
    const double psi = db_to_linear(sh(shadow_eng));

    const double g_e = db_to_linear(-pathloss_db(geom.d_edge[i], cfg.fading));
    const double g_c = db_to_linear(-pathloss_db(geom.d_cloud[i], cfg.fading)) * psi;

    d.g_edge[i] = g_e;
    d.g_cloud[i] = g_c;
    d.psi[i] = psi;
    d.htilde_edge[i] = Complex{los + er, ei};
    d.htilde_cloud[i] = Complex{cr, ci};
    d.h_edge[i] = std::sqrt(g_e) * d.htilde_edge[i];
    d.h_cloud[i] = std::sqrt(g_c) * d.htilde_cloud[i];
  }
  return d;
}

double estimate_rician_k(std::span<const double> p) {
  if (p.size() < 2) throw std::invalid_argument("estimate_rician_k: need samples");
  double m1 = 0.0, m2 = 0.0;
  for (double v : p) {
    m1 += v;
    m2 += v * v;
  }
  m1 /= static_cast<double>(p.size());
  m2 /= static_cast<double>(p.size());
  // E|h|^4 / Ω^2 = (K^2 + 4K + 2) / (K + 1)^2 with r = m2 / m1^2 in (1, 2)
  // gives K = s / (1 - s), s = sqrt(2 - r).
  const double r = m2 / (m1 * m1);
  if (!(r > 1.0 && r < 2.0)) return 0.0;
  const double s = std::sqrt(2.0 - r);
  return s / (1.0 - s);
}

void write_channel_trace_header(std::ostream& out) {
  out << "slot,device,h_edge_sq,h_cloud_sq\n";
}

void append_channel_trace(std::ostream& out, std::uint64_t slot, const ChannelDraw& draw) {
  const auto prec = out.precision(17);
  for (std::size_t i = 0; i < draw.h_edge.size(); ++i) {
    out << slot << ',' << i << ',' << std::norm(draw.h_edge[i]) << ','
        << std::norm(draw.h_cloud[i]) << '\n';
  }
  out.precision(prec);
}

}  // namespace semoff
