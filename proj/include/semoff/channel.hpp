#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "semoff/config.hpp"
#include "semoff/types.hpp"

namespace semoff {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// MEC server sits at the origin of the hotspot; the MCC base station lies on
// the x axis at `mcc_distance_m`.
struct LinkGeometry {
  std::vector<Point2> devices;
  Point2 mec{};
  Point2 mcc{};
  std::vector<double> d_edge;   // m
  std::vector<double> d_cloud;  // m

  std::size_t num_devices() const { return devices.size(); }
};

struct ChannelDraw {
  std::vector<double> g_edge;        // large-scale gain, linear
  std::vector<double> g_cloud;       // large-scale gain incl. shadowing ψ
  std::vector<double> psi;           // shadowing factor applied to g_cloud
  std::vector<Complex> htilde_edge;  // Rician, E|h|^2 = 1
  std::vector<Complex> htilde_cloud; // Rayleigh CN(0,1)
  std::vector<Complex> h_edge;
  std::vector<Complex> h_cloud;
};

// PL(dB) = intercept + slope * log10(d_km)
double pathloss_db(double distance_m, const FadingConfig& fading);

// Devices uniform (by area) in the annulus [radius_min, radius_max].
LinkGeometry place_devices(const SystemConfig& cfg, std::uint64_t seed);

// Draws every device's channel for one slot. Each (seed, slot, device) tuple
// owns its random stream, so slots may be drawn in any order.
ChannelDraw draw_channels(const LinkGeometry& geom, const SystemConfig& cfg,
                          std::uint64_t slot, std::uint64_t seed);

// Method-of-moments Rician K (linear) from samples of |h|^2.
double estimate_rician_k(std::span<const double> power_samples);

// CSV columns: slot,device,h_edge_sq,h_cloud_sq
void write_channel_trace_header(std::ostream& out);
void append_channel_trace(std::ostream& out, std::uint64_t slot, const ChannelDraw& draw);

}  // namespace semoff
