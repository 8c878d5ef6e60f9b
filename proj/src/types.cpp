#include "semoff/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semoff {

SlotState SlotState::zeros(std::size_t n) {
  SlotState s;
  s.h_edge.assign(n, Complex{1.0, 0.0});
  s.h_cloud.assign(n, Complex{1.0, 0.0});
  s.q_local.assign(n, 0.0);
  s.q_edge.assign(n, 0.0);
  s.z_local.assign(n, 0.0);
  s.z_edge.assign(n, 0.0);
  return s;
}

bool SlotState::well_formed() const {
  const std::size_t n = q_local.size();
  if (h_edge.size() != n || h_cloud.size() != n || q_edge.size() != n ||
      z_local.size() != n || z_edge.size() != n)
    return false;
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  return std::all_of(q_local.begin(), q_local.end(), ok) &&
         std::all_of(q_edge.begin(), q_edge.end(), ok) &&
         std::all_of(z_local.begin(), z_local.end(), ok) &&
         std::all_of(z_edge.begin(), z_edge.end(), ok);
}

Policy Policy::none(std::size_t n) {
  return Policy{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0)};
}

int Policy::edge_count() const {
  return std::accumulate(rho_edge.begin(), rho_edge.end(), 0);
}

int Policy::cloud_count() const {
  return std::accumulate(rho_cloud.begin(), rho_cloud.end(), 0);
}

std::string Policy::to_string() const {
  std::string s;
  s.reserve(rho_edge.size() * 2 + 1);
  for (auto b : rho_edge) s.push_back(b ? '1' : '0');
  s.push_back('/');
  for (auto b : rho_cloud) s.push_back(b ? '1' : '0');
  return s;
}

Allocation Allocation::zeros(std::size_t n) {
  Allocation a;
  a.u_edge.assign(n, 0.0);
  a.u_cloud.assign(n, 0.0);
  a.f_local.assign(n, 0.0);
  a.f_encode.assign(n, 0.0);
  a.f_edge.assign(n, 0.0);
  return a;
}

}  // namespace semoff
