#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wpmec/config.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

// HAP grid plus WD placement. dist and zone are n_wds x m_haps, row-major
// by WD. zone[n*M+m] gates offload targets only; harvesting ignores it.
struct Topology {
  std::vector<std::array<double, 2>> hap_pos;
  std::vector<std::array<double, 2>> wd_pos;
  std::vector<double> dist;
  std::vector<std::uint8_t> zone;

  int n_wds() const { return static_cast<int>(wd_pos.size()); }
  int m_haps() const { return static_cast<int>(hap_pos.size()); }
  double d(int n, int m) const { return dist[n * m_haps() + m]; }
  bool in_zone(int n, int m) const { return zone[n * m_haps() + m] != 0; }
};

// HAPs on a ceil(sqrt(M))-arm grid of centered cells (row-major), WDs
// uniform per-WD streams, so a larger n_wds extends rather than reshuffles
// an existing draw.
Topology generate_topology(const NetworkConfig& cfg, const RngFamily& fam);

// Refresh the zone mask for a different radius (e.g. R_t sweeps).
void recompute_zones(Topology& topo, double zone_radius);

}  // namespace wpmec
