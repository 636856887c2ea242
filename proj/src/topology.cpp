#include "wpmec/topology.hpp"

#include <cmath>

namespace wpmec {

Topology generate_topology(const NetworkConfig& cfg, const RngFamily& fam) {
  Topology t;
  const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.m_haps))));
  const double cell = cfg.field_side / g;
  for (int p = 0; p < cfg.m_haps; ++p) {
    const int col = p % g;
    const int row = p / g;
    t.hap_pos.push_back({(col + 0.5) * cell, (row + 0.5) * cell});
  }
  for (int n = 0; n < cfg.n_wds; ++n) {
    Rng r = fam.stream("wd-pos", static_cast<std::uint64_t>(n));
    const double x = r.uniform(0.0, cfg.field_side);
    const double y = r.uniform(0.0, cfg.field_side);
    t.wd_pos.push_back({x, y});
  }
  t.dist.resize(static_cast<std::size_t>(cfg.n_wds) * cfg.m_haps);
  for (int n = 0; n < cfg.n_wds; ++n)
    for (int m = 0; m < cfg.m_haps; ++m)
      t.dist[n * cfg.m_haps + m] = std::hypot(t.wd_pos[n][0] - t.hap_pos[m][0],
                                              t.wd_pos[n][1] - t.hap_pos[m][1]);
  recompute_zones(t, cfg.zone_radius);
  return t;
}

void recompute_zones(Topology& topo, double zone_radius) {
  topo.zone.assign(topo.dist.size(), 0);
  for (std::size_t i = 0; i < topo.dist.size(); ++i)
    topo.zone[i] = topo.dist[i] <= zone_radius ? 1 : 0;
}

}  // namespace wpmec
