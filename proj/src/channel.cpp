#include "wpmec/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpmec {

double large_scale_gain(const NetworkConfig& cfg, double distance) {
  if (!(distance > 0.0))
    throw std::invalid_argument("large_scale_gain: distance must be > 0");
  const double c = 3e8;
  const double base = c / (4.0 * std::numbers::pi * cfg.carrier_freq * distance);
  return cfg.antenna_gain * std::pow(base, cfg.path_loss_exp);
}

std::vector<double> large_scale_matrix(const NetworkConfig& cfg,
                                       const Topology& topo) {
  std::vector<double> out(topo.dist.size());
  for (std::size_t i = 0; i < topo.dist.size(); ++i)
    out[i] = large_scale_gain(cfg, topo.dist[i]);
  return out;
}

std::vector<double> sample_channels(const Topology& topo,
                                    const NetworkConfig& cfg,
                                    std::span<const double> sigma_large,
                                    std::span<Rng> wd_fading) {
  const int n_wds = topo.n_wds();
  const int m_haps = topo.m_haps();
  if (sigma_large.size() != static_cast<std::size_t>(n_wds) * m_haps)
    throw std::invalid_argument("sample_channels: sigma_large size mismatch");
  if (wd_fading.size() != static_cast<std::size_t>(n_wds))
    throw std::invalid_argument("sample_channels: need one stream per WD");
  (void)cfg;
  std::vector<double> gains(sigma_large.size());
  for (int n = 0; n < n_wds; ++n)
    for (int m = 0; m < m_haps; ++m)
      gains[n * m_haps + m] =
          sigma_large[n * m_haps + m] * wd_fading[n].exponential(1.0);
  return gains;
}

}  // namespace wpmec
