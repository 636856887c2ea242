#pragma once

#include <span>
#include <vector>

#include "wpmec/config.hpp"
#include "wpmec/rng.hpp"
#include "wpmec/topology.hpp"

namespace wpmec {

// Free-space large-scale gain A_d * (c / (4 pi f d))^d_e. Throws for d <= 0.
double large_scale_gain(const NetworkConfig& cfg, double distance);

// All N x M large-scale gains, row-major by WD.
std::vector<double> large_scale_matrix(const NetworkConfig& cfg,
                                       const Topology& topo);

// One slot of channel gains: sigma_L * |sigma_S|^2 with |sigma_S|^2 ~ Exp(1)
// drawn i.i.d. per (WD, HAP). wd_fading[n] is WD n's private stream and is
// advanced by exactly m_haps draws, keeping draws nested across n_wds.
std::vector<double> sample_channels(const Topology& topo,
                                    const NetworkConfig& cfg,
                                    std::span<const double> sigma_large,
                                    std::span<Rng> wd_fading);

}  // namespace wpmec
