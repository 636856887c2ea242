#include "wpmec/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace wpmec {

namespace {

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                  std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (std::fabs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

struct Covering {
  int m = 0;
  std::vector<double> need;   // filtered to > 0
  std::vector<double> coeff;  // mu * h, rows matching need
};

Covering build_covering(const WptRequirement& req, const NetworkConfig& cfg) {
  Covering cov;
  cov.m = cfg.m_haps;
  if (!req.need.empty() &&
      req.gains.size() != req.need.size() * static_cast<std::size_t>(cov.m))
    throw std::invalid_argument("min_wpt_energy: gains shape mismatch");
  for (std::size_t i = 0; i < req.need.size(); ++i) {
    if (req.need[i] <= 0.0) continue;
    cov.need.push_back(req.need[i]);
    for (int m = 0; m < cov.m; ++m)
      cov.coeff.push_back(cfg.eh_efficiency * req.gains[i * cov.m + m]);
  }
  return cov;
}

bool covers(const Covering& cov, const std::vector<double>& q, double rel_tol) {
  for (std::size_t i = 0; i < cov.need.size(); ++i) {
    double dot = 0.0;
    for (int m = 0; m < cov.m; ++m) dot += cov.coeff[i * cov.m + m] * q[m];
    if (dot < cov.need[i] * (1.0 - rel_tol)) return false;
  }
  return true;
}

WptSolution pack_solution(const Covering& cov, const WptRequirement& req,
                          double power_max, std::vector<double> q) {
  WptSolution sol;
  sol.feasible = true;
  sol.q = std::move(q);
  sol.total = 0.0;
  for (double v : sol.q) sol.total += v;
  const bool any_need = !cov.need.empty();
  sol.alpha = any_need ? req.alpha_ub : 0.0;
  sol.hap_power.assign(sol.q.size(), 0.0);
  if (sol.alpha > 0.0)
    for (std::size_t m = 0; m < sol.q.size(); ++m)
      // q <= alpha_ub * P_max guarantees P <= P_max in exact arithmetic;
      // the clamp only absorbs the division's rounding.
      sol.hap_power[m] =
          std::clamp(sol.q[m] / sol.alpha, 0.0, power_max);
  return sol;
}

}  // namespace

LocalPlan lemma2_local(double bits, const NetworkConfig& cfg) {
  LocalPlan p;
  if (bits <= 0.0) return p;
  p.tau = cfg.slot_duration;
  p.freq = cfg.cycles_per_bit * bits / cfg.slot_duration;
  p.energy = cfg.cpu_energy_coeff * p.freq * p.freq * p.freq * cfg.slot_duration;
  p.freq_ok = p.freq <= cfg.cpu_freq_max;
  return p;
}

OffloadPlan lemma3_offload(double bits, double gain, const NetworkConfig& cfg) {
  OffloadPlan p;
  if (bits <= 0.0) return p;
  if (!(gain > 0.0))
    throw std::invalid_argument("lemma3_offload: gain must be > 0");
  const double snr = cfg.wd_tx_power * gain / cfg.noise_power;
  const double rate = cfg.bandwidth * std::log2(1.0 + snr);
  p.tau = cfg.data_overhead * bits / rate;
  p.energy = (cfg.wd_tx_power + cfg.wd_circuit_power) * p.tau;
  return p;
}

double compute_u(const NetworkConfig& cfg, double mean_bits) {
  if (mean_bits < 0.0) mean_bits = cfg.arrival_rate * cfg.packet_bits;
  return cfg.m_haps * cfg.hap_power_max * cfg.slot_duration +
         cfg.hap_energy_per_bit * mean_bits;
}

WptSolution min_wpt_energy(const WptRequirement& req, const NetworkConfig& cfg) {
  const int M = cfg.m_haps;
  if (M > 8) throw std::invalid_argument("min_wpt_energy: m_haps > 8 unsupported");
  const Covering cov = build_covering(req, cfg);
  WptSolution best;
  best.q.assign(M, 0.0);
  best.hap_power.assign(M, 0.0);

  if (cov.need.empty()) {
    best.feasible = true;  // nothing to cover: zero WPT, alpha pinned at 0
    return best;
  }
  const double cap = req.alpha_ub * cfg.hap_power_max;
  if (!(cap > 0.0)) return best;  // no WPT window left

  // The feasible set is upward closed inside the box, so the all-cap corner
  // decides feasibility outright.
  std::vector<double> corner(M, cap);
  if (!covers(cov, corner, 1e-12)) return best;

  const int active = static_cast<int>(cov.need.size());
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<double> best_q;

  // Enumerate vertices: each HAP is pinned LO/HI or left free, and the free
  // coordinates are fixed by an equal number of tight covering rows.
  std::vector<int> state(M, 0);  // 0=LO, 1=HI, 2=FREE
  long long partitions = 1;
  for (int m = 0; m < M; ++m) partitions *= 3;
  for (long long code = 0; code < partitions; ++code) {
    long long rem = code;
    std::vector<int> free_idx;
    std::vector<double> q(M, 0.0);
    for (int m = 0; m < M; ++m) {
      state[m] = static_cast<int>(rem % 3);
      rem /= 3;
      if (state[m] == 1) q[m] = cap;
      if (state[m] == 2) free_idx.push_back(m);
    }
    const int f = static_cast<int>(free_idx.size());
    if (f > active) continue;

    std::vector<int> rows(f);
    for (int i = 0; i < f; ++i) rows[i] = i;
    while (true) {
      bool ok = true;
      if (f > 0) {
        std::vector<double> a(static_cast<std::size_t>(f) * f);
        std::vector<double> b(f);
        for (int i = 0; i < f; ++i) {
          const int r = rows[i];
          double rhs = cov.need[r];
          for (int m = 0; m < M; ++m)
            if (state[m] == 1) rhs -= cov.coeff[r * M + m] * cap;
          b[i] = rhs;
          for (int j = 0; j < f; ++j)
            a[i * f + j] = cov.coeff[r * M + free_idx[j]];
        }
        std::vector<double> x;
        ok = solve_linear(std::move(a), std::move(b), f, x);
        if (ok) {
          for (int j = 0; j < f; ++j) {
            double v = x[j];
            if (v < -1e-9 * cap || v > cap * (1.0 + 1e-9)) { ok = false; break; }
            q[free_idx[j]] = std::clamp(v, 0.0, cap);
          }
        }
      }
      if (ok && covers(cov, q, 1e-11)) {
        double total = 0.0;
        for (double v : q) total += v;
        if (total < best_total) {
          best_total = total;
          best_q = q;
        }
      }
      // next combination of tight rows
      int i = f - 1;
      while (i >= 0 && rows[i] == active - f + i) --i;
      if (i < 0) break;
      ++rows[i];
      for (int j = i + 1; j < f; ++j) rows[j] = rows[j - 1] + 1;
    }
  }

  if (!best_q.empty())
    return pack_solution(cov, req, cfg.hap_power_max, std::move(best_q));
  // Defensive fallback; the all-cap corner is always a valid vertex, so this
  // should be unreachable.
  return pack_solution(cov, req, cfg.hap_power_max, std::move(corner));
}

WptSolution min_wpt_energy_grid(const WptRequirement& req,
                                const NetworkConfig& cfg, int rounds, int pts) {
  const int M = cfg.m_haps;
  if (M > 3)
    throw std::invalid_argument("min_wpt_energy_grid: m_haps > 3 unsupported");
  const Covering cov = build_covering(req, cfg);
  WptSolution none;
  none.q.assign(M, 0.0);
  none.hap_power.assign(M, 0.0);
  if (cov.need.empty()) {
    none.feasible = true;
    return none;
  }
  const double cap = req.alpha_ub * cfg.hap_power_max;
  if (!(cap > 0.0)) return none;
  std::vector<double> corner(M, cap);
  if (!covers(cov, corner, 0.0)) return none;

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t rows = cov.need.size();

  // Minimal final coordinate covering what the fixed prefix leaves over;
  // +inf when a leftover row has no final-coordinate coefficient or the
  // requirement exceeds the box.
  auto last_min = [&](const std::vector<double>& prefix) -> double {
    double q = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double resid = cov.need[r];
      for (int m = 0; m + 1 < M; ++m)
        resid -= cov.coeff[r * M + m] * prefix[m];
      if (resid <= 0.0) continue;
      const double c = cov.coeff[r * M + (M - 1)];
      if (c <= 0.0) return inf;
      q = std::max(q, resid / c);
    }
    return q <= cap * (1.0 + 1e-12) ? std::min(q, cap) : inf;
  };

  // 1-D minimizer on [0, cap]: dense pass, then windows shrinking around the
  // incumbent. Every scanned level is a partial minimization of the covering
  // program, hence convex, so the grid argmin sits within one step of a true
  // minimizer and the +/-2-step window always recaptures it.
  const int coarse = 1024;
  const int win_pts = std::max(pts, 5);
  auto scan = [&](const std::function<double(double)>& f) {
    double best_x = cap, best_v = f(cap);
    for (int i = 0; i <= coarse; ++i) {
      const double x = cap * i / coarse;
      const double v = f(x);
      if (v < best_v) { best_v = v; best_x = x; }
    }
    double step = cap / coarse;
    for (int round = 0; round < rounds; ++round) {
      const double wlo = std::max(0.0, best_x - 2.0 * step);
      const double whi = std::min(cap, best_x + 2.0 * step);
      for (int i = 0; i <= win_pts; ++i) {
        const double x = wlo + (whi - wlo) * i / win_pts;
        const double v = f(x);
        if (v < best_v) { best_v = v; best_x = x; }
      }
      step = (whi - wlo) / win_pts;
      if (whi - wlo <= 1e-15 * cap) break;
    }
    return std::pair<double, double>{best_x, best_v};
  };

  std::vector<double> q(M, 0.0);
  if (M == 1) {
    q[0] = last_min({});
  } else if (M == 2) {
    const auto [x0, v0] = scan([&](double a) {
      const double tail = last_min({a});
      return tail == inf ? inf : a + tail;
    });
    (void)v0;
    q[0] = x0;
    q[1] = last_min({x0});
  } else {
    auto inner = [&](double a) {
      return scan([&](double b) {
        const double tail = last_min({a, b});
        return tail == inf ? inf : b + tail;
      });
    };
    const auto [x0, v0] = scan([&](double a) {
      const double vb = inner(a).second;
      return vb == inf ? inf : a + vb;
    });
    (void)v0;
    q[0] = x0;
    q[1] = inner(x0).first;
    q[2] = last_min({q[0], q[1]});
  }
  return pack_solution(cov, req, cfg.hap_power_max, std::move(q));
}

}  // namespace wpmec
