#pragma once

#include <cstdint>
#include <string_view>

namespace wpmec {

// Deterministic random stream. Each (seed, stream) pair yields its own
// sequence, and distinct streams never share state, so adding entities to a
// simulation (more WDs, more HAPs) cannot shift the draws of existing ones.
// Samplers are hand rolled on top of xoshiro256++ so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();                         // [0, 1)
  double uniform(double lo, double hi);       // [lo, hi)
  std::uint32_t uniform_int(std::uint32_t n); // [0, n), n >= 1
  double normal(double mu, double sigma);     // consumes exactly 2 uniforms
  double exponential(double mean);            // mean > 0
  int poisson(double lambda);                 // 0 <= lambda <= 600

 private:
  std::uint64_t s_[4];
};

// Stable stream identifier from a label plus up to two indices.
std::uint64_t stream_id(std::string_view label, std::uint64_t a = 0,
                        std::uint64_t b = 0);

// Seed plus a namespace label; hands out named streams.
struct RngFamily {
  std::uint64_t seed = 0;
  Rng stream(std::string_view label, std::uint64_t a = 0,
             std::uint64_t b = 0) const {
    return Rng(seed, stream_id(label, a, b));
  }
};

}  // namespace wpmec
