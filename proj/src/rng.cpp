#include "wpmec/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpmec {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull);
  for (auto& s : s_) s = splitmix64(x);
  // All-zero state would lock xoshiro at zero forever.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint32_t Rng::uniform_int(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
  // Rejection sampling to stay exactly uniform.
  const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= bound);
  return static_cast<std::uint32_t>(x % n);
}

double Rng::normal(double mu, double sigma) {
  // Box-Muller without caching: fixed draw count per call.
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean must be > 0");
  // Strictly positive support: channel gains must never be exactly zero.
  double u;
  do {
    u = uniform01();
  } while (u == 0.0);
  return -mean * std::log(u);
}

int Rng::poisson(double lambda) {
  if (lambda < 0.0 || lambda > 600.0)
    throw std::invalid_argument("poisson: lambda outside [0, 600]");
  if (lambda == 0.0) return 0;
  // Knuth product method; exp(-600) is still normal in double precision.
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > limit);
  return k - 1;
}

std::uint64_t stream_id(std::string_view label, std::uint64_t a, std::uint64_t b) {
  // FNV-1a over the label, then mix in the indices.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t x = h ^ (a * 0xd6e8feb86659fd93ull);
  x = splitmix64(x);
  x ^= b * 0xa5a5a5a5a5a5a5a5ull;
  return splitmix64(x);
}

}  // namespace wpmec
