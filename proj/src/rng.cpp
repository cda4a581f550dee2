#include "maximin/rng.hpp"

#include <cmath>
#include <numbers>

namespace maximin {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t stream)
    : key_(hash_combine(mix64(key), stream)) {}

std::uint64_t CounterRng::next_u64() {
  return mix64(mix64(key_ ^ counter_++) + key_);
}

double CounterRng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

CounterRng CounterRng::substream(std::uint64_t index) const {
  return CounterRng(key_, index + 1);
}

}  // namespace maximin
