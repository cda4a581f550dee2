#pragma once

#include <cstdint>

namespace maximin {

/// Counter-based generator: output i of stream (key, stream) is a pure
/// function of (key, stream, i), so streams can be split and replayed on any
/// platform. The mixing function is the SplitMix64 finalizer applied twice.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller. Both variates of a pair are used.
  double normal();

  std::uint64_t counter() const { return counter_; }

  /// Derives an independent stream; used for per-group and per-replicate
  /// sub-streams.
  CounterRng substream(std::uint64_t index) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive hash of a sequence of integers (seed derivation).
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

}  // namespace maximin
