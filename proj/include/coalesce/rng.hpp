#pragma once

// Per-replica random streams.  Replica r of a run with seed s draws from a
// generator seeded by a splitmix64 hash of (s, r), so results do not depend
// on how replicas are scheduled across threads, and identical configurations
// reproduce bit-identical output.

#include <cmath>
#include <cstdint>
#include <random>

namespace coalesce {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class ReplicaRng {
 public:
  ReplicaRng(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix_seed(seed, stream)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe to pass through log.
  double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // Uniform integer in [0, n) by 128-bit multiply.
  std::uint64_t below(std::uint64_t n) {
    return std::uint64_t((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coalesce
