#pragma once

#include <cstdint>

namespace gaitanno {

// Counter-based generator used by the synthetic scene code.
//
// Stream key:   key = mix(seed ^ mix(stream + G))
// Draw i:       x_i = mix(key + (i + 1) * G)
// where G = 0x9E3779B97F4A7C15 and mix is the SplitMix64 finalizer
//   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27; z *= 0x94D049BB133111EB;
//   z ^= z >> 31;
// uniform() takes the top 53 bits of a draw divided by 2^53.
// normal() consumes two draws (u1, u2) and returns
// sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
// All arithmetic is on uint64_t so the integer stream is identical on every
// platform. split(s) returns CounterRng(mix(seed + G) ^ key, s).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();
  double normal();
  CounterRng split(std::uint64_t stream) const;
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gaitanno
