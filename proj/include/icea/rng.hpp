#ifndef ICEA_RNG_HPP
#define ICEA_RNG_HPP

#include <cstdint>

namespace icea {

// Counter-based deterministic generator. The value for counter i under
// (seed, stream) is the SplitMix64 finalizer applied to
//   seed ^ (0x9E3779B97F4A7C15 * (stream + 1))  advanced by i+1 increments
// of the golden-ratio constant. Any implementation of these two xor-shift
// multiplies reproduces the stream exactly, which is what makes runs
// repeatable across carriers and languages.
//
//   z  = base + (i+1) * 0x9E3779B97F4A7C15
//   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//   z ^= z >> 27;  z *= 0x94D049BB133111EB
//   out = z ^ (z >> 31)
//
// Uniform doubles take the top 53 bits / 2^53 (in [0,1)); normals use the
// Box-Muller cosine branch on two consecutive uniforms, with u1 shifted
// into (0,1] so the logarithm is finite.
class CounterRng {
public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  double next_unit();                        // [0, 1)
  double next_uniform(double lo, double hi);
  double next_normal();                      // standard normal
  // Fisher-Yates index for shuffles: uniform integer in [0, bound).
  uint64_t next_below(uint64_t bound);

  uint64_t counter() const { return counter_; }

private:
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace icea

#endif
