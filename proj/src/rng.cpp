#include "icea/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icea {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : base_(seed ^ (kGolden * (stream + 1))) {}

uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(base_ + counter_ * kGolden);
}

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_unit();
}

double CounterRng::next_normal() {
  // u1 in (0,1] keeps log finite; u2 in [0,1).
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t CounterRng::next_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("CounterRng::next_below: zero bound");
  // Rejection sampling over the top range keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

}  // namespace icea
