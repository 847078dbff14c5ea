#ifndef ICEA_TEST_HELPERS_HPP
#define ICEA_TEST_HELPERS_HPP

#include <vector>

#include "icea/poly.hpp"
#include "icea/rng.hpp"

namespace icea::testing {

// Small exact rationals keep property-test arithmetic cheap.
inline Rational random_rational(CounterRng& rng) {
  long num = static_cast<long>(rng.next_below(19)) - 9;
  long den = static_cast<long>(rng.next_below(8)) + 1;
  return Rational(num, den);
}

inline UniPoly random_unipoly(CounterRng& rng, Axis axis, unsigned max_degree) {
  unsigned deg = static_cast<unsigned>(rng.next_below(max_degree + 1));
  std::vector<Rational> coeffs(deg + 1);
  for (auto& c : coeffs) c = random_rational(rng);
  return UniPoly(axis, std::move(coeffs));
}

inline BivarPoly random_bivarpoly(CounterRng& rng, unsigned max_degree,
                                  unsigned max_terms) {
  BivarPoly p;
  unsigned terms = 1 + static_cast<unsigned>(rng.next_below(max_terms));
  for (unsigned t = 0; t < terms; ++t) {
    unsigned a = static_cast<unsigned>(rng.next_below(max_degree + 1));
    unsigned b = static_cast<unsigned>(rng.next_below(max_degree + 1 - a));
    p.add_term(a, b, random_rational(rng));
  }
  return p;
}

}  // namespace icea::testing

#endif
