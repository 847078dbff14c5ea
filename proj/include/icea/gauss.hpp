#ifndef ICEA_GAUSS_HPP
#define ICEA_GAUSS_HPP

#include <vector>

#include "icea/poly.hpp"

namespace icea {

// Zero-mean, unit-variance bivariate Gaussian with correlation rho, |rho| < 1.
// Conditional laws are X1|X2=y ~ N(rho*y, 1-rho^2) and symmetrically for X2|X1.
struct GaussPair {
  explicit GaussPair(Rational rho_) : rho(std::move(rho_)) {
    if (!(abs(rho) < Rational(1)))
      throw std::invalid_argument("GaussPair: |rho| must be < 1");
  }
  Rational rho;
};

// E[Z^n] for Z ~ N(0,1): 0 for odd n, (n-1)!! for even n.
Rational std_normal_moment(unsigned n);

// E[g(X)] for X ~ N(0,1).
Rational normal_mean(const UniPoly& g);

// E[X_other^n | X_onto = x] as a polynomial in x, by binomial expansion of
// (rho*x + Z)^n with Z ~ N(0, 1-rho^2).
UniPoly conditional_moment_poly(unsigned n, const GaussPair& gp, Axis onto);

// E[p(X1,X2) | X_onto = x], exact.
UniPoly project(const BivarPoly& p, const GaussPair& gp, Axis onto);

// E[p(X1,X2)^2], by iterated conditioning reduced to standard normal moments.
Rational expect_sq(const BivarPoly& p, const GaussPair& gp);

struct RoundResult {
  UniPoly g1;
  UniPoly g2;
  Rational err;  // E[zeta^2] after the round
};

// One complete round: agent 1 refits on the residual, then agent 2.
RoundResult icea_exact_round(const BivarPoly& phi, const UniPoly& g1,
                             const UniPoly& g2, const GaussPair& gp);

struct ExactRun {
  UniPoly g1;
  UniPoly g2;
  std::vector<Rational> errors;  // one entry per round
  bool converged = false;
};

// Iterates rounds from zero initialization until the error decrease is
// <= eps or max_rounds is reached.
ExactRun run_exact_to_limit(const BivarPoly& phi, const GaussPair& gp,
                            const Rational& eps, int max_rounds);

// The full-round map T{g} = E[phi - E[phi - g(X1) | X2] | X1 = x].
UniPoly apply_T(const UniPoly& g, const BivarPoly& phi, const GaussPair& gp);

// Double conditional expectation of g via the Hermite closed form:
//   g'(x) = sum_n a_n sum_k n!/(k!(n-2k)!) ((1-rho^4)/2)^k (rho^2 x)^(n-2k).
// Equals project(project(g)) computed by conditional moments.
UniPoly hermite_transform(const UniPoly& g, const GaussPair& gp);

// E[g(X)^2] for X ~ N(0,1) via the summation formula
//   sum_n n! ( sum_k a_{n+2k} (n+2k)! / (2^k n! k!) )^2.
Rational weighted_norm_sq(const UniPoly& g);

}  // namespace icea

#endif
