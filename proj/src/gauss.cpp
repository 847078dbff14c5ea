#include "icea/gauss.hpp"

namespace icea {

Rational std_normal_moment(unsigned n) {
  if (n % 2 == 1) return Rational(0);
  if (n == 0) return Rational(1);
  return Rational(double_factorial(n - 1));
}

Rational normal_mean(const UniPoly& g) {
  Rational acc(0);
  const auto& c = g.coeffs();
  for (unsigned k = 0; k < c.size(); ++k) acc += c[k] * std_normal_moment(k);
  return acc;
}

UniPoly conditional_moment_poly(unsigned n, const GaussPair& gp, Axis onto) {
  // (rho*x + Z)^n with Z ~ N(0, sigma2), sigma2 = 1 - rho^2. Odd Z-moments
  // vanish, so only even n-j survive.
  const Rational sigma2 = Rational(1) - gp.rho * gp.rho;
  std::vector<Rational> coeffs(n + 1);
  for (unsigned j = 0; j <= n; ++j) {
    unsigned m = n - j;
    if (m % 2 == 1) continue;
    Rational z_moment = Rational(double_factorial(m == 0 ? 0 : m - 1)) *
                        pow(sigma2, m / 2);
    coeffs[j] = Rational(binomial(n, j)) * pow(gp.rho, j) * z_moment;
  }
  return UniPoly(onto, std::move(coeffs));
}

UniPoly project(const BivarPoly& p, const GaussPair& gp, Axis onto) {
  UniPoly out(onto);
  for (const auto& [key, c] : p.terms()) {
    unsigned own = onto == Axis::X1 ? key.first : key.second;
    unsigned foreign = onto == Axis::X1 ? key.second : key.first;
    UniPoly term = conditional_moment_poly(foreign, gp, onto).times_power(own);
    term *= c;
    out += term;
  }
  return out;
}

Rational expect_sq(const BivarPoly& p, const GaussPair& gp) {
  // E[X1^a X2^b] = E[ E[X1^a | X2] X2^b ]: condition on X2, then take the
  // standard normal mean.
  return normal_mean(project(p * p, gp, Axis::X2));
}

namespace {

void check_axes(const UniPoly& g1, const UniPoly& g2) {
  if (g1.axis() != Axis::X1 || g2.axis() != Axis::X2)
    throw std::invalid_argument("icea_exact_round: g1 must live on x1 and g2 on x2");
}

}  // namespace

RoundResult icea_exact_round(const BivarPoly& phi, const UniPoly& g1,
                             const UniPoly& g2, const GaussPair& gp) {
  check_axes(g1, g2);
  BivarPoly zeta = phi - BivarPoly::lift(g1) - BivarPoly::lift(g2);

  UniPoly delta1 = project(zeta, gp, Axis::X1);
  UniPoly new_g1 = g1 + delta1;
  zeta -= BivarPoly::lift(delta1);

  UniPoly delta2 = project(zeta, gp, Axis::X2);
  UniPoly new_g2 = g2 + delta2;
  zeta -= BivarPoly::lift(delta2);

  return {std::move(new_g1), std::move(new_g2), expect_sq(zeta, gp)};
}

ExactRun run_exact_to_limit(const BivarPoly& phi, const GaussPair& gp,
                            const Rational& eps, int max_rounds) {
  if (!(eps > Rational(0))) throw std::invalid_argument("run_exact_to_limit: eps must be > 0");
  if (max_rounds < 1) throw std::invalid_argument("run_exact_to_limit: max_rounds must be >= 1");

  ExactRun run{UniPoly(Axis::X1), UniPoly(Axis::X2), {}, false};
  Rational err_old(0);
  Rational err_new = expect_sq(phi, gp);
  while (abs(err_old - err_new) > eps) {
    if (static_cast<int>(run.errors.size()) >= max_rounds) return run;
    RoundResult r = icea_exact_round(phi, run.g1, run.g2, gp);
    run.g1 = std::move(r.g1);
    run.g2 = std::move(r.g2);
    err_old = err_new;
    err_new = r.err;
    run.errors.push_back(err_new);
  }
  run.converged = true;
  return run;
}

UniPoly apply_T(const UniPoly& g, const BivarPoly& phi, const GaussPair& gp) {
  if (g.axis() != Axis::X1)
    throw std::invalid_argument("apply_T: g must live on x1");
  UniPoly inner = project(phi - BivarPoly::lift(g), gp, Axis::X2);
  return project(phi - BivarPoly::lift(inner), gp, Axis::X1);
}

UniPoly hermite_transform(const UniPoly& g, const GaussPair& gp) {
  const Rational rho2 = gp.rho * gp.rho;
  const Rational half_1m_rho4 = (Rational(1) - rho2 * rho2) / Rational(2);
  const auto& a = g.coeffs();
  if (a.empty()) return UniPoly(g.axis());

  std::vector<Rational> out(a.size());
  for (unsigned n = 0; n < a.size(); ++n) {
    if (a[n].is_zero()) continue;
    for (unsigned k = 0; k <= n / 2; ++k) {
      Rational weight(factorial(n), factorial(k) * factorial(n - 2 * k));
      out[n - 2 * k] += a[n] * weight * pow(half_1m_rho4, k) * pow(rho2, n - 2 * k);
    }
  }
  return UniPoly(g.axis(), std::move(out));
}

Rational weighted_norm_sq(const UniPoly& g) {
  const auto& a = g.coeffs();
  if (a.empty()) return Rational(0);
  const unsigned M = static_cast<unsigned>(a.size() - 1);

  Rational total(0);
  for (unsigned n = 0; n <= M; ++n) {
    Rational inner(0);
    for (unsigned k = 0; n + 2 * k <= M; ++k) {
      const Rational& coeff = a[n + 2 * k];
      if (coeff.is_zero()) continue;
      mpz_class denom = factorial(k) * factorial(n);
      mpz_class two_k = 1;
      mpz_mul_2exp(two_k.get_mpz_t(), two_k.get_mpz_t(), k);
      inner += coeff * Rational(factorial(n + 2 * k), two_k * denom);
    }
    total += Rational(factorial(n)) * inner * inner;
  }
  return total;
}

}  // namespace icea
