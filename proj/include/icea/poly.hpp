#ifndef ICEA_POLY_HPP
#define ICEA_POLY_HPP

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icea/rational.hpp"

namespace icea {

enum class Axis { X1 = 0, X2 = 1 };

inline Axis other_axis(Axis a) { return a == Axis::X1 ? Axis::X2 : Axis::X1; }
inline const char* axis_name(Axis a) { return a == Axis::X1 ? "x1" : "x2"; }

// Univariate polynomial with exact rational coefficients, tagged with the
// axis it lives on. Canonical form: no trailing zero coefficients, so the
// zero polynomial has an empty coefficient vector and degree() == -1.
class UniPoly {
public:
  explicit UniPoly(Axis axis) : axis_(axis) {}
  UniPoly(Axis axis, std::vector<Rational> coeffs);

  static UniPoly constant(Axis axis, Rational c);

  Axis axis() const { return axis_; }
  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  Rational coeff(size_t power) const {
    return power < coeffs_.size() ? coeffs_[power] : Rational(0);
  }

  UniPoly& operator+=(const UniPoly& o);
  UniPoly& operator-=(const UniPoly& o);
  UniPoly& operator*=(const Rational& c);
  UniPoly operator-() const;
  friend UniPoly operator+(UniPoly a, const UniPoly& b) { return a += b; }
  friend UniPoly operator-(UniPoly a, const UniPoly& b) { return a -= b; }
  friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator*(UniPoly a, const Rational& c) { return a *= c; }
  friend bool operator==(const UniPoly& a, const UniPoly& b) {
    return a.axis_ == b.axis_ && a.coeffs_ == b.coeffs_;
  }

  // Multiplies by x^k.
  UniPoly times_power(unsigned k) const;

  Rational eval(const Rational& x) const;

  // "c0 + c1*x1^1 + ..." with rational coefficients "p/q".
  std::string str() const;
  // Decimal rendering of every coefficient at fixed precision.
  std::string str_decimal(unsigned digits) const;
  // Accepts the variable written as "x" or as this axis' name.
  static UniPoly parse(Axis axis, std::string_view text);

private:
  void trim();
  Axis axis_;
  std::vector<Rational> coeffs_;
};

// Sparse bivariate polynomial over x1, x2; keys are (power of x1, power of x2).
// No zero coefficients are stored.
class BivarPoly {
public:
  using Key = std::pair<unsigned, unsigned>;

  BivarPoly() = default;
  static BivarPoly constant(Rational c);
  static BivarPoly monomial(unsigned a, unsigned b, Rational c);
  static BivarPoly lift(const UniPoly& p);

  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  unsigned total_degree() const;
  Rational coeff(unsigned a, unsigned b) const;
  const std::map<Key, Rational>& terms() const { return terms_; }

  void add_term(unsigned a, unsigned b, const Rational& c);

  BivarPoly& operator+=(const BivarPoly& o);
  BivarPoly& operator-=(const BivarPoly& o);
  BivarPoly& operator*=(const Rational& c);
  BivarPoly operator-() const;
  friend BivarPoly operator+(BivarPoly a, const BivarPoly& b) { return a += b; }
  friend BivarPoly operator-(BivarPoly a, const BivarPoly& b) { return a -= b; }
  friend BivarPoly operator*(const BivarPoly& a, const BivarPoly& b);
  friend bool operator==(const BivarPoly& a, const BivarPoly& b) {
    return a.terms_ == b.terms_;
  }

  std::string str() const;
  static BivarPoly parse(std::string_view text);

private:
  std::map<Key, Rational> terms_;
};

}  // namespace icea

#endif
