#include "icea/rational.hpp"

#include <cctype>

namespace icea {

Rational Rational::parse(std::string_view text) {
  // Trim surrounding whitespace.
  size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  text = text.substr(b, e - b);
  if (text.empty()) throw std::invalid_argument("Rational::parse: empty string");

  // Scientific notation: mantissa scaled by a power of ten.
  if (auto exp_pos = text.find_first_of("eE"); exp_pos != std::string_view::npos) {
    Rational mantissa = parse(text.substr(0, exp_pos));
    std::string_view exp_text = text.substr(exp_pos + 1);
    if (exp_text.empty()) throw std::invalid_argument("Rational::parse: empty exponent");
    bool neg = exp_text[0] == '-';
    if (exp_text[0] == '+' || exp_text[0] == '-') exp_text.remove_prefix(1);
    if (exp_text.empty() || exp_text.size() > 6)
      throw std::invalid_argument("Rational::parse: bad exponent");
    unsigned exp = 0;
    for (char c : exp_text) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw std::invalid_argument("Rational::parse: bad exponent");
      exp = exp * 10 + static_cast<unsigned>(c - '0');
    }
    Rational scale = pow(Rational(10), exp);
    return neg ? mantissa / scale : mantissa * scale;
  }

  const auto slash = text.find('/');
  const auto dot = text.find('.');
  if (slash != std::string_view::npos && dot != std::string_view::npos)
    throw std::invalid_argument("Rational::parse: mixed '/' and '.'");

  auto parse_int = [](std::string_view s) {
    if (s.empty()) throw std::invalid_argument("Rational::parse: missing digits");
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("Rational::parse: missing digits");
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw std::invalid_argument("Rational::parse: bad integer '" + std::string(s) + "'");
    return mpz_class(std::string(s), 10);
  };

  if (slash != std::string_view::npos) {
    mpz_class num = parse_int(text.substr(0, slash));
    mpz_class den = parse_int(text.substr(slash + 1));
    return Rational(num, den);
  }
  if (dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    std::string digits(whole.empty() || whole == "-" || whole == "+"
                           ? std::string_view{}
                           : whole.substr(whole[0] == '+' || whole[0] == '-' ? 1 : 0));
    digits.append(frac);
    if (digits.empty()) throw std::invalid_argument("Rational::parse: missing digits");
    mpz_class num = parse_int(digits);
    mpz_class den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    if (neg) num = -num;
    return Rational(num, den);
  }
  return Rational(parse_int(text));
}

std::string Rational::str() const {
  if (den() == 1) return num().get_str();
  return num().get_str() + "/" + den().get_str();
}

Rational pow(const Rational& base, unsigned exp) {
  Rational out(1);
  Rational b = base;
  while (exp) {
    if (exp & 1u) out *= b;
    exp >>= 1u;
    if (exp) b *= b;
  }
  return out;
}

mpz_class factorial(unsigned n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

mpz_class binomial(unsigned n, unsigned k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

mpz_class double_factorial(unsigned n) {
  if (n <= 1) return 1;
  mpz_class r;
  mpz_2fac_ui(r.get_mpz_t(), n);
  return r;
}

std::string decimal_string(const Rational& r, unsigned digits) {
  mpz_class pow10 = 1;
  for (unsigned i = 0; i < digits; ++i) pow10 *= 10;

  mpz_class num = abs(r.num()) * pow10;
  mpz_class q, rem;
  mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), r.den().get_mpz_t());
  if (2 * rem >= r.den()) q += 1;  // half away from zero

  mpz_class whole = q / pow10;
  mpz_class frac = q % pow10;
  std::string out = (r.sign() < 0 && q != 0) ? "-" : "";
  out += whole.get_str();
  if (digits > 0) {
    std::string f = frac.get_str();
    out += "." + std::string(digits - f.size(), '0') + f;
  }
  return out;
}

}  // namespace icea
