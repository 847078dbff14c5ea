#include "icea/poly.hpp"

#include <cctype>
#include <sstream>

namespace icea {
namespace {

struct Token {
  enum Kind { Number, Var, Caret, Star, Plus, Minus, End } kind;
  Rational value;   // Number
  int var = 0;      // Var: 0 = bare "x", 1 = "x1", 2 = "x2"
  unsigned power = 0;  // after Caret
};

class Lexer {
public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip_ws();
    if (pos_ >= s_.size()) return {Token::End};
    char c = s_[pos_];
    if (c == '+') { ++pos_; return {Token::Plus}; }
    if (c == '-') { ++pos_; return {Token::Minus}; }
    if (c == '*') { ++pos_; return {Token::Star}; }
    if (c == '^') { ++pos_; return {Token::Caret}; }
    if (c == 'x' || c == 'X') {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '1' || s_[pos_] == '2')) {
        int v = s_[pos_] - '0';
        ++pos_;
        return {Token::Var, {}, v};
      }
      return {Token::Var, {}, 0};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
              s_[pos_] == '.' || s_[pos_] == '/'))
        ++pos_;
      return {Token::Number, Rational::parse(s_.substr(start, pos_ - start))};
    }
    throw std::invalid_argument("polynomial parse: unexpected character '" +
                                std::string(1, c) + "'");
  }

private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string_view s_;
  size_t pos_ = 0;
};

struct ParsedTerm {
  Rational coeff;
  unsigned pow_x1 = 0;
  unsigned pow_x2 = 0;
  unsigned pow_bare = 0;  // powers of a variable written plain "x"
};

// expression := [+-] term (('+'|'-') term)*
// term       := factor ('*' factor)*
// factor     := number | var ['^' uint]
std::vector<ParsedTerm> parse_terms(std::string_view text) {
  Lexer lex(text);
  std::vector<ParsedTerm> out;
  Token tok = lex.next();
  if (tok.kind == Token::End)
    throw std::invalid_argument("polynomial parse: empty input");

  while (true) {
    int sign = 1;
    while (tok.kind == Token::Plus || tok.kind == Token::Minus) {
      if (tok.kind == Token::Minus) sign = -sign;
      tok = lex.next();
    }
    ParsedTerm term{Rational(sign)};
    bool expect_factor = true;
    while (true) {
      if (expect_factor) {
        if (tok.kind == Token::Number) {
          term.coeff *= tok.value;
          tok = lex.next();
        } else if (tok.kind == Token::Var) {
          int var = tok.var;
          unsigned p = 1;
          tok = lex.next();
          if (tok.kind == Token::Caret) {
            tok = lex.next();
            if (tok.kind != Token::Number || tok.value.den() != 1 || tok.value.sign() < 0)
              throw std::invalid_argument("polynomial parse: bad exponent");
            p = static_cast<unsigned>(tok.value.num().get_ui());
            tok = lex.next();
          }
          if (var == 2) term.pow_x2 += p;
          else if (var == 1) term.pow_x1 += p;
          else term.pow_bare += p;
        } else {
          throw std::invalid_argument("polynomial parse: expected coefficient or variable");
        }
        expect_factor = false;
      } else if (tok.kind == Token::Star) {
        tok = lex.next();
        expect_factor = true;
      } else {
        break;
      }
    }
    out.push_back(std::move(term));
    if (tok.kind == Token::End) break;
    if (tok.kind != Token::Plus && tok.kind != Token::Minus)
      throw std::invalid_argument("polynomial parse: expected '+' or '-'");
  }
  return out;
}

void append_term(std::string& out, const std::string& coeff, const std::string& mono) {
  if (!out.empty()) out += " + ";
  out += coeff;
  if (!mono.empty()) out += "*" + mono;
}

}  // namespace

UniPoly::UniPoly(Axis axis, std::vector<Rational> coeffs)
    : axis_(axis), coeffs_(std::move(coeffs)) {
  trim();
}

UniPoly UniPoly::constant(Axis axis, Rational c) {
  return UniPoly(axis, {std::move(c)});
}

void UniPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

UniPoly& UniPoly::operator+=(const UniPoly& o) {
  if (axis_ != o.axis_) throw std::invalid_argument("UniPoly: axis mismatch");
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  trim();
  return *this;
}

UniPoly& UniPoly::operator-=(const UniPoly& o) {
  if (axis_ != o.axis_) throw std::invalid_argument("UniPoly: axis mismatch");
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  trim();
  return *this;
}

UniPoly& UniPoly::operator*=(const Rational& c) {
  if (c.is_zero()) {
    coeffs_.clear();
    return *this;
  }
  for (auto& a : coeffs_) a *= c;
  return *this;
}

UniPoly UniPoly::operator-() const {
  UniPoly r = *this;
  for (auto& a : r.coeffs_) a = -a;
  return r;
}

UniPoly operator*(const UniPoly& a, const UniPoly& b) {
  if (a.axis_ != b.axis_) throw std::invalid_argument("UniPoly: axis mismatch");
  if (a.is_zero() || b.is_zero()) return UniPoly(a.axis_);
  std::vector<Rational> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (size_t i = 0; i < a.coeffs_.size(); ++i)
    for (size_t j = 0; j < b.coeffs_.size(); ++j)
      c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return UniPoly(a.axis_, std::move(c));
}

UniPoly UniPoly::times_power(unsigned k) const {
  if (is_zero() || k == 0) return k == 0 ? *this : UniPoly(axis_);
  std::vector<Rational> c(coeffs_.size() + k);
  for (size_t i = 0; i < coeffs_.size(); ++i) c[i + k] = coeffs_[i];
  return UniPoly(axis_, std::move(c));
}

Rational UniPoly::eval(const Rational& x) const {
  Rational acc(0);
  for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

std::string UniPoly::str() const {
  if (is_zero()) return "0";
  std::string out;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].is_zero()) continue;
    std::string mono;
    if (i > 0) mono = std::string(axis_name(axis_)) + "^" + std::to_string(i);
    append_term(out, coeffs_[i].str(), mono);
  }
  return out;
}

std::string UniPoly::str_decimal(unsigned digits) const {
  if (is_zero()) return decimal_string(Rational(0), digits);
  std::string out;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].is_zero()) continue;
    std::string mono;
    if (i > 0) mono = std::string(axis_name(axis_)) + "^" + std::to_string(i);
    append_term(out, decimal_string(coeffs_[i], digits), mono);
  }
  return out;
}

UniPoly UniPoly::parse(Axis axis, std::string_view text) {
  std::vector<Rational> coeffs;
  for (const auto& t : parse_terms(text)) {
    // plain "x" stands for this axis' variable
    unsigned own = (axis == Axis::X1 ? t.pow_x1 : t.pow_x2) + t.pow_bare;
    unsigned foreign = axis == Axis::X1 ? t.pow_x2 : t.pow_x1;
    if (foreign != 0)
      throw std::invalid_argument("UniPoly::parse: variable from the other axis");
    if (own >= coeffs.size()) coeffs.resize(own + 1);
    coeffs[own] += t.coeff;
  }
  return UniPoly(axis, std::move(coeffs));
}

BivarPoly BivarPoly::constant(Rational c) {
  BivarPoly p;
  p.add_term(0, 0, c);
  return p;
}

BivarPoly BivarPoly::monomial(unsigned a, unsigned b, Rational c) {
  BivarPoly p;
  p.add_term(a, b, c);
  return p;
}

BivarPoly BivarPoly::lift(const UniPoly& p) {
  BivarPoly out;
  const auto& c = p.coeffs();
  for (unsigned i = 0; i < c.size(); ++i) {
    if (p.axis() == Axis::X1) out.add_term(i, 0, c[i]);
    else out.add_term(0, i, c[i]);
  }
  return out;
}

unsigned BivarPoly::total_degree() const {
  unsigned d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
  return d;
}

Rational BivarPoly::coeff(unsigned a, unsigned b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? Rational(0) : it->second;
}

void BivarPoly::add_term(unsigned a, unsigned b, const Rational& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace({a, b}, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

BivarPoly& BivarPoly::operator+=(const BivarPoly& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
  return *this;
}

BivarPoly& BivarPoly::operator-=(const BivarPoly& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
  return *this;
}

BivarPoly& BivarPoly::operator*=(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, v] : terms_) v *= c;
  return *this;
}

BivarPoly BivarPoly::operator-() const {
  BivarPoly r = *this;
  for (auto& [k, v] : r.terms_) v = -v;
  return r;
}

BivarPoly operator*(const BivarPoly& a, const BivarPoly& b) {
  BivarPoly out;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_)
      out.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
  return out;
}

std::string BivarPoly::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [k, c] : terms_) {
    std::string mono;
    if (k.first > 0) mono += "x1^" + std::to_string(k.first);
    if (k.second > 0) {
      if (!mono.empty()) mono += "*";
      mono += "x2^" + std::to_string(k.second);
    }
    append_term(out, c.str(), mono);
  }
  return out;
}

BivarPoly BivarPoly::parse(std::string_view text) {
  BivarPoly out;
  for (const auto& t : parse_terms(text)) {
    if (t.pow_bare != 0)
      throw std::invalid_argument("BivarPoly::parse: use x1/x2, not bare x");
    out.add_term(t.pow_x1, t.pow_x2, t.coeff);
  }
  return out;
}

}  // namespace icea
