#include "paracr/parser.hpp"

#include <cctype>
#include <map>

namespace paracr {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (i_ != s_.size()) fail("unexpected character '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, i_); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    for (;;) {
      if (eat('+'))
        terms.push_back(term());
      else if (eat('-'))
        terms.push_back(-term());
      else
        break;
    }
    return add(std::move(terms));
  }

  Expr term() {
    std::vector<Expr> f{unary()};
    for (;;) {
      if (eat('*')) {
        f.push_back(unary());
      } else if (eat('/')) {
        std::size_t at = i_;
        Expr d = unary();
        if (d.is_zero()) throw ParseError("division by zero", at);
        f.push_back(pow(d, Q(-1)));
      } else {
        break;
      }
    }
    return mul(std::move(f));
  }

  Expr unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (!eat('^')) return b;
    bool neg = eat('-');
    Expr e = base();
    if (neg) e = -e;
    try {
      return powx(b, e);
    } catch (const DomainError& err) {
      fail(err.what());
    }
  }

  Expr number() {
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string whole = s_.substr(start, i_ - start);
    std::string frac;
    if (i_ < s_.size() && s_[i_] == '.') {
      ++i_;
      std::size_t f0 = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      frac = s_.substr(f0, i_ - f0);
    }
    if (whole.empty() && frac.empty()) fail("malformed number");
    mpz_class n(whole.empty() ? "0" : whole);
    mpz_class d = 1;
    for (char c : frac) {
      n = n * 10 + (c - '0');
      d *= 10;
    }
    return num(Q(n, d));
  }

  Expr base() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of input");
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++i_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = i_;
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
        ++i_;
      std::string id = s_.substr(start, i_ - start);
      skip();
      if (i_ < s_.size() && s_[i_] == '(') {
        static const std::map<std::string, Expr (*)(const Expr&)> funcs = {
            {"exp", &paracr::exp},   {"log", &paracr::log}, {"sqrt", &paracr::sqrt},
            {"arctan", &paracr::atan}, {"sin", &paracr::sin}, {"cos", &paracr::cos},
            {"sgn", &paracr::sgn}};
        auto it = funcs.find(id);
        if (it == funcs.end()) {
          i_ = start;
          fail("unknown function '" + id + "'");
        }
        ++i_;
        Expr a = expr();
        expect(')');
        return it->second(a);
      }
      if (id == "z_x") return var("p");
      if (id == "z_xx") return var("r");
      return var(id);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expr parse_expression(const std::string& text) { return Parser(text).run(); }

}  // namespace paracr
