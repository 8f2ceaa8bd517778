#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace paracr {

using Q = mpq_class;

enum class Kind : std::uint8_t {
  Num,
  Var,
  Sum,
  Product,
  Pow,   // base ^ rational constant
  PowX,  // base ^ non-constant exponent
  Exp,
  Log,
  Atan,
  Sin,
  Cos,
  Sgn,
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Expr;

struct Node {
  Kind kind;
  Q num;  // value for Num, exponent for Pow
  std::string name;
  std::vector<Expr> args;
  std::size_t hash = 0;
};

class Expr {
 public:
  Expr();  // zero
  Expr(long v);
  Expr(const Q& v);

  Kind kind() const { return n_->kind; }
  const Q& num() const { return n_->num; }
  const std::string& name() const { return n_->name; }
  const std::vector<Expr>& args() const { return n_->args; }
  const Expr& arg(std::size_t i = 0) const { return n_->args[i]; }
  std::size_t hash() const { return n_->hash; }
  const Node* node() const { return n_.get(); }

  bool is_num() const { return kind() == Kind::Num; }
  bool is_zero() const { return is_num() && num() == 0; }
  bool is_one() const { return is_num() && num() == 1; }

  static Expr make(Node n);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

// Total order used for canonical child ordering.
int compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr num(const Q& v);
Expr num(long n, long d);
Expr var(const std::string& name);
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Q& e);
Expr powx(const Expr& base, const Expr& e);
Expr sqrt(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr atan(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sgn(const Expr& a);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

// Throws DomainError when the expression contains sgn.
Expr diff(const Expr& e, const std::string& v);
Expr subs(const Expr& e, const std::map<std::string, Expr>& b);
std::set<std::string> free_vars(const Expr& e);
bool has_kind(const Expr& e, Kind k);
std::size_t tree_size(const Expr& e);

// Splits a term into numeric coefficient and remaining monomial.
std::pair<Q, Expr> split_coeff(const Expr& t);

std::string to_string(const Expr& e);
std::string to_string(const Q& q);

}  // namespace paracr
