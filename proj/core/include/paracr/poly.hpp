#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "paracr/expr.hpp"

namespace paracr {

using Mono = std::vector<int>;

// Sparse multivariate polynomial over Q with a fixed number of variables.
class Poly {
 public:
  explicit Poly(int nvars = 0) : n_(nvars) {}
  static Poly constant(int nvars, const Q& c);
  static Poly variable(int nvars, int i, int e = 1);

  int nvars() const { return n_; }
  const std::map<Mono, Q>& terms() const { return t_; }
  std::size_t size() const { return t_.size(); }
  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;
  Q constant_term() const;
  const Mono& lead_mono() const { return t_.rbegin()->first; }
  const Q& lead_coeff() const { return t_.rbegin()->second; }

  void add_term(const Mono& m, const Q& c);
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  Poly scaled(const Q& c) const;
  Poly pow(unsigned e) const;
  bool operator==(const Poly& o) const { return t_ == o.t_; }

  int degree(int v) const;
  bool has_var(int v) const { return degree(v) > 0; }
  // Coefficients with respect to variable v; the keys are exponents of v.
  std::map<int, Poly> coeffs_in(int v) const;

 private:
  int n_;
  std::map<Mono, Q> t_;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact quotient when b divides a.
bool divide_exact(const Poly& a, const Poly& b, Poly& q);
// Greatest common divisor, normalized to leading coefficient 1.
Poly gcd(const Poly& a, const Poly& b);

struct RationalForm {
  Expr value;
  bool exact = false;      // false when e lies outside the rational subclass
  bool reduced = true;     // false when gcd removal was skipped for size
};

// Canonical numerator/denominator form with the gcd removed.
RationalForm normalize_rational(const Expr& e);

enum class ExactVerdict { Zero, NonZero, Undecided };

// Zero when the numerator vanishes after treating transcendental and radical pieces
// as constrained atoms; NonZero only inside the rational subclass.
ExactVerdict exact_zero_test(const Expr& e);

}  // namespace paracr
