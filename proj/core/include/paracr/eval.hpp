#pragma once

#include <map>
#include <string>

#include "paracr/expr.hpp"

namespace paracr {

// Pole or real-domain violation hit during numeric evaluation.
class EvalError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Variable values kept in extended precision; the double view is a rounding of it.
struct EvaluationPoint {
  std::map<std::string, long double> values;

  EvaluationPoint() = default;
  EvaluationPoint(std::initializer_list<std::pair<const std::string, long double>> v) : values(v) {}
  long double& operator[](const std::string& k) { return values[k]; }
};

struct Evaluation {
  double value = 0;
  long double value_ext = 0;
  // Sum of absolute term sizes; used as the scale for relative tolerances.
  long double scale = 0;
};

Evaluation evaluate(const Expr& e, const EvaluationPoint& pt);
double evaluate_double(const Expr& e, const EvaluationPoint& pt);
long double evaluate_ext(const Expr& e, const EvaluationPoint& pt);

// x^q with the real branch for odd denominators.
long double real_pow(long double x, const Q& q);

}  // namespace paracr
