#pragma once

#include "paracr/parser.hpp"
#include "paracr/poly.hpp"

namespace testutil {

inline paracr::Expr P(const std::string& s) { return paracr::parse_expression(s); }

inline bool exact_zero(const paracr::Expr& e) {
  paracr::RationalForm r = paracr::normalize_rational(e);
  return r.exact && r.value.is_zero();
}

inline bool exact_equal(const paracr::Expr& a, const paracr::Expr& b) { return exact_zero(a - b); }

}  // namespace testutil
