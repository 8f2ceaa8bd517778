#pragma once

#include <stdexcept>
#include <string>

#include "paracr/expr.hpp"

namespace paracr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Grammar:
//   expr     := term (('+'|'-') term)*
//   term     := unary (('*'|'/') unary)*
//   unary    := ('-'|'+') unary | factor
//   factor   := base ('^' exponent)?
//   base     := number | ident | '(' expr ')' | func '(' expr ')'
//   exponent := ['-'] (number | ident | '(' expr ')')
// func is one of exp, log, sqrt, arctan, sin, cos, sgn. z_x and z_xx are read as p and r.
// A non-constant exponent yields a symbolic power.
Expr parse_expression(const std::string& text);

}  // namespace paracr
