#pragma once

#include <stdexcept>
#include <string>

#include "paracr/paracr.hpp"

namespace paracr {

class PairFileError : public std::runtime_error {
 public:
  PairFileError(const std::string& msg, int line) : std::runtime_error(msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Line-oriented text format:
//   F = <expr>
//   H = <expr>
//   param b in (lo, hi)        free parameter, sampled from the interval
//   param b = 3/2              pinned parameter
//   box p in [lo, hi]          sampling interval for a chart coordinate
//   fiber theta                jet coordinate p replaced by a fiber coordinate
//   p = <expr in theta>
// '#' starts a comment.
PdePair parse_pair(const std::string& text);
PdePair load_pair(const std::string& path);

// Pins the named parameter (or the first one when name is empty).
PdePair with_param(const PdePair& pair, const std::string& name, const Q& value);

}  // namespace paracr
