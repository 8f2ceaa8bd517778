#pragma once

#include <string>
#include <vector>

#include "report.hpp"

namespace paracr::cli {

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

// All nine acceptance criteria; independent criteria run concurrently.
std::vector<Criterion> run_suite(const ZeroTestProtocol& proto);

}  // namespace paracr::cli
