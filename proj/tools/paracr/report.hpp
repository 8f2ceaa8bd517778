#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "paracr/models.hpp"
#include "paracr/zero_test.hpp"

namespace paracr::cli {

struct Check {
  std::string name;
  bool pass = false;
  std::string path;  // exact | numeric | structural
  double residual = 0;
  double tolerance = 0;
  int samples = 0;
  std::string detail;
};

class Report {
 public:
  Report(std::string command, const ZeroTestProtocol& proto);

  nlohmann::json& input() { return j_["input"]; }
  nlohmann::json& data() { return j_["data"]; }

  void add(Check c);
  void add(const std::string& prefix, const ResidualLine& l);
  void flag(const std::string& name, bool pass, const std::string& detail = "");
  void add(const std::string& name, const ZeroCertificate& z, bool expect_zero = true);

  bool pass() const;
  const std::vector<Check>& checks() const { return checks_; }

  nlohmann::json to_json(double wall_time) const;
  std::string to_text(double wall_time) const;

 private:
  std::string command_;
  double tol_;
  nlohmann::json j_;
  std::vector<Check> checks_;
};

constexpr const char* kVersion = "1.0.0";

}  // namespace paracr::cli
