#include "report.hpp"

#include <iomanip>
#include <sstream>

namespace paracr::cli {

Report::Report(std::string command, const ZeroTestProtocol& proto) : command_(std::move(command)), tol_(proto.tol) {
  j_["artifact"] = "paracr";
  j_["version"] = kVersion;
  j_["command"] = command_;
  j_["protocol"] = {{"samples", proto.samples}, {"tol", proto.tol}, {"seed", proto.seed}};
  j_["input"] = nlohmann::json::object();
  j_["data"] = nlohmann::json::object();
}

void Report::add(Check c) { checks_.push_back(std::move(c)); }

void Report::add(const std::string& name, const ZeroCertificate& z, bool expect_zero) {
  Check c;
  c.name = name;
  c.pass = z.zero == expect_zero;
  c.path = to_string(z.path);
  c.residual = z.path == ZeroPath::Exact ? 0.0 : z.worst;
  c.tolerance = tol_;
  c.samples = z.samples;
  add(c);
}

void Report::add(const std::string& prefix, const ResidualLine& l) {
  Check c;
  c.name = prefix.empty() ? l.name : prefix + ": " + l.name;
  c.pass = l.pass;
  c.path = l.cert.samples == 0 && l.cert.path == ZeroPath::Numeric ? "structural" : to_string(l.cert.path);
  c.residual = l.cert.path == ZeroPath::Exact ? 0.0 : l.cert.worst;
  c.tolerance = tol_;
  c.samples = l.cert.samples;
  c.detail = l.detail;
  add(c);
}

void Report::flag(const std::string& name, bool pass, const std::string& detail) {
  Check c;
  c.name = name;
  c.pass = pass;
  c.path = "structural";
  c.detail = detail;
  add(c);
}

bool Report::pass() const {
  for (const auto& c : checks_)
    if (!c.pass) return false;
  return true;
}

nlohmann::json Report::to_json(double wall_time) const {
  nlohmann::json out = j_;
  out["checks"] = nlohmann::json::array();
  for (const auto& c : checks_) {
    nlohmann::json e = {{"name", c.name},           {"pass", c.pass},         {"path", c.path},
                        {"residual", c.residual},   {"tolerance", c.tolerance}, {"samples", c.samples}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    out["checks"].push_back(e);
  }
  out["verdict"] = pass() ? "pass" : "fail";
  out["wall_time_s"] = wall_time;
  return out;
}

std::string Report::to_text(double wall_time) const {
  std::ostringstream os;
  os << "paracr " << kVersion << " " << command_ << "  (seed " << j_["protocol"]["seed"].get<std::uint64_t>()
     << ", samples " << j_["protocol"]["samples"].get<int>() << ", tol " << tol_ << ")\n";
  for (const auto& [k, v] : j_["data"].items()) {
    std::string t = v.is_string() ? v.get<std::string>() : v.dump();
    if (t.size() > 160) t = t.substr(0, 120) + " ... (" + std::to_string(t.size()) + " chars, see --json)";
    os << "  " << k << ": " << t << "\n";
  }
  for (const auto& c : checks_) {
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
    if (c.path == "numeric") os << "  (numeric, worst " << std::setprecision(3) << c.residual << ")";
    else if (c.path == "exact") os << "  (exact)";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << (pass() ? "PASS" : "FAIL") << "  " << std::fixed << std::setprecision(2) << wall_time << "s\n";
  return os.str();
}

}  // namespace paracr::cli
