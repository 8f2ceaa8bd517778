#include "paracr/pairfile.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "paracr/parser.hpp"

namespace paracr {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long double to_ld(const std::string& s, int line) {
  try {
    Expr e = parse_expression(s);
    if (!e.is_num()) throw PairFileError("expected a number, got '" + s + "'", line);
    return e.num().get_d();
  } catch (const ParseError& e) {
    throw PairFileError(e.what(), line);
  }
}

}  // namespace

PdePair parse_pair(const std::string& text) {
  static const std::regex assign(R"(^([A-Za-z_]\w*)\s*=\s*(.+)$)");
  static const std::regex interval(R"(^(param|box)\s+([A-Za-z_]\w*)\s+in\s*[\(\[]\s*([^,]+),\s*([^\)\]]+)[\)\]]$)");
  static const std::regex pinned(R"(^param\s+([A-Za-z_]\w*)\s*=\s*(.+)$)");
  static const std::regex fiber(R"(^fiber\s+([A-Za-z_]\w*)$)");

  std::optional<Expr> F, H, P;
  std::optional<std::string> fiber_coord;
  std::vector<Param> params;
  SampleBox box;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto expr = [&](const std::string& s) {
    try {
      return parse_expression(s);
    } catch (const ParseError& e) {
      throw PairFileError(e.what(), lineno);
    }
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::smatch m;
    if (std::regex_match(line, m, interval)) {
      long double lo = to_ld(trim(m[3]), lineno), hi = to_ld(trim(m[4]), lineno);
      if (!(lo < hi)) throw PairFileError("empty interval", lineno);
      if (m[1] == "param")
        params.push_back(Param{m[2], lo, hi, std::nullopt});
      else
        box.set(m[2], lo, hi);
    } else if (std::regex_match(line, m, pinned)) {
      Expr v = expr(m[2]);
      if (!v.is_num()) throw PairFileError("parameter value must be rational", lineno);
      params.push_back(Param{m[1], v.num().get_d(), v.num().get_d(), v.num()});
    } else if (std::regex_match(line, m, fiber)) {
      fiber_coord = m[1];
    } else if (std::regex_match(line, m, assign)) {
      std::string lhs = m[1];
      Expr rhs = expr(trim(m[2]));
      if ((lhs == "F" && F) || (lhs == "H" && H) || (lhs == "p" && P))
        throw PairFileError("'" + lhs + "' given twice", lineno);
      if (lhs == "F")
        F = rhs;
      else if (lhs == "H")
        H = rhs;
      else if (lhs == "p")
        P = rhs;
      else
        throw PairFileError("unknown key '" + lhs + "'", lineno);
    } else {
      throw PairFileError("cannot parse line: " + line, lineno);
    }
  }
  if (!F || !H) throw PairFileError("pair file needs both F and H", lineno);
  if (fiber_coord.has_value() != P.has_value())
    throw PairFileError("'fiber' and 'p =' must be given together", lineno);
  std::optional<FiberChart> fc;
  if (fiber_coord) fc = FiberChart{*fiber_coord, *P};
  return PdePair(*F, *H, params, box, fc);
}

PdePair load_pair(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw PairFileError("cannot open " + path, 0);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_pair(ss.str());
}

PdePair with_param(const PdePair& pair, const std::string& name, const Q& value) {
  std::vector<Param> prm = pair.params();
  bool found = false;
  for (auto& p : prm)
    if (!found && (name.empty() || p.name == name)) {
      p.value = value;
      found = true;
    }
  if (!found) throw std::invalid_argument(name.empty() ? "pair has no parameter" : "pair has no parameter " + name);
  return PdePair(pair.F(), pair.H(), prm, pair.box(), pair.fiber());
}

}  // namespace paracr
