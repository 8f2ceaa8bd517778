#include "paracr/models.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "paracr/parser.hpp"

namespace paracr {

namespace detail {
extern const std::string_view kCatalogText;
}

// ------------------------------------------------------------ structure constants

Expr StructureConstants::get(int k, int i, int j) const {
  if (i == j) return Expr(0);
  bool flip = i > j;
  auto it = c_.find({k, flip ? j : i, flip ? i : j});
  if (it == c_.end()) return Expr(0);
  return flip ? -it->second : it->second;
}

void StructureConstants::add(int k, int i, int j, const Expr& v) {
  if (i == j) return;
  if (i > j) return add(k, j, i, -v);
  Expr& slot = c_[{k, i, j}];
  slot = slot + v;
  if (slot.is_zero()) c_.erase({k, i, j});
}

void StructureConstants::set(int k, int i, int j, const Expr& v) {
  if (i > j) return set(k, j, i, -v);
  c_.erase({k, i, j});
  add(k, i, j, v);
}

StructureConstants StructureConstants::map(const std::function<Expr(const Expr&)>& f) const {
  StructureConstants r(n_);
  for (const auto& [key, v] : c_) r.add(key[0], key[1], key[2], f(v));
  return r;
}

namespace {

// 1-based helper matching the displayed equations.
struct Builder {
  StructureConstants sc{5};
  void operator()(int k, int i, int j, const Expr& v) { sc.add(k - 1, i - 1, j - 1, v); }
};

}  // namespace

StructureConstants homo1(const Expr& e) {
  Builder c;
  c(1, 1, 3, -6 * e), c(1, 1, 4, e / 2), c(1, 1, 5, num(-3, 2) * e), c(1, 2, 4, 1);
  c(2, 1, 2, num(-1, 16) * e), c(2, 2, 3, -2 * e), c(2, 2, 4, e / 2), c(2, 2, 5, -e);
  c(2, 1, 3, -1), c(2, 1, 4, num(1, 32)), c(2, 1, 5, num(-1, 8)), c(2, 3, 4, 1);
  c(3, 1, 3, num(-3, 16) * e), c(3, 3, 4, e / 2), c(3, 3, 5, -e / 2);
  c(3, 2, 4, num(1, 32)), c(3, 2, 5, num(-1, 8));
  c(4, 1, 4, -e / 8), c(4, 1, 5, e / 4), c(4, 3, 4, 4 * e), c(4, 4, 5, -e / 2), c(4, 2, 5, -1);
  c(5, 1, 5, num(-1, 16) * e), c(5, 3, 5, 2 * e), c(5, 4, 5, -e / 4);
  return c.sc;
}

StructureConstants homo2(const Expr& e, const Expr& s) {
  Builder c;
  c(1, 1, 3, -e), c(1, 1, 5, -e), c(1, 2, 4, 1);
  c(2, 1, 2, e * s), c(2, 2, 5, -e), c(2, 1, 4, -s), c(2, 3, 4, 1);
  c(3, 1, 4, e), c(3, 3, 5, -e), c(3, 1, 2, -1), c(3, 2, 4, -s);
  c(4, 1, 4, -e * s), c(4, 3, 4, e), c(4, 1, 2, s), c(4, 2, 5, -1);
  c(5, 1, 4, -e), c(5, 3, 5, e), c(5, 1, 2, 1), c(5, 2, 4, s);
  return c.sc;
}

StructureConstants flat_structure() {
  Expr r = var("r");
  Builder c;
  c(1, 2, 4, 1);
  c(2, 3, 4, 1), c(2, 2, 5, r);
  c(3, 3, 5, 2 * r);
  c(4, 2, 5, -1), c(4, 4, 5, -r);
  return c.sc;
}

JacobiResult jacobi_check(const StructureConstants& sc, const ZeroTestProtocol& proto) {
  JacobiResult out;
  int n = sc.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          std::vector<Expr> t;
          for (int m = 0; m < n; ++m) {
            t.push_back(sc.get(m, i, j) * sc.get(l, m, k));
            t.push_back(sc.get(m, j, k) * sc.get(l, m, i));
            t.push_back(sc.get(m, k, i) * sc.get(l, m, j));
          }
          Expr s = add(std::move(t));
          if (s.is_zero()) continue;
          ZeroCertificate z = is_identically_zero(s, proto);
          out.worst = std::max(out.worst, z.worst);
          if (!z.zero) {
            out.ok = false;
            out.failures.push_back({i, j, k, l});
          }
        }
  return out;
}

// ------------------------------------------------------------ catalog

namespace {

using nlohmann::json;

Expr px(const json& j) { return parse_expression(j.get<std::string>()); }

SampleBox read_box(const json& j) {
  SampleBox b;
  for (const auto& [k, v] : j.items()) b.set(k, v[0].get<double>(), v[1].get<double>());
  return b;
}

std::vector<std::vector<Expr>> read_matrix(const json& j) {
  std::vector<std::vector<Expr>> m;
  for (const auto& row : j) {
    std::vector<Expr> r;
    for (const auto& e : row) r.push_back(px(e));
    m.push_back(std::move(r));
  }
  return m;
}

Q parse_q(const std::string& s) {
  Expr e = parse_expression(s);
  if (!e.is_num()) throw std::runtime_error("expected a rational literal: " + s);
  return e.num();
}

ModelSpec read_model(const json& j) {
  ModelSpec m;
  m.id = j.at("id").get<std::string>();
  m.target = j.at("target").get<std::string>();
  for (const auto& p : j.at("params")) {
    ParamSpec ps;
    ps.name = p.at("name").get<std::string>();
    ps.lo = p.at("lo").get<double>();
    ps.hi = p.at("hi").get<double>();
    ps.unbounded_above = p.value("unbounded_above", false);
    ps.default_value = parse_q(p.at("default").get<std::string>());
    m.params.push_back(ps);
  }
  const json& pj = j.at("pair");
  std::optional<FiberChart> fiber;
  if (pj.contains("fiber"))
    fiber = FiberChart{pj["fiber"].at("coord").get<std::string>(), px(pj["fiber"].at("p"))};
  std::vector<Param> prm;
  for (const auto& ps : m.params) prm.push_back(Param{ps.name, ps.lo, ps.hi, std::nullopt});
  m.pair = PdePair(px(pj.at("F")), px(pj.at("H")), prm, read_box(j.at("box")), fiber);
  if (j.contains("defs"))
    for (const auto& [k, v] : j["defs"].items()) m.defs[k] = px(v);
  if (j.contains("coframe")) {
    m.chart = Chart(j.at("chart").get<std::vector<std::string>>());
    m.coframe = read_matrix(j["coframe"]);
    m.chart_box = read_box(j.at("chart_box"));
  } else {
    m.chart = m.pair.chart();
    m.chart_box = m.pair.box();
  }
  m.S = read_matrix(j.at("S"));
  if (j.contains("S_printed_11")) m.S11_printed = px(j["S_printed_11"]);
  m.r_expr = px(j.at("r_expr"));
  m.generators = read_matrix(j.at("generators"));
  if (j.contains("generator_bindings"))
    for (const auto& [k, v] : j["generator_bindings"].items()) m.generator_bindings[k] = px(v);
  for (const auto& [k, v] : j.at("table").items()) {
    auto comma = k.find(',');
    int a = std::stoi(k.substr(0, comma)) - 1, b = std::stoi(k.substr(comma + 1)) - 1;
    m.table[{a, b}] = px(v);
  }
  return m;
}

}  // namespace

std::string catalog_text() { return std::string(detail::kCatalogText); }

const std::vector<ModelSpec>& catalog() {
  static const std::vector<ModelSpec> models = [] {
    json j = json::parse(detail::kCatalogText);
    if (j.at("format") != "paracr-catalog") throw std::runtime_error("unexpected catalog format");
    std::vector<ModelSpec> out;
    for (const auto& mj : j.at("models")) out.push_back(read_model(mj));
    return out;
  }();
  return models;
}

const ModelSpec& model(const std::string& id) {
  for (const auto& m : catalog())
    if (m.id == id) return m;
  throw std::invalid_argument("unknown model '" + id + "'");
}

void check_param(const ModelSpec& m, const std::optional<Q>& b) {
  if (m.params.empty()) return;
  if (!b) return;
  const ParamSpec& ps = m.params[0];
  double v = b->get_d();
  bool ok = v > static_cast<double>(ps.lo) && (ps.unbounded_above || v < static_cast<double>(ps.hi));
  if (!ok) {
    std::ostringstream dom;
    dom << "(" << static_cast<double>(ps.lo) << ", ";
    if (ps.unbounded_above) dom << "inf)";
    else dom << static_cast<double>(ps.hi) << ")";
    std::string why;
    if (m.id == "iiia" && *b == 1) why = "; F_pp vanishes identically at b = 1";
    throw ParamDomainError("parameter " + ps.name + " = " + to_string(*b) + " outside " + dom.str() + why);
  }
}

Q default_param(const ModelSpec& m) {
  if (m.params.empty()) return Q(0);
  return m.params[0].default_value;
}

Expr instantiate(const ModelSpec& m, const Expr& e, const std::optional<Q>& b, int eps) {
  Expr r = m.defs.empty() ? e : subs(e, m.defs);
  std::map<std::string, Expr> bind;
  if (!m.params.empty()) bind[m.params[0].name] = Expr(b ? *b : default_param(m));
  if (eps != 0) bind["eps"] = Expr(eps);
  return subs(r, bind);
}

PdePair model_pair(const ModelSpec& m, const std::optional<Q>& b) {
  check_param(m, b);
  std::vector<Param> prm;
  for (const auto& ps : m.params) prm.push_back(Param{ps.name, ps.lo, ps.hi, b ? *b : ps.default_value});
  const PdePair& p = m.pair;
  return specialize(PdePair(p.F(), p.H(), prm, p.box(), p.fiber()));
}

CoframeSet model_coframe(const ModelSpec& m, const std::optional<Q>& b) {
  if (m.coframe.empty()) return initial_coframe(model_pair(m, b));
  check_param(m, b);
  std::vector<Form> forms;
  for (const auto& row : m.coframe) {
    std::vector<Expr> c;
    for (const auto& e : row) c.push_back(simplify_rational(instantiate(m, e, b, 0)));
    forms.push_back(Form::one_form(m.chart, c));
  }
  return CoframeSet(m.chart, forms);
}

std::vector<std::vector<Expr>> model_S(const ModelSpec& m, const std::optional<Q>& b, int eps) {
  check_param(m, b);
  std::vector<std::vector<Expr>> S;
  for (const auto& row : m.S) {
    std::vector<Expr> r;
    for (const auto& e : row) r.push_back(simplify_rational(instantiate(m, e, b, eps)));
    S.push_back(std::move(r));
  }
  return S;
}

ZeroTestProtocol model_protocol(const ModelSpec& m, const ZeroTestProtocol& base) {
  ZeroTestProtocol p = base;
  SampleBox box = m.chart_box;
  for (const auto& [v, rg] : base.box.ranges) box.ranges[v] = rg;
  p.box = box;
  return p;
}

SValue s_of_b(const std::string& id, long double b) {
  SValue v;
  if (id == "iiia") {
    if (!(b > 1 - 1e-15L && b < 2)) throw ParamDomainError("s(b) for iiia needs b in [1, 2)");
    long double w = (b - 2) * (b + 1) * (2 * b - 1);
    long double c = real_pow(w, Q(1, 3));
    v.s = -1.5L * (1 - b + b * b) / (c * c);
    v.ds = 13.5L * b * (b - 1) / (c * c * c * c * c);
  } else if (id == "iiib") {
    if (!(b > 0)) throw ParamDomainError("s(b) for iiib needs b > 0");
    long double c = real_pow(2 * b * (9 + b * b), Q(1, 3));
    v.s = -1.5L * (b * b - 3) / (c * c);
    long double c5 = real_pow(b * (b * b + 9), Q(5, 3));
    v.ds = -27.0L / real_pow(2, Q(2, 3)) * (b * b + 1) / c5;
  } else {
    throw std::invalid_argument("s(b) is defined for iiia and iiib only");
  }
  return v;
}

Expr s_expr(const std::string& id, const Q& bq) {
  Expr b(bq);
  if (id == "iiia")
    return num(-3, 2) * (1 - b + b * b) * pow((b - 2) * (b + 1) * (2 * b - 1), Q(-2, 3));
  if (id == "iiib") return num(-3, 2) * (b * b - 3) * pow(2 * b * (9 + b * b), Q(-2, 3));
  throw std::invalid_argument("s(b) is defined for iiia and iiib only");
}

StructureConstants target_structure(const ModelSpec& m, const std::optional<Q>& b, int eps) {
  if (m.target == "flat") return flat_structure();
  if (m.target == "homo1") return homo1(Expr(eps));
  if (m.target == "homo2") {
    check_param(m, b);
    return homo2(Expr(eps), s_expr(m.id, b ? *b : default_param(m)));
  }
  throw std::runtime_error("unknown target system " + m.target);
}

bool in_G0_pattern(const std::vector<std::vector<Expr>>& S) {
  static const int zeros[][2] = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 3}, {1, 4}, {2, 3},
                                 {2, 4}, {3, 1}, {3, 2}, {4, 1}, {4, 2}};
  for (const auto& z : zeros)
    if (!S[z[0]][z[1]].is_zero()) return false;
  return true;
}

namespace {

int resolve_eps(const ModelSpec& m, const std::optional<Q>& b, const ZeroTestProtocol& proto) {
  Expr r = instantiate(m, m.r_expr, b, 0);
  std::mt19937_64 rng(proto.seed);
  auto vars = free_vars(r);
  int pos = 0, neg = 0;
  for (int i = 0; i < proto.samples; ++i) {
    long double v = evaluate_ext(r, random_point(vars, proto.box, rng));
    (v > 0 ? pos : neg)++;
  }
  if (pos && !neg) return -1;
  if (neg && !pos) return 1;
  return 0;
}

ResidualLine line(std::string name, const ZeroCertificate& z, bool expect_zero = true) {
  ResidualLine l;
  l.name = std::move(name);
  l.cert = z;
  l.pass = z.zero == expect_zero;
  return l;
}

// Non-vanishing of the coefficient determinant at every sample.
ResidualLine det_line(const CoframeSet& c, const ZeroTestProtocol& proto) {
  ResidualLine l;
  l.name = "det(theta) != 0";
  std::mt19937_64 rng(proto.seed);
  std::set<std::string> vars;
  for (const auto& row : c.matrix())
    for (const auto& e : row)
      for (const auto& v : free_vars(e)) vars.insert(v);
  int n = c.size();
  double smallest = INFINITY;
  for (int s = 0; s < proto.samples; ++s) {
    EvaluationPoint pt = random_point(vars, proto.box, rng);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = evaluate_double(c.matrix()[i][j], pt);
    smallest = std::min(smallest, std::fabs(M.determinant()));
  }
  l.pass = smallest > 1e-12;
  l.cert.samples = proto.samples;
  l.cert.worst_abs = smallest;
  l.detail = "min |det| = " + std::to_string(smallest);
  return l;
}

}  // namespace

RealizationReport verify_realization(const ModelSpec& m, const std::optional<Q>& b, int eps,
                                     const ZeroTestProtocol& base) {
  check_param(m, b);
  ZeroTestProtocol proto = model_protocol(m, base);
  RealizationReport rep;
  rep.id = m.id;
  if (!m.params.empty()) rep.b = b ? *b : default_param(m);
  rep.eps = eps != 0 ? eps : resolve_eps(m, b, proto);
  if (rep.eps == 0) throw DomainError("r changes sign on the sampling box; eps is undefined");

  CoframeSet omega = model_coframe(m, b);
  auto S = model_S(m, b, rep.eps);
  const Chart& chart = omega.chart();
  std::vector<Form> theta;
  for (int k = 0; k < 5; ++k) {
    Form t(chart, 1);
    for (int v = 0; v < 5; ++v)
      if (!S[k][v].is_zero()) t += S[k][v] * omega[v];
    theta.push_back(t.map(simplify_rational));
  }

  ResidualLine g0;
  g0.name = "S has the G0 block pattern";
  g0.pass = in_G0_pattern(S);
  rep.lines.push_back(g0);
  rep.lines.push_back(det_line(CoframeSet(chart, theta), proto));

  StructureConstants sc = target_structure(m, b, rep.eps);
  for (int k = 0; k < 5; ++k) {
    Form res = d(theta[k]);
    for (const auto& [key, c] : sc.entries())
      if (key[0] == k) res -= c * wedge(theta[key[1]], theta[key[2]]);
    res = res.map(simplify_rational);
    rep.lines.push_back(line("d theta^" + std::to_string(k + 1) + " residual", form_is_zero(res, proto)));
  }
  for (int k = 0; k < 5; ++k)
    rep.lines.push_back(
        line("d d theta^" + std::to_string(k + 1), form_is_zero(d(d(theta[k])), proto)));

  if (m.target == "flat") {
    // Levi-degenerate normal form of the flat representative.
    Form lhs = wedge(d(theta[0]), theta[0]);
    Form rhs = wedge({theta[1], theta[3], theta[0]});
    rep.lines.push_back(line("d w1 ^ w1 = w2 ^ w4 ^ w1", form_is_zero(lhs - rhs, proto)));
    rep.lines.push_back(line("d w4 ^ w1 ^ w4 != 0",
                             form_is_zero(wedge({d(theta[3]), theta[0], theta[3]}), proto), false));
  }
  for (const auto& l : rep.lines) rep.pass = rep.pass && l.pass;
  return rep;
}

ImplicitCheck check_iiib_implicit(const Q& bq, int samples, std::uint64_t seed) {
  Expr b(bq);
  Expr x = var("x"), y = var("y"), xb = var("xb"), yb = var("yb"), zb = var("zb");
  Expr X = x + xb, Y = y + yb;
  Expr Z = exp(b * atan(Y / X)) * sqrt(X * X + Y * Y) - zb;
  Expr zx = diff(Z, "x"), zy = diff(Z, "y");
  Expr zxx = diff(zx, "x"), zxxx = diff(zxx, "x");
  long double bv = bq.get_d();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<long double> U(0.2L, 2.0L), XX(0.5L, 2.0L), C(-1.0L, 1.0L);
  ImplicitCheck out;
  for (int i = 0; i < samples; ++i) {
    long double u = U(rng), Xv = XX(rng), xbv = C(rng), ybv = C(rng), zbv = C(rng);
    EvaluationPoint pt{{"x", Xv - xbv}, {"xb", xbv}, {"y", u * Xv - ybv}, {"yb", ybv}, {"zb", zbv}};
    long double p = evaluate_ext(zx, pt), f = evaluate_ext(zy, pt);
    long double r = evaluate_ext(zxx, pt), h3 = evaluate_ext(zxxx, pt);
    long double ef = (p * p + f * f) * std::exp(2 * bv * std::atan((bv * p - f) / (p + bv * f)));
    out.worst_f = std::max<double>(out.worst_f, std::fabs(ef - (1 + bv * bv)) / (1 + bv * bv));
    long double h = ((bv * bv - 3) * p - 4 * bv * f) / ((f - bv * p) * (f - bv * p));
    long double eh = h3 - h * r * r;
    out.worst_h = std::max<double>(out.worst_h, std::fabs(eh) / (std::fabs(h3) + std::fabs(h * r * r) + 1));
    ++out.samples;
  }
  return out;
}

}  // namespace paracr
