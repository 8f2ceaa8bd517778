#include "suite.hpp"

#include <cmath>
#include <future>
#include <random>

#include "paracr/cartan.hpp"
#include "paracr/pairfile.hpp"
#include "paracr/parser.hpp"
#include "paracr/poly.hpp"
#include "paracr/symmetry.hpp"

namespace paracr::cli {

namespace {

Check flag(std::string name, bool pass, std::string detail = "") {
  Check c;
  c.name = std::move(name);
  c.pass = pass;
  c.path = "structural";
  c.detail = std::move(detail);
  return c;
}

Check cert(std::string name, const ZeroCertificate& z, double tol, bool expect_zero = true) {
  Check c;
  c.name = std::move(name);
  c.pass = z.zero == expect_zero;
  c.path = to_string(z.path);
  c.residual = z.path == ZeroPath::Exact ? 0.0 : z.worst;
  c.tolerance = tol;
  c.samples = z.samples;
  return c;
}

Check numeric(std::string name, double residual, double tol, int samples) {
  Check c;
  c.name = std::move(name);
  c.pass = residual < tol;
  c.path = "numeric";
  c.residual = residual;
  c.tolerance = tol;
  c.samples = samples;
  return c;
}

bool exact_zero(const Expr& e) {
  RationalForm r = normalize_rational(e);
  return r.exact && r.value.is_zero();
}

bool exact_equal(const Expr& a, const Expr& b) { return exact_zero(a - b); }

void absorb(Criterion& c, const CartanReport& r, const std::string& prefix, double tol) {
  for (const auto& l : r.lines) {
    Check k = l.cert.samples == 0 ? flag(prefix + l.name, l.pass, l.detail) : cert(prefix + l.name, l.cert, tol);
    k.pass = l.pass;
    c.checks.push_back(k);
  }
}

Criterion integrability(const ZeroTestProtocol& proto) {
  Criterion c{1, "integrability", {}};
  auto exact_case = [&](const std::string& id, std::optional<Q> b) {
    PdePair p = model_pair(model(id), b);
    std::string name = id + (b ? " b=" + to_string(*b) : "");
    c.checks.push_back(flag(name + " D^3F - Delta H = 0 (exact)", exact_zero(integrability_residual(p))));
  };
  exact_case("flat", std::nullopt);
  exact_case("ii", std::nullopt);
  for (Q b : {Q(5, 4), Q(3, 2), Q(7, 4)}) exact_case("iiia", b);
  for (Q b : {Q(1), Q(3)}) {
    ImplicitCheck ic = check_iiib_implicit(b, 100, proto.seed);
    c.checks.push_back(numeric("iiib b=" + to_string(b) + " implicit f, h residuals",
                               std::max(ic.worst_f, ic.worst_h), 1e-9, ic.samples));
    PdePair p = model_pair(model("iiib"), b);
    c.checks.push_back(cert("iiib b=" + to_string(b) + " theta-chart integrability",
                            is_identically_zero(integrability_residual(p), p.protocol(proto)), proto.tol));
  }
  PdePair neg(parse_expression("p^2/4"), parse_expression("r"));
  c.checks.push_back(cert("negative control F=p^2/4, H=r", is_identically_zero(integrability_residual(neg), neg.protocol(proto)),
                          proto.tol, false));
  return c;
}

Criterion invariant_values(const ZeroTestProtocol& proto) {
  Criterion c{2, "invariant values", {}};
  Expr zero(0), r = var("r");
  InvariantBundle f = invariants(model_pair(model("flat"), std::nullopt), proto);
  c.checks.push_back(flag("flat I1 = I2 = I3 = 0", exact_zero(f.I1) && exact_zero(f.I2) && exact_zero(f.I3)));
  InvariantBundle ii = invariants(model_pair(model("ii"), std::nullopt), proto);
  c.checks.push_back(flag("ii I3 = 2r", exact_equal(ii.I3, 2 * r), to_string(ii.I3)));
  c.checks.push_back(flag("ii I1 = I2 = 0", exact_zero(ii.I1) && exact_zero(ii.I2)));
  InvariantBundle a = invariants(model_pair(model("iiia"), Q(3, 2)), proto);
  c.checks.push_back(flag("iiia b=3/2 I3 = 0", exact_zero(a.I3)));
  Expr i2p1 = simplify_rational(subs(a.I2, {{"p", Expr(1)}}));
  c.checks.push_back(flag("iiia b=3/2 I2(p=1) = -5/54", i2p1 == num(-5, 54), to_string(i2p1)));
  for (const auto& m : catalog()) {
    PdePair p = model_pair(m, std::nullopt);
    ZeroTestProtocol pp = p.protocol(proto);
    auto x = check_cross_relations(invariants(p, proto), pp);
    const char* names[] = {"A = 27 I1", "B = 27 I2", "C = 3 I3"};
    for (int k = 0; k < 3; ++k) c.checks.push_back(cert(m.id + " " + names[k], x[k], proto.tol));
  }
  return c;
}

Criterion classification(const ZeroTestProtocol& proto) {
  Criterion c{3, "classification", {}};
  const std::map<std::string, Branch> expected = {
      {"flat", Branch::Flat}, {"ii", Branch::NonflatI3}, {"iiia", Branch::NonflatI2}, {"iiib", Branch::NonflatI2}};
  for (const auto& m : catalog()) {
    BranchLabel l = classify(model_pair(m, std::nullopt), proto);
    c.checks.push_back(flag(m.id + " -> " + to_string(expected.at(m.id)), l.branch == expected.at(m.id),
                            to_string(l.branch)));
    c.checks.push_back(flag(m.id + " eps = -1", l.eps == -1, std::to_string(l.eps)));
  }
  return c;
}

Criterion realization(const ZeroTestProtocol& base) {
  Criterion c{4, "realization", {}};
  ZeroTestProtocol proto = base;
  proto.samples = std::max(base.samples, 50);
  for (auto [id, b] : std::vector<std::pair<std::string, std::optional<Q>>>{
           {"ii", std::nullopt}, {"iiia", Q(3, 2)}, {"iiib", Q(3)}}) {
    RealizationReport rep = verify_realization(model(id), b, 0, proto);
    for (const auto& l : rep.lines) {
      Check k = l.cert.samples == 0 && l.cert.path == ZeroPath::Numeric ? flag(id + " " + l.name, l.pass)
                                                                          : cert(id + " " + l.name, l.cert, proto.tol);
      k.pass = l.pass;
      c.checks.push_back(k);
    }
  }
  return c;
}

Criterion jacobi(const ZeroTestProtocol& proto) {
  Criterion c{5, "Jacobi identity", {}};
  for (int e : {1, -1}) {
    JacobiResult h1 = jacobi_check(homo1(Expr(e)), proto);
    c.checks.push_back(flag("homo1 eps=" + std::to_string(e), h1.ok));
    JacobiResult h2 = jacobi_check(homo2(Expr(e), var("s")), proto);
    c.checks.push_back(flag("homo2 eps=" + std::to_string(e) + ", s symbolic", h2.ok));
  }
  return c;
}

Criterion s_ranges(const ZeroTestProtocol&) {
  Criterion c{6, "s(b) ranges", {}};
  long double bound = -3.0L * std::pow(2.0L, -5.0L / 3.0L);
  c.checks.push_back(numeric("s_iiia(1) = -3*2^(-5/3)", std::fabs(s_of_b("iiia", 1).s - bound), 1e-12, 1));
  bool ok = true;
  for (int k = 1; k <= 100; ++k) ok = ok && s_of_b("iiia", 1 + k / 101.0L).s <= bound;
  c.checks.push_back(flag("s_iiia <= -3*2^(-5/3) on (1,2)", ok));
  ok = true;
  for (int k = 1; k <= 100; ++k) ok = ok && s_of_b("iiib", k / 10.0L).s > bound;
  c.checks.push_back(flag("s_iiib > -3*2^(-5/3) on (0,10]", ok));
  c.checks.push_back(numeric("s_iiib(sqrt 3) = 0", std::fabs(s_of_b("iiib", std::sqrt(3.0L)).s), 1e-12, 1));
  return c;
}

Criterion flatness(const ZeroTestProtocol& base) {
  Criterion c{7, "so(3,2) flatness", {}};
  ZeroTestProtocol proto = base;
  proto.samples = std::max(base.samples, 20);
  LiftedForms f = lifted_forms();
  ConnectionMatrix C = connection(f);
  absorb(c, verify_flatness(C, proto), "d omega + omega^omega ", proto.tol);
  absorb(c, verify_edsf(f, proto), "edsf ", proto.tol);
  absorb(c, verify_gauge_relation(f, 20, 1e-8, proto.seed), "gauge ", 1e-8);
  absorb(c, verify_identity_section(f), "identity section ", proto.tol);
  return c;
}

Criterion symmetries(const ZeroTestProtocol& proto) {
  Criterion c{8, "symmetries", {}};
  for (auto [id, b] : std::vector<std::pair<std::string, std::optional<Q>>>{
           {"flat", std::nullopt}, {"ii", std::nullopt}, {"iiia", Q(3, 2)}}) {
    GeneratorSet g = generator_set(model(id), b);
    GeneratorReport gr = verify_generator_catalog(g, proto);
    int passed = 0;
    for (const auto& v : gr.verdicts) passed += v.symmetry && v.contact;
    c.checks.push_back(flag(id + " generators pass all five conditions", gr.pass,
                            std::to_string(passed) + "/" + std::to_string(gr.verdicts.size())));
    CommutatorResult ct = commutator_table(g, proto);
    c.checks.push_back(flag(id + " commutator table matches", ct.matches,
                            std::to_string(ct.mismatches.size()) + " mismatches"));
    AlgebraReport ar = algebra_analysis(ct.table);
    c.checks.push_back(flag(id + " Jacobi on computed table", ar.jacobi));
    if (id == "flat") {
      bool perfect = ar.derived_series.size() == 1 && ar.derived_series[0] == 10;
      c.checks.push_back(flag("flat derived algebra has dimension 10", perfect));
      c.checks.push_back(flag("flat not solvable", !ar.solvable));
    } else {
      c.checks.push_back(flag(id + " solvable", ar.solvable));
      c.checks.push_back(flag(id + " span{X3,X4,X5} abelian ideal", ar.ideal && ar.abelian));
    }
  }
  PdePair flat = model_pair(model("flat"), std::nullopt);
  DeterminingResult dr = solve_determining_equations(flat, 2, proto);
  GeneratorSet g = generator_set(model("flat"), std::nullopt);
  int contained = 0;
  for (const auto& X : g.fields) contained += in_span(dr.basis, X, proto.seed);
  c.checks.push_back(flag("degree-2 determining kernel contains X1..X10", contained == 10 && dr.verified,
                          "kernel dimension " + std::to_string(dr.basis.size())));
  return c;
}

// Random polynomial in x, y, z with small coefficients.
Expr random_poly(std::mt19937_64& rng, int terms) {
  std::uniform_int_distribution<int> coef(-5, 5), ex(0, 2);
  std::vector<Expr> t;
  for (int i = 0; i < terms; ++i) {
    int c = coef(rng);
    if (c == 0) c = 1;
    t.push_back(Expr(c) * pow(var("x"), Q(ex(rng))) * pow(var("y"), Q(ex(rng))) * pow(var("z"), Q(ex(rng))));
  }
  return add(t);
}

Criterion engine(const ZeroTestProtocol& proto) {
  Criterion c{9, "engine properties", {}};

  // d d = 0 on every constructed form.
  bool dd = true;
  int forms = 0;
  for (const auto& m : catalog()) {
    PdePair p = model_pair(m, std::nullopt);
    ZeroTestProtocol pp = p.protocol(proto);
    CoframeSet ic = initial_coframe(p);
    for (const auto& w : ic.forms()) {
      dd = dd && form_is_zero(d(d(w)), pp).zero;
      ++forms;
    }
    CoframeSet mc = model_coframe(m, std::nullopt);
    auto S = model_S(m, std::nullopt, -1);
    ZeroTestProtocol mp = model_protocol(m, proto);
    for (int k = 0; k < 5; ++k) {
      Form t(mc.chart(), 1);
      for (int v = 0; v < 5; ++v)
        if (!S[k][v].is_zero()) t += S[k][v] * mc[v];
      dd = dd && form_is_zero(d(d(t)), mp).zero;
      ++forms;
    }
  }
  CartanReport cd = verify_dd(lifted_forms(), proto);
  dd = dd && cd.pass;
  forms += static_cast<int>(cd.lines.size());
  c.checks.push_back(flag("d d = 0 on constructed forms", dd, std::to_string(forms) + " forms"));

  // Exact and probabilistic zero tests agree.
  std::mt19937_64 rng(proto.seed);
  int agree = 0;
  ZeroTestProtocol numeric_only = proto;
  numeric_only.exact = false;
  for (int i = 0; i < 200; ++i) {
    Expr a = random_poly(rng, 3), b = random_poly(rng, 3), e = random_poly(rng, 2);
    Expr lhs = (a + b) * (a - b) / (e * e + 1);
    Expr rhs = (a * a - b * b) / (e * e + 1);
    if (i % 2) rhs = rhs + random_poly(rng, 1) / (e * e + 2);
    Expr diffe = lhs - rhs;
    bool ex = exact_zero(diffe);
    bool pr = is_identically_zero(diffe, numeric_only).zero;
    agree += (ex == pr) && (ex == (i % 2 == 0));
  }
  c.checks.push_back(flag("exact and probabilistic zero tests agree", agree == 200, std::to_string(agree) + "/200"));

  // Differentiation against central differences.
  const char* samples[] = {"exp(x*y)*sin(x) + x^3", "arctan(x/(1 + y^2))", "log(1 + x^2)*cos(y*x)",
                           "sqrt(1 + x^2 + y^2)/(2 + sin(x))", "x^(3/2)*exp(-x)", "(x^2 + y)^(-2/3)"};
  double worst = 0;
  int count = 0;
  std::uniform_real_distribution<double> U(0.5, 2.0);
  for (const char* s : samples) {
    Expr f = parse_expression(s), fx = diff(f, "x");
    for (int k = 0; k < 20; ++k) {
      long double x = U(rng), y = U(rng), h = 1e-5L;
      long double num_d = (evaluate_ext(f, {{"x", x + h}, {"y", y}}) - evaluate_ext(f, {{"x", x - h}, {"y", y}})) / (2 * h);
      long double sym = evaluate_ext(fx, {{"x", x}, {"y", y}});
      worst = std::max(worst, static_cast<double>(std::fabs(num_d - sym) / (std::fabs(sym) + 1e-12L)));
      ++count;
    }
  }
  c.checks.push_back(numeric("derivatives match central differences", worst, 1e-6, count));
  return c;
}

}  // namespace

std::vector<Criterion> run_suite(const ZeroTestProtocol& proto) {
  using Fn = Criterion (*)(const ZeroTestProtocol&);
  const Fn fns[] = {integrability, invariant_values, classification, realization, jacobi,
                    s_ranges,      flatness,         symmetries,     engine};
  std::vector<std::future<Criterion>> jobs;
  for (Fn f : fns)
    jobs.push_back(std::async(std::launch::async, [f, &proto] {
      try {
        return f(proto);
      } catch (const std::exception& e) {
        Criterion c;
        c.title = "criterion";
        c.checks.push_back(flag("exception", false, e.what()));
        return c;
      }
    }));
  std::vector<Criterion> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.push_back(jobs[i].get());
    out.back().id = static_cast<int>(i) + 1;
  }
  return out;
}

}  // namespace paracr::cli
