#include "paracr/cartan.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace paracr {

namespace {

const std::vector<std::string> kFiber = {"lambda", "phi", "sigma", "sigmabar", "u"};

Form one(const std::map<std::string, Expr>& c) {
  const Chart& ch = bundle_chart();
  std::vector<Expr> v(ch.dim(), Expr(0));
  for (const auto& [k, e] : c) v[ch.index(k)] = e;
  return Form::one_form(ch, v);
}

Form dc(const std::string& v) { return Form::coord(bundle_chart(), v); }

ResidualLine zero_line(std::string name, const Form& f, const ZeroTestProtocol& proto) {
  ResidualLine l;
  l.name = std::move(name);
  l.cert = form_is_zero(f, proto);
  l.pass = l.cert.zero;
  return l;
}

EvaluationPoint sample(const SampleBox& box, std::mt19937_64& rng) {
  std::set<std::string> vars(bundle_chart().coords().begin(), bundle_chart().coords().end());
  return random_point(vars, box, rng);
}

using MatL = Eigen::Matrix<long double, 5, 5>;

}  // namespace

const Chart& bundle_chart() {
  static const Chart c({"x", "y", "z", "p", "r", "lambda", "phi", "sigma", "sigmabar", "u"});
  return c;
}

SampleBox bundle_box() {
  SampleBox b;
  b.set("x", -1, 1).set("y", -1, 1).set("z", -1, 1).set("p", 0.5, 2).set("r", 0.5, 2);
  b.set("lambda", 0.5, 2).set("phi", -1, 1).set("sigma", -1, 1).set("sigmabar", -1, 1).set("u", -1, 1);
  return b;
}

ZeroTestProtocol bundle_protocol(const ZeroTestProtocol& base) {
  ZeroTestProtocol p = base;
  SampleBox b = bundle_box();
  for (const auto& [v, rg] : base.box.ranges) b.ranges[v] = rg;
  p.box = b;
  return p;
}

LiftedForms lifted_forms() {
  Expr p = var("p"), r = var("r"), L = var("lambda"), f = var("phi"), s = var("sigma"),
       sb = var("sigmabar"), u = var("u");
  Expr h = num(1, 2);
  Expr ef = exp(f), emf = exp(-f), e2f = exp(2 * f), em2f = exp(-2 * f);
  Expr L2 = L * L, L3 = L2 * L, L4 = L2 * L2;

  LiftedForms out;
  auto& w = out.omega;
  w[0] = one({{"z", Expr(-1)}, {"x", p}, {"y", p * p / 4}});
  w[1] = one({{"p", Expr(1)}, {"x", -r}, {"y", -p * r / 2}});
  w[2] = one({{"r", Expr(-1)}, {"y", r * r / 2}});
  w[3] = one({{"x", Expr(1)}, {"y", p / 2}});
  w[4] = one({{"y", -h}});

  const Expr M[5][5] = {
      {L2, 0, 0, 0, 0},
      {s, L * ef, 0, 0, 0},
      {s * s / (2 * L2), s * ef / L, e2f, 0, 0},
      {sb, 0, 0, L * emf, 0},
      {-sb * sb / (2 * L2), 0, 0, -sb * emf / L, em2f}};
  for (int i = 0; i < 5; ++i) {
    Form t(bundle_chart(), 1);
    for (int j = 0; j < 5; ++j)
      if (!M[i][j].is_zero()) t += M[i][j] * w[j];
    out.theta[i] = t;
  }

  Form dL = dc("lambda"), df = dc("phi"), ds = dc("sigma"), dsb = dc("sigmabar"), du = dc("u");
  auto& O = out.Omega;
  O[0] = (2 / L) * dL - u * L2 * w[0] - sb * ef / L * w[1] + s * emf / L * w[3];
  O[1] = -df + s * sb / (2 * L2) * w[0] + sb * ef / (2 * L) * w[1] + s * emf / (2 * L) * w[3] + r * w[4];
  O[2] = (1 / L2) * ds - s / L2 * (df + (1 / L) * dL) - s * u / 2 * w[0] -
         ef * (s * sb + L4 * u) / (2 * L3) * w[1] - sb * e2f / L2 * w[2] + emf * s * s / (2 * L3) * w[3] +
         s * r / L2 * w[4];
  O[3] = (1 / L2) * dsb + sb / L2 * (df - (1 / L) * dL) - sb * u / 2 * w[0] - sb * sb * ef / (2 * L3) * w[1] +
         emf * (s * sb - L4 * u) / (2 * L3) * w[3] - em2f * (s + e2f * sb * r) / L2 * w[4];
  O[4] = -du - (2 * u / L) * dL + (2 * s * sb / L4) * df + (s / L4) * dsb - (sb / L4) * ds +
         L2 * u * u / 2 * w[0] + sb * ef * u / L * w[1] + e2f * sb * sb / L4 * w[2] - emf * s * u / L * w[3] -
         s * em2f * (s + 2 * e2f * sb * r) / L4 * w[4];
  return out;
}

ConnectionMatrix connection(const LiftedForms& f) {
  const auto& t = f.theta;
  const auto& O = f.Omega;
  Expr h = num(1, 2);
  Form Z(bundle_chart(), 1);
  return {{{h * O[0] - O[1], -h * O[4], O[3], t[4], Z},
           {t[0], -h * O[0] - O[1], t[3], Z, t[4]},
           {t[1], -O[2], Z, t[3], -O[3]},
           {t[2], Z, -O[2], h * O[0] + O[1], -h * O[4]},
           {Z, t[2], -t[1], t[0], -h * O[0] + O[1]}}};
}

ConnectionMatrix base_connection(const LiftedForms& f) {
  const auto& w = f.omega;
  Expr r = var("r");
  Form Z(bundle_chart(), 1);
  return {{{-r * w[4], Z, Z, w[4], Z},
           {w[0], -r * w[4], w[3], Z, w[4]},
           {w[1], Z, Z, w[3], Z},
           {w[2], Z, Z, r * w[4], Z},
           {Z, w[2], -w[1], w[0], r * w[4]}}};
}

std::array<std::array<Expr, 5>, 5> gauge_matrix() {
  Expr L = var("lambda"), f = var("phi"), s = var("sigma"), sb = var("sigmabar"), u = var("u");
  Expr ef = exp(f), emf = exp(-f), L2 = L * L, L3 = L2 * L, L4 = L2 * L2;
  return {{{emf / L, -emf * (s * sb + L4 * u) / (2 * L3), -sb / L2, 0, -ef * sb * sb / (2 * L3)},
           {0, L * emf, 0, 0, 0},
           {0, s * emf / L, 1, 0, sb * ef / L},
           {0, s * s * emf / (2 * L3), s / L2, ef / L, ef * (s * sb - L4 * u) / (2 * L3)},
           {0, 0, 0, 0, L * ef}}};
}

CartanReport verify_edsf(const LiftedForms& f, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = bundle_protocol(base);
  const auto& [t1, t2, t3, t4, t5] = f.theta;
  const auto& [O1, O2, O3, O4, O5] = f.Omega;
  Expr h = num(1, 2);
  struct Eq {
    const char* name;
    const Form& lhs;
    Form rhs;
  };
  std::vector<Eq> eqs = {
      {"d theta1", t1, wedge(t2, t4) - wedge(t1, O1)},
      {"d theta2", t2, wedge(t3, t4) + wedge(t2, O2 - h * O1) - wedge(t1, O3)},
      {"d theta3", t3, 2 * wedge(t3, O2) - wedge(t2, O3)},
      {"d theta4", t4, -wedge(t2, t5) - wedge(t4, h * O1 + O2) - wedge(t1, O4)},
      {"d theta5", t5, -2 * wedge(t5, O2) + wedge(t4, O4)},
      {"d Omega1", O1, -wedge(t4, O3) + wedge(t2, O4) - wedge(t1, O5)},
      {"d Omega2", O2, -wedge(t3, t5) - h * wedge(t4, O3) - h * wedge(t2, O4)},
      {"d Omega3", O3, -wedge(h * O1 + O2, O3) + wedge(t3, O4) - h * wedge(t2, O5)},
      {"d Omega4", O4, wedge(O2 - h * O1, O4) + wedge(t5, O3) - h * wedge(t4, O5)},
      {"d Omega5", O5, -wedge(O1, O5) + 2 * wedge(O3, O4)},
  };
  CartanReport rep;
  for (const auto& e : eqs) rep.add(zero_line(e.name, d(e.lhs) - e.rhs, proto));
  return rep;
}

CartanReport verify_flatness(const ConnectionMatrix& c, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = bundle_protocol(base);
  CartanReport rep;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      Form R = d(c[i][j]);
      for (int k = 0; k < 5; ++k)
        if (!c[i][k].is_zero() && !c[k][j].is_zero()) R += wedge(c[i][k], c[k][j]);
      rep.add(zero_line("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")", R, proto));
    }
  return rep;
}

CartanReport verify_gauge_relation(const LiftedForms& f, int points, double tol, std::uint64_t seed) {
  CartanReport rep;
  auto U = gauge_matrix();
  ConnectionMatrix C = connection(f), B = base_connection(f);
  const Chart& ch = bundle_chart();
  int n = ch.dim();

  ResidualLine pattern;
  pattern.name = "U block-zero layout";
  static const int zeros[][2] = {{0, 3}, {1, 0}, {1, 2}, {1, 3}, {1, 4}, {2, 0}, {2, 3},
                                 {3, 0}, {4, 0}, {4, 1}, {4, 2}, {4, 3}};
  pattern.pass = true;
  for (const auto& z : zeros) pattern.pass = pattern.pass && U[z[0]][z[1]].is_zero();
  rep.add(pattern);

  ResidualLine ident;
  ident.name = "U = id on the identity section";
  ident.pass = true;
  std::map<std::string, Expr> idsec = {{"lambda", Expr(1)}, {"phi", Expr(0)}, {"sigma", Expr(0)},
                                       {"sigmabar", Expr(0)}, {"u", Expr(0)}};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      ident.pass = ident.pass && simplify_rational(subs(U[i][j], idsec)) == Expr(i == j ? 1 : 0);
  rep.add(ident);

  // dU along each chart direction.
  std::vector<std::array<std::array<Expr, 5>, 5>> dU(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) dU[a][i][j] = diff(U[i][j], ch.name(a));

  ResidualLine g;
  g.name = "omega = U B U^-1 - dU U^-1";
  std::mt19937_64 rng(seed);
  SampleBox box = bundle_box();
  double worst = 0;
  for (int s = 0; s < points; ++s) {
    EvaluationPoint pt = sample(box, rng);
    MatL Um;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) Um(i, j) = evaluate_ext(U[i][j], pt);
    MatL Ui = Um.inverse();
    for (int a = 0; a < n; ++a) {
      MatL Bm, Cm, dUm;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          Bm(i, j) = evaluate_ext(B[i][j].coeff(a), pt);
          Cm(i, j) = evaluate_ext(C[i][j].coeff(a), pt);
          dUm(i, j) = evaluate_ext(dU[a][i][j], pt);
        }
      MatL R = Um * Bm * Ui - dUm * Ui - Cm;
      long double scale = 1 + Cm.cwiseAbs().maxCoeff();
      worst = std::max(worst, static_cast<double>(R.cwiseAbs().maxCoeff() / scale));
    }
  }
  g.cert.samples = points;
  g.cert.worst = worst;
  g.cert.zero = worst < tol;
  g.pass = g.cert.zero;
  rep.add(g);
  return rep;
}

CartanReport verify_identity_section(const LiftedForms& f) {
  std::map<std::string, Expr> idsec = {{"lambda", Expr(1)}, {"phi", Expr(0)}, {"sigma", Expr(0)},
                                       {"sigmabar", Expr(0)}, {"u", Expr(0)}};
  const Chart& ch = bundle_chart();
  auto restrict = [&](const Form& a) {
    Form out(ch, 1);
    for (int i = 0; i < 5; ++i) {
      Expr c = simplify_rational(subs(a.coeff(i), idsec));
      if (!c.is_zero()) out.add_term({i}, c);
    }
    return out;
  };
  auto exact_line = [&](std::string name, const Form& a, const Form& expected) {
    ResidualLine l;
    l.name = std::move(name);
    Form diff = (restrict(a) - expected).map(simplify_rational);
    l.pass = diff.is_zero();
    l.cert.zero = l.pass;
    l.cert.path = ZeroPath::Exact;
    if (!l.pass) l.detail = diff.to_string();
    return l;
  };
  CartanReport rep;
  Form Z(ch, 1);
  for (int k = 0; k < 5; ++k) rep.add(exact_line("theta" + std::to_string(k + 1) + " -> omega", f.theta[k], f.omega[k]));
  for (int k = 0; k < 5; ++k)
    rep.add(exact_line("Omega" + std::to_string(k + 1) + " -> varpi", f.Omega[k], k == 1 ? var("r") * f.omega[4] : Z));
  return rep;
}

CartanReport verify_dd(const LiftedForms& f, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = bundle_protocol(base);
  CartanReport rep;
  for (int k = 0; k < 5; ++k) rep.add(zero_line("d d theta" + std::to_string(k + 1), d(d(f.theta[k])), proto));
  for (int k = 0; k < 5; ++k) rep.add(zero_line("d d Omega" + std::to_string(k + 1), d(d(f.Omega[k])), proto));
  return rep;
}

CartanReport verify_entry_relations(const ConnectionMatrix& c, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = bundle_protocol(base);
  CartanReport rep;
  rep.add(zero_line("(1,1) + (5,5)", c[0][0] + c[4][4], proto));
  rep.add(zero_line("(2,2) + (4,4)", c[1][1] + c[3][3], proto));
  rep.add(zero_line("(3,3)", c[2][2], proto));
  Form tr = c[0][0] + c[1][1] + c[2][2] + c[3][3] + c[4][4];
  rep.add(zero_line("trace", tr, proto));
  return rep;
}

CartanReport verify_independence(const LiftedForms& f, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = bundle_protocol(base);
  std::vector<Form> all(f.theta.begin(), f.theta.end());
  all.insert(all.end(), f.Omega.begin(), f.Omega.end());
  int n = bundle_chart().dim();
  std::mt19937_64 rng(proto.seed);
  double smallest = INFINITY;
  for (int s = 0; s < proto.samples; ++s) {
    EvaluationPoint pt = sample(proto.box, rng);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = evaluate_double(all[i].coeff(j), pt);
    smallest = std::min(smallest, std::fabs(M.determinant()));
  }
  ResidualLine l;
  l.name = "ten lifted forms independent";
  l.pass = smallest > 1e-12;
  l.cert.samples = proto.samples;
  l.cert.worst_abs = smallest;
  l.detail = "min |det| = " + std::to_string(smallest);
  CartanReport rep;
  rep.add(l);
  return rep;
}

}  // namespace paracr
