#include "paracr/paracr.hpp"

#include <random>

#include "paracr/poly.hpp"

namespace paracr {

namespace {

Expr simp(const Expr& e) { return simplify_rational(e); }

}  // namespace

PdePair::PdePair(Expr F, Expr H, std::vector<Param> params, SampleBox box,
                 std::optional<FiberChart> fiber)
    : F_(std::move(F)), H_(std::move(H)), params_(std::move(params)), box_(std::move(box)),
      fiber_(std::move(fiber)) {
  std::string pc = fiber_ ? fiber_->coord : "p";
  chart_ = Chart({"x", "y", "z", pc, "r"});
}

Expr PdePair::p() const { return fiber_ ? fiber_->p_of : var("p"); }

Expr PdePair::dp(const Expr& e) const {
  if (!fiber_) return diff(e, "p");
  return diff(e, fiber_->coord) / diff(fiber_->p_of, fiber_->coord);
}

Expr PdePair::D(const Expr& e) const {
  return diff(e, "x") + p() * diff(e, "z") + var("r") * dp(e) + H_ * diff(e, "r");
}

Expr PdePair::Delta(const Expr& e) const {
  Expr DF = D(F_);
  return diff(e, "y") + F_ * diff(e, "z") + DF * dp(e) + D(DF) * diff(e, "r");
}

ZeroTestProtocol PdePair::protocol(ZeroTestProtocol base) const {
  SampleBox merged = box_;
  for (const auto& prm : params_) {
    if (prm.value) continue;
    long double m = (prm.hi - prm.lo) * 0.05L;
    if (!merged.ranges.count(prm.name)) merged.set(prm.name, prm.lo + m, prm.hi - m);
  }
  for (const auto& [v, rg] : base.box.ranges) merged.ranges[v] = rg;
  base.box = merged;
  return base;
}

PdePair specialize(const PdePair& pair) {
  std::map<std::string, Expr> b;
  std::vector<Param> rest;
  for (const auto& prm : pair.params()) {
    if (prm.value)
      b[prm.name] = Expr(*prm.value);
    else
      rest.push_back(prm);
  }
  if (b.empty()) return pair;
  std::optional<FiberChart> fc = pair.fiber();
  if (fc) fc->p_of = subs(fc->p_of, b);
  return PdePair(subs(pair.F(), b), subs(pair.H(), b), rest, pair.box(), fc);
}

Expr integrability_residual(const PdePair& pair) {
  const Expr& F = pair.F();
  Expr D3F = pair.D(pair.D(pair.D(F)));
  return D3F - pair.Delta(pair.H());
}

AdmissibilityReport check_admissibility(const PdePair& pair, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = pair.protocol(base);
  AdmissibilityReport rep;
  rep.fr_zero = is_identically_zero(diff(pair.F(), "r"), proto);
  rep.fr_ok = rep.fr_zero.zero;
  rep.fpp_zero = is_identically_zero(pair.dp(pair.dp(pair.F())), proto);
  rep.fpp_ok = !rep.fpp_zero.zero;
  rep.residual = simp(integrability_residual(pair));
  rep.integrable = is_identically_zero(rep.residual, proto);
  rep.integrable_ok = rep.integrable.zero;
  return rep;
}

CoframeSet initial_coframe(const PdePair& pair) {
  const Chart& c = pair.chart();
  Form dx = Form::coord(c, 0), dy = Form::coord(c, 1), dz = Form::coord(c, 2);
  Form dp = d(Form::function(c, pair.p()));
  Form dr = Form::coord(c, 4);
  Expr DF = simp(pair.D(pair.F()));
  Expr D2F = simp(pair.D(DF));
  Form w1 = dz - pair.p() * dx - pair.F() * dy;
  Form w2 = dp - var("r") * dx - DF * dy;
  Form w3 = dr - pair.H() * dx - D2F * dy;
  return CoframeSet(c, {w1, w2, w3, dx, dy});
}

std::vector<Form> initial_structure(const PdePair& pair) {
  CoframeSet cf = initial_coframe(pair);
  const auto& w = cf.forms();
  auto W = [&](int i, int j) { return wedge(w[i - 1], w[j - 1]); };
  const Expr& F = pair.F();
  const Expr& H = pair.H();
  Expr Fz = diff(F, "z"), Fp = pair.dp(F);
  Expr Hz = diff(H, "z"), Hp = pair.dp(H), Hr = diff(H, "r");
  Expr DFp = pair.D(Fp), DFz = pair.D(Fz);
  Form d1 = -Fz * W(1, 5) - W(2, 4) - Fp * W(2, 5);
  Form d2 = -DFz * W(1, 5) - (DFp + Fz) * W(2, 5) - W(3, 4) - Fp * W(3, 5);
  Expr c25 = num(1, 3) * (DFp * Hr - 3 * DFz - pair.Delta(Hr) + pair.D(Hr) * Fp - 3 * Fp * Hp);
  Form d3 = -Hz * W(1, 4) - (pair.D(DFz) + Fp * Hz) * W(1, 5) - Hp * W(2, 4) + c25 * W(2, 5) -
            Hr * W(3, 4) - (2 * DFp + Fz + Fp * Hr) * W(3, 5);
  Form zero2(pair.chart(), 2);
  return {d1, d2, d3, zero2, zero2};
}

InvariantBundle invariants(const PdePair& pair, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = pair.protocol(base);
  const Expr& F = pair.F();
  const Expr& H = pair.H();
  Expr Fp = simp(pair.dp(F));
  Expr Fpp = simp(pair.dp(Fp));
  if (is_identically_zero(Fpp, proto).zero) throw InadmissiblePair("F_pp vanishes identically");
  Expr Fppp = simp(pair.dp(Fpp));
  Expr Fpppp = simp(pair.dp(Fppp));
  Expr Fppppp = simp(pair.dp(Fpppp));
  Expr Fz = diff(F, "z");
  Expr Hz = diff(H, "z"), Hp = simp(pair.dp(H)), Hr = diff(H, "r");
  Expr Hrr = diff(Hr, "r");
  Expr DHr = simp(pair.D(Hr));
  Expr DDHr = simp(pair.D(DHr));
  Expr DHp = simp(pair.D(Hp));

  Expr bracketA = 9 * DDHr - 27 * DHp - 18 * DHr * Hr + 18 * Hp * Hr + 4 * pow(Hr, 3) + 54 * Hz;
  Expr numB = 40 * pow(Fppp, 3) - 45 * Fpp * Fppp * Fpppp + 9 * pow(Fpp, 2) * Fppppp;
  Expr numC = 2 * Fppp + Fpp * Hrr;

  InvariantBundle inv;
  inv.A = simp(num(-1, 2) * bracketA);
  inv.B = simp(numB / (2 * pow(Fpp, 3)));
  inv.C = simp(numC / Fpp);
  inv.I1 = simp(num(-1, 54) * bracketA);
  inv.I2 = simp(numB / (54 * pow(Fpp, 3)));
  inv.I3 = simp(numC / (3 * Fpp));
  auto cd = coframe_derivatives(inv.C, initial_coframe(pair), proto);
  inv.C4 = simp(cd[3]);
  inv.C5 = simp(cd[4]);
  inv.Ct = simp(((pair.D(Fp) + Fz) * inv.C - Fp * inv.C4 + inv.C5) / (2 * Fpp));
  return inv;
}

std::array<ZeroCertificate, 3> check_cross_relations(const InvariantBundle& inv,
                                                      const ZeroTestProtocol& proto) {
  return {is_identically_zero(simp(inv.A - 27 * inv.I1), proto),
          is_identically_zero(simp(inv.B - 27 * inv.I2), proto),
          is_identically_zero(simp(inv.C - 3 * inv.I3), proto)};
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Flat:
      return "Flat";
    case Branch::NonflatI3:
      return "NonflatI3";
    case Branch::NonflatI2:
      return "NonflatI2";
    default:
      return "Inadmissible";
  }
}

int epsilon_on_box(const ZeroTestProtocol& proto, const std::string& rname) {
  auto [lo, hi] = proto.box.range(rname);
  std::mt19937_64 rng(proto.seed);
  std::uniform_real_distribution<long double> dist(lo, hi);
  int pos = 0, neg = 0;
  for (int i = 0; i < proto.samples; ++i) {
    long double r = dist(rng);
    if (r > 0) ++pos;
    if (r < 0) ++neg;
  }
  if (pos && !neg) return -1;
  if (neg && !pos) return 1;
  return 0;
}

BranchLabel classify(const PdePair& pair, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = pair.protocol(base);
  BranchLabel out;
  if (!check_admissibility(pair, proto).admissible()) return out;
  out.inv = invariants(pair, proto);
  out.eps = epsilon_on_box(proto);
  out.i3 = is_identically_zero(out.inv.I3, proto);
  if (!out.i3.zero) {
    out.branch = Branch::NonflatI3;
    return out;
  }
  out.i2 = is_identically_zero(out.inv.I2, proto);
  if (!out.i2.zero) {
    out.branch = Branch::NonflatI2;
    return out;
  }
  out.i1 = is_identically_zero(out.inv.I1, proto);
  if (!out.i1.zero) throw std::logic_error("I3 = I2 = 0 but I1 does not vanish");
  out.branch = Branch::Flat;
  return out;
}

namespace {

Expr dd(const Expr& e, std::initializer_list<const char*> vs) {
  Expr r = e;
  for (const char* v : vs) r = diff(r, v);
  return r;
}

Expr det3(const std::array<std::array<Expr, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

LeviResult levi_matrix(const SolutionManifold& m, const ZeroTestProtocol& proto) {
  const Expr& E = m.expr;
  bool par = m.side == Side::Parameters;
  // Parameters side: Q(x,y,a,b,c), rows x,y and columns a,b, normalizer c.
  // Variables side: P(a,b,x,y,z), rows a,b and columns x,y, normalizer z.
  const char* rows[2] = {par ? "x" : "a", par ? "y" : "b"};
  const char* cols[2] = {par ? "a" : "x", par ? "b" : "y"};
  const char* n = par ? "c" : "z";
  Expr En = diff(E, n);
  if (is_identically_zero(En, proto).zero)
    throw DomainError(std::string("derivative with respect to ") + n + " vanishes identically");
  LeviResult out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr e = (-En * dd(E, {rows[i], cols[j]}) + diff(E, cols[j]) * dd(E, {rows[i], n})) /
               pow(En, 2);
      out.matrix[i][j] = simp(e);
    }
  out.det = simp(out.matrix[0][0] * out.matrix[1][1] - out.matrix[0][1] * out.matrix[1][0]);
  if (!is_identically_zero(out.det, proto).zero) {
    out.rank = 2;
    return out;
  }
  out.rank = 0;
  for (const auto& row : out.matrix)
    for (const auto& e : row)
      if (!is_identically_zero(e, proto).zero) out.rank = 1;
  return out;
}

NondegeneracyResult two_nondegeneracy(const SolutionManifold& m, const ZeroTestProtocol& proto) {
  const Expr& E = m.expr;
  bool par = m.side == Side::Parameters;
  const char* t = par ? "x" : "a";
  std::array<const char*, 3> cols = par ? std::array<const char*, 3>{"a", "b", "c"}
                                        : std::array<const char*, 3>{"x", "y", "z"};
  if (is_identically_zero(diff(E, cols[2]), proto).zero)
    throw DomainError(std::string("derivative with respect to ") + cols[2] + " vanishes identically");
  std::array<std::array<Expr, 3>, 3> M;
  for (int j = 0; j < 3; ++j) {
    M[0][j] = diff(E, cols[j]);
    M[1][j] = diff(M[0][j], t);
    M[2][j] = diff(M[1][j], t);
  }
  NondegeneracyResult out;
  out.det = simp(det3(M));
  out.cert = is_identically_zero(out.det, proto);
  out.nondegenerate = !out.cert.zero;
  return out;
}

}  // namespace paracr
