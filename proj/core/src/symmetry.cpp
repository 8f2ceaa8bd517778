#include "paracr/symmetry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace paracr {

namespace {

using QMatrix = std::vector<std::vector<Q>>;

// Reduced row echelon form in place; returns the pivot columns.
std::vector<int> rref(QMatrix& M, int ncols) {
  std::vector<int> piv;
  int row = 0, nrows = static_cast<int>(M.size());
  for (int col = 0; col < ncols && row < nrows; ++col) {
    int sel = -1;
    for (int r = row; r < nrows; ++r)
      if (M[r][col] != 0) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(M[row], M[sel]);
    Q inv = 1 / M[row][col];
    for (auto& v : M[row]) v *= inv;
    for (int r = 0; r < nrows; ++r) {
      if (r == row || M[r][col] == 0) continue;
      Q f = M[r][col];
      for (std::size_t c = col; c < M[r].size(); ++c) M[r][c] -= f * M[row][c];
    }
    piv.push_back(col);
    ++row;
  }
  M.resize(row);
  return piv;
}

int rank_q(QMatrix M, int ncols) { return static_cast<int>(rref(M, ncols).size()); }

// Random rational points inside the sampling box; the same values as a numeric point.
struct Sampler {
  std::vector<std::string> vars;
  SampleBox box;
  std::mt19937_64 rng;
  static constexpr int kDen = 97;

  Sampler(std::vector<std::string> v, SampleBox b, std::uint64_t seed)
      : vars(std::move(v)), box(std::move(b)), rng(seed) {}

  std::map<std::string, Expr> next(EvaluationPoint* numeric = nullptr) {
    std::map<std::string, Expr> pt;
    for (const auto& v : vars) {
      auto [lo, hi] = box.range(v);
      long a = static_cast<long>(std::ceil(lo * kDen)), b = static_cast<long>(std::floor(hi * kDen));
      long k = 0;
      do k = std::uniform_int_distribution<long>(a, b)(rng);
      while (k == 0 && a != b);
      Q q(k, kDen);
      q.canonicalize();
      pt[v] = Expr(q);
      if (numeric) (*numeric)[v] = q.get_d();
    }
    return pt;
  }
};

std::optional<Q> exact_value(const Expr& e, const std::map<std::string, Expr>& pt) {
  Expr v = subs(e, pt);
  if (v.is_num()) return v.num();
  v = simplify_rational(v);
  if (v.is_num()) return v.num();
  return std::nullopt;
}

// Nearest rational with a small denominator; nullopt when nothing is close.
std::optional<Q> rationalize(long double v, long double tol = 1e-9L) {
  for (long den = 1; den <= 720; ++den) {
    long double n = std::round(v * den);
    if (std::fabs(n / den - v) < tol * (1 + std::fabs(v))) {
      Q q(static_cast<long>(n), den);
      q.canonicalize();
      return q;
    }
  }
  return std::nullopt;
}

std::vector<std::string> field_vars(const std::vector<VectorField>& fs, const Chart& c) {
  std::set<std::string> s(c.coords().begin(), c.coords().end());
  for (const auto& f : fs)
    for (const auto& e : f.comps())
      for (const auto& v : free_vars(e)) s.insert(v);
  return {s.begin(), s.end()};
}

// Solves sum_k c_k fields[k] = target using samples; exact when the fields are rational.
std::optional<std::vector<Q>> expand(const std::vector<VectorField>& fields, const VectorField& target,
                                     const SampleBox& box, std::uint64_t seed) {
  int k = static_cast<int>(fields.size());
  int dim = target.chart().dim();
  auto vars = field_vars(fields, target.chart());
  Sampler smp(vars, box, seed);
  int points = k / dim + 2;

  QMatrix M;
  bool exact = true;
  for (int p = 0; p < points + 4 && exact; ++p) {
    auto pt = smp.next();
    for (int i = 0; i < dim && exact; ++i) {
      std::vector<Q> row(k + 1);
      for (int j = 0; j < k && exact; ++j) {
        auto v = exact_value(fields[j][i], pt);
        if (!v) exact = false;
        else row[j] = *v;
      }
      auto t = exact_value(target[i], pt);
      if (!t) exact = false;
      else row[k] = *t;
      M.push_back(std::move(row));
    }
    if (exact && p + 1 >= points) {
      QMatrix R = M;
      auto piv = rref(R, k + 1);
      if (!piv.empty() && piv.back() == k) return std::nullopt;  // inconsistent
      if (static_cast<int>(piv.size()) == k) {
        std::vector<Q> c(k);
        for (int r = 0; r < k; ++r) c[piv[r]] = R[r][k];
        return c;
      }
    }
  }
  if (exact) return std::nullopt;

  Sampler num_smp(vars, box, seed);
  int rows = (points + 2) * dim;
  Eigen::MatrixXd A(rows, k);
  Eigen::VectorXd rhs(rows);
  for (int p = 0, r = 0; p < points + 2; ++p) {
    EvaluationPoint pt;
    num_smp.next(&pt);
    for (int i = 0; i < dim; ++i, ++r) {
      for (int j = 0; j < k; ++j) A(r, j) = evaluate_double(fields[j][i], pt);
      rhs(r) = evaluate_double(target[i], pt);
    }
  }
  Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
  if ((A * sol - rhs).norm() > 1e-8 * (1 + rhs.norm())) return std::nullopt;
  std::vector<Q> c(k);
  for (int j = 0; j < k; ++j) {
    auto q = rationalize(sol(j));
    if (!q) return std::nullopt;
    c[j] = *q;
  }
  return c;
}

VectorField combine(const std::vector<VectorField>& fs, const std::vector<Q>& c, const Chart& chart) {
  VectorField out = VectorField::zero(chart);
  for (std::size_t j = 0; j < fs.size(); ++j)
    if (c[j] != 0) out = out + Expr(c[j]) * fs[j];
  return out.map(simplify_rational);
}

bool field_is_zero(const VectorField& X, const ZeroTestProtocol& proto) {
  for (const auto& e : X.comps())
    if (!e.is_zero() && !is_identically_zero(e, proto).zero) return false;
  return true;
}

std::vector<Q> bracket_vec(const BracketTable& t, const std::vector<Q>& u, const std::vector<Q>& v) {
  std::vector<Q> out(t.n);
  for (int a = 0; a < t.n; ++a) {
    if (u[a] == 0) continue;
    for (int b = 0; b < t.n; ++b) {
      if (v[b] == 0 || a == b) continue;
      auto c = t.get(a, b);
      Q f = u[a] * v[b];
      for (int k = 0; k < t.n; ++k) out[k] += f * c[k];
    }
  }
  return out;
}

std::vector<Q> unit(int n, int i) {
  std::vector<Q> e(n);
  e[i] = 1;
  return e;
}

}  // namespace

std::vector<Q> BracketTable::get(int i, int j) const {
  if (i == j) return std::vector<Q>(n);
  bool flip = i > j;
  auto it = c.find({flip ? j : i, flip ? i : j});
  if (it == c.end()) return std::vector<Q>(n);
  if (!flip) return it->second;
  std::vector<Q> neg = it->second;
  for (auto& v : neg) v = -v;
  return neg;
}

SymmetryResiduals symmetry_residuals(const VectorField& X, const PdePair& pair) {
  CoframeSet w = initial_coframe(pair);
  std::array<Form, 5> L;
  for (int k = 0; k < 5; ++k) L[k] = lie_derivative(X, w[k]).map(simplify_rational);
  SymmetryResiduals r;
  r.conditions[0] = wedge(L[0], w[0]);
  r.conditions[1] = wedge({L[1], w[0], w[1], w[2]});
  r.conditions[2] = wedge({L[2], w[0], w[1], w[2]});
  r.conditions[3] = wedge({L[3], w[0], w[3], w[4]});
  r.conditions[4] = wedge({L[4], w[0], w[3], w[4]});
  r.contact[0] = r.conditions[0];
  r.contact[1] = wedge({L[1], w[0], w[1]});
  for (auto& f : r.conditions) f = f.map(simplify_rational);
  for (auto& f : r.contact) f = f.map(simplify_rational);
  return r;
}

SymmetryVerdict check_symmetry(const VectorField& X, const PdePair& pair, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = pair.protocol(base);
  SymmetryResiduals r = symmetry_residuals(X, pair);
  SymmetryVerdict v;
  for (int k = 0; k < 5; ++k) {
    v.conditions[k] = form_is_zero(r.conditions[k], proto);
    if (!v.conditions[k].zero) {
      v.symmetry = false;
      if (!v.first_failure) v.first_failure = k + 1;
    }
  }
  for (int k = 0; k < 2; ++k) {
    v.contact_certs[k] = form_is_zero(r.contact[k], proto);
    v.contact = v.contact && v.contact_certs[k].zero;
  }
  return v;
}

GeneratorSet generator_set(const ModelSpec& m, const std::optional<Q>& b) {
  GeneratorSet g;
  g.id = m.id;
  g.pair = model_pair(m, b);
  const PdePair& P = g.pair;
  std::map<std::string, Expr> bind;
  for (const auto& [k, v] : m.generator_bindings) bind[k] = v;
  std::map<std::string, Expr> vals;
  if (!m.params.empty()) vals[m.params[0].name] = Expr(b ? *b : default_param(m));
  vals["F"] = P.F();
  vals["DF"] = P.D(P.F());
  if (P.fiber()) vals["p"] = P.p();
  Expr dpds = P.fiber() ? diff(P.p(), P.fiber()->coord) : Expr(1);

  auto inst = [&](const Expr& e) { return simplify_rational(subs(subs(e, bind), vals)); };
  for (const auto& row : m.generators) {
    std::vector<Expr> c;
    for (const auto& e : row) c.push_back(inst(e));
    if (P.fiber()) c[3] = simplify_rational(c[3] / dpds);
    g.fields.emplace_back(P.chart(), c);
  }

  int n = static_cast<int>(m.generators.size());
  g.expected.n = n;
  for (const auto& [key, e] : m.table) {
    Expr ie = subs(subs(e, bind), vals);
    std::vector<Q> c(n);
    for (int k = 0; k < n; ++k) {
      Expr ck = simplify_rational(diff(ie, "X" + std::to_string(k + 1)));
      if (!ck.is_num()) throw std::runtime_error("table entry is not numeric after instantiation");
      c[k] = ck.num();
    }
    g.expected.c[key] = c;
  }
  return g;
}

GeneratorReport verify_generator_catalog(const GeneratorSet& g, const ZeroTestProtocol& proto) {
  GeneratorReport rep;
  rep.id = g.id;
  for (const auto& X : g.fields) {
    rep.verdicts.push_back(check_symmetry(X, g.pair, proto));
    rep.pass = rep.pass && rep.verdicts.back().symmetry && rep.verdicts.back().contact;
  }
  // Independence over constants from stacked numeric samples.
  int k = static_cast<int>(g.fields.size()), dim = g.pair.chart().dim();
  int points = k / dim + 3;
  Eigen::MatrixXd A(points * dim, k);
  Sampler smp(field_vars(g.fields, g.pair.chart()), g.pair.protocol(proto).box, proto.seed);
  for (int p = 0; p < points; ++p) {
    EvaluationPoint pt;
    smp.next(&pt);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < k; ++j) A(p * dim + i, j) = evaluate_double(g.fields[j][i], pt);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-10);
  rep.rank = static_cast<int>(lu.rank());
  rep.pass = rep.pass && rep.rank == k;
  return rep;
}

CommutatorResult commutator_table(const GeneratorSet& g, const ZeroTestProtocol& base) {
  ZeroTestProtocol proto = g.pair.protocol(base);
  CommutatorResult out;
  int n = static_cast<int>(g.fields.size());
  out.table.n = n;
  std::uint64_t seed = proto.seed;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      VectorField B = bracket(g.fields[i], g.fields[j]).map(simplify_rational);
      auto c = expand(g.fields, B, proto.box, seed + 31 * i + j);
      if (!c || !field_is_zero(B - combine(g.fields, *c, B.chart()), proto)) {
        out.closed = false;
        out.not_in_span.push_back({i, j});
        continue;
      }
      bool nonzero = false;
      for (const auto& v : *c) nonzero = nonzero || v != 0;
      if (nonzero) out.table.c[{i, j}] = *c;
    }
  if (g.expected.n == n) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (out.table.get(i, j) != g.expected.get(i, j)) out.mismatches.push_back({i, j});
  }
  out.matches = out.closed && out.mismatches.empty();
  return out;
}

AlgebraReport algebra_analysis(const BracketTable& t, const std::vector<int>& ideal) {
  AlgebraReport rep;
  int n = t.n;
  rep.dimension = n;
  for (int i = 0; i < n && rep.jacobi; ++i)
    for (int j = i + 1; j < n && rep.jacobi; ++j)
      for (int k = j + 1; k < n && rep.jacobi; ++k) {
        auto ei = unit(n, i), ej = unit(n, j), ek = unit(n, k);
        auto a = bracket_vec(t, t.get(i, j), ek);
        auto b = bracket_vec(t, t.get(j, k), ei);
        auto c = bracket_vec(t, t.get(k, i), ej);
        for (int m = 0; m < n; ++m)
          if (a[m] + b[m] + c[m] != 0) rep.jacobi = false;
      }

  QMatrix basis;
  for (int i = 0; i < n; ++i) basis.push_back(unit(n, i));
  rep.derived_series.push_back(n);
  while (!basis.empty()) {
    QMatrix next;
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = a + 1; b < basis.size(); ++b) next.push_back(bracket_vec(t, basis[a], basis[b]));
    rref(next, n);
    if (static_cast<int>(next.size()) == rep.derived_series.back()) break;
    rep.derived_series.push_back(static_cast<int>(next.size()));
    basis = std::move(next);
  }
  rep.solvable = rep.derived_series.back() == 0;

  std::set<int> I(ideal.begin(), ideal.end());
  rep.ideal = true;
  rep.abelian = true;
  for (int a : ideal) {
    for (int i = 0; i < n; ++i) {
      auto v = t.get(i, a);
      for (int m = 0; m < n; ++m)
        if (v[m] != 0 && !I.count(m)) rep.ideal = false;
      if (I.count(i))
        for (int m = 0; m < n; ++m)
          if (v[m] != 0) rep.abelian = false;
    }
  }
  return rep;
}

namespace {

void monomials(int nvars, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == nvars) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int e : cur) used += e;
  for (int e = 0; e + used <= degree; ++e) {
    cur.push_back(e);
    monomials(nvars, degree, cur, out);
    cur.pop_back();
  }
}

}  // namespace

namespace {

using PolyMap = std::map<std::vector<int>, Q>;

PolyMap poly_mul(const PolyMap& a, const PolyMap& b) {
  PolyMap r;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      std::vector<int> m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      Q& slot = r[m];
      slot += ca * cb;
      if (slot == 0) r.erase(m);
    }
  return r;
}

// Expansion of a polynomial expression in the chart coordinates; nullopt otherwise.
std::optional<PolyMap> expand_poly(const Expr& e, const Chart& ch) {
  int n = ch.dim();
  switch (e.kind()) {
    case Kind::Num: {
      PolyMap r;
      if (!e.is_zero()) r[std::vector<int>(n, 0)] = e.num();
      return r;
    }
    case Kind::Var: {
      int i = ch.index(e.name());
      if (i < 0) return std::nullopt;
      std::vector<int> m(n, 0);
      m[i] = 1;
      return PolyMap{{m, Q(1)}};
    }
    case Kind::Sum: {
      PolyMap r;
      for (const auto& a : e.args()) {
        auto p = expand_poly(a, ch);
        if (!p) return std::nullopt;
        for (const auto& [m, c] : *p) {
          Q& slot = r[m];
          slot += c;
          if (slot == 0) r.erase(m);
        }
      }
      return r;
    }
    case Kind::Product: {
      PolyMap r{{std::vector<int>(n, 0), Q(1)}};
      for (const auto& a : e.args()) {
        auto p = expand_poly(a, ch);
        if (!p) return std::nullopt;
        r = poly_mul(r, *p);
      }
      return r;
    }
    case Kind::Pow: {
      const Q& ex = e.num();
      if (ex.get_den() != 1 || ex < 0) return std::nullopt;
      auto base = expand_poly(e.arg(), ch);
      if (!base) return std::nullopt;
      PolyMap r{{std::vector<int>(n, 0), Q(1)}};
      for (long k = ex.get_num().get_si(); k > 0; --k) r = poly_mul(r, *base);
      return r;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

DeterminingResult solve_determining_equations(const PdePair& pair, int degree, const ZeroTestProtocol& base) {
  if (degree < 0 || degree > 4) throw std::invalid_argument("degree bound must lie in [0, 4]");
  if (pair.fiber()) throw DomainError("determining equations need a polynomial pair on the jet chart");
  ZeroTestProtocol proto = pair.protocol(base);
  const Chart& ch = pair.chart();
  int dim = ch.dim();

  // Prolongation raises the degree by one in the p and r slots.
  auto slot_degree = [&](int s) { return s < 3 ? degree : degree + 1; };
  std::vector<std::vector<int>> monos;
  std::vector<int> cur;
  monomials(dim, degree + 1, cur, monos);
  auto total_degree = [](const std::vector<int>& m) {
    int t = 0;
    for (int e : m) t += e;
    return t;
  };
  auto mono_expr = [&](const std::vector<int>& m) {
    std::vector<Expr> f;
    for (int i = 0; i < dim; ++i)
      if (m[i]) f.push_back(pow(ch.coord(i), Q(m[i])));
    return mul(f);
  };

  struct Unknown {
    int slot;
    int mono;
  };
  std::vector<Unknown> unk;
  // Equation key: (condition, form index, monomial) -> coefficient per unknown.
  std::map<std::tuple<int, Index, std::vector<int>>, std::map<int, Q>> eqs;
  for (int s = 0; s < dim; ++s)
    for (int m = 0; m < static_cast<int>(monos.size()); ++m) {
      if (total_degree(monos[m]) > slot_degree(s)) continue;
      int u = static_cast<int>(unk.size());
      unk.push_back({s, m});
      std::vector<Expr> comps(dim, Expr(0));
      comps[s] = mono_expr(monos[m]);
      SymmetryResiduals r = symmetry_residuals(VectorField(ch, comps), pair);
      for (int k = 0; k < 5; ++k)
        for (const auto& [idx, c] : r.conditions[k].terms()) {
          auto p = expand_poly(c, ch);
          if (!p) throw DomainError("determining equations need polynomial F and H");
          for (const auto& [mono, q] : *p) eqs[{k, idx, mono}][u] += q;
        }
    }
  int U = static_cast<int>(unk.size());

  DeterminingResult res;
  res.degree = degree;
  res.unknowns = U;

  QMatrix M;
  for (const auto& [key, row] : eqs) {
    std::vector<Q> r(U);
    bool any = false;
    for (const auto& [u, q] : row) {
      r[u] = q;
      any = any || q != 0;
    }
    if (any) M.push_back(std::move(r));
  }
  auto piv = rref(M, U);
  std::vector<bool> is_piv(U, false);
  for (int p : piv) is_piv[p] = true;
  for (int f = 0; f < U; ++f) {
    if (is_piv[f]) continue;
    std::vector<Q> v(U);
    v[f] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -M[r][f];
    std::vector<Expr> comps(dim, Expr(0));
    for (int u = 0; u < U; ++u) {
      if (v[u] == 0) continue;
      comps[unk[u].slot] = comps[unk[u].slot] + Expr(v[u]) * mono_expr(monos[unk[u].mono]);
      if (total_degree(monos[unk[u].mono]) == slot_degree(unk[u].slot)) res.possibly_incomplete = true;
    }
    VectorField X(ch, comps);
    res.verified = res.verified && check_symmetry(X, pair, proto).symmetry;
    res.basis.push_back(X);
  }
  return res;
}

bool in_span(const std::vector<VectorField>& fields, const VectorField& X, std::uint64_t seed) {
  std::vector<VectorField> all = fields;
  all.push_back(X);
  int k = static_cast<int>(all.size()), dim = X.chart().dim();
  Sampler smp(field_vars(all, X.chart()), SampleBox{}, seed);
  QMatrix M;
  int points = k / dim + 3;
  for (int p = 0; p < points; ++p) {
    auto pt = smp.next();
    for (int i = 0; i < dim; ++i) {
      std::vector<Q> row(k);
      for (int j = 0; j < k; ++j) {
        auto v = exact_value(all[j][i], pt);
        if (!v) throw DomainError("in_span needs rational fields");
        row[j] = *v;
      }
      M.push_back(std::move(row));
    }
  }
  QMatrix without = M;
  for (auto& r : without) r.pop_back();
  return rank_q(M, k) == rank_q(without, k - 1);
}

}  // namespace paracr
