#include "paracr/poly.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace paracr {

namespace {
constexpr std::size_t kTermLimit = 60000;
constexpr std::size_t kGcdLimit = 4000;
}  // namespace

Poly Poly::constant(int nvars, const Q& c) {
  Poly p(nvars);
  if (c != 0) p.t_[Mono(nvars, 0)] = c;
  return p;
}

Poly Poly::variable(int nvars, int i, int e) {
  Poly p(nvars);
  Mono m(nvars, 0);
  m[i] = e;
  p.t_[m] = 1;
  return p;
}

bool Poly::is_constant() const {
  if (t_.empty()) return true;
  if (t_.size() > 1) return false;
  const Mono& m = t_.begin()->first;
  return std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
}

Q Poly::constant_term() const {
  auto it = t_.find(Mono(n_, 0));
  return it == t_.end() ? Q(0) : it->second;
}

void Poly::add_term(const Mono& m, const Q& c) {
  if (c == 0) return;
  auto [it, fresh] = t_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) t_.erase(it);
  }
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.t_) r.add_term(m, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.t_) r.add_term(m, -c);
  return r;
}

Poly Poly::operator-() const {
  Poly r(n_);
  for (const auto& [m, c] : t_) r.t_.emplace(m, -c);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(n_);
  if (t_.empty() || o.t_.empty()) return r;
  if (t_.size() * o.t_.size() > 40 * kTermLimit) throw TooLarge("polynomial product too large");
  Mono m(n_);
  for (const auto& [ma, ca] : t_)
    for (const auto& [mb, cb] : o.t_) {
      for (int i = 0; i < n_; ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  if (r.t_.size() > kTermLimit) throw TooLarge("polynomial too large");
  return r;
}

Poly Poly::scaled(const Q& c) const {
  Poly r(n_);
  if (c == 0) return r;
  for (const auto& [m, v] : t_) r.t_.emplace(m, v * c);
  return r;
}

Poly Poly::pow(unsigned e) const {
  Poly r = constant(n_, 1), b = *this;
  while (e) {
    if (e & 1) r = r * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return r;
}

int Poly::degree(int v) const {
  int d = 0;
  for (const auto& [m, c] : t_) d = std::max(d, m[v]);
  return d;
}

std::map<int, Poly> Poly::coeffs_in(int v) const {
  std::map<int, Poly> out;
  for (const auto& [m, c] : t_) {
    Mono k = m;
    k[v] = 0;
    auto it = out.try_emplace(m[v], Poly(n_)).first;
    it->second.add_term(k, c);
  }
  return out;
}

bool divide_exact(const Poly& a, const Poly& b, Poly& q) {
  if (b.is_zero()) throw DomainError("division by the zero polynomial");
  int n = a.nvars();
  q = Poly(n);
  Poly r = a;
  const Mono& lb = b.lead_mono();
  const Q& cb = b.lead_coeff();
  while (!r.is_zero()) {
    Mono lr = r.lead_mono();
    Mono m(n);
    for (int i = 0; i < n; ++i) {
      m[i] = lr[i] - lb[i];
      if (m[i] < 0) return false;
    }
    Q c = r.lead_coeff() / cb;
    Poly t(n);
    t.add_term(m, c);
    q.add_term(m, c);
    r = r - t * b;
  }
  return true;
}

namespace {

Poly monic(const Poly& p) {
  if (p.is_zero()) return p;
  return p.scaled(1 / p.lead_coeff());
}

int top_var(const Poly& a, const Poly& b) {
  for (int v = a.nvars() - 1; v >= 0; --v)
    if (a.has_var(v) || b.has_var(v)) return v;
  return -1;
}

Poly content(const Poly& p, int v);

Poly primitive(const Poly& p, int v) {
  Poly c = content(p, v);
  Poly q;
  if (!divide_exact(p, c, q)) throw std::logic_error("content does not divide");
  return q;
}

Poly prem(const Poly& a, const Poly& b, int v) {
  int db = b.degree(v);
  Poly lb = b.coeffs_in(v).rbegin()->second;
  Poly r = a;
  while (!r.is_zero() && r.degree(v) >= db) {
    int dr = r.degree(v);
    Poly lr = r.coeffs_in(v).rbegin()->second;
    r = lb * r - lr * Poly::variable(r.nvars(), v, dr - db) * b;
  }
  return r;
}

Poly gcd_rec(const Poly& a, const Poly& b) {
  int n = a.nvars();
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  if (a.is_constant() || b.is_constant()) return Poly::constant(n, 1);
  int v = top_var(a, b);
  if (!a.has_var(v)) return gcd_rec(a, content(b, v));
  if (!b.has_var(v)) return gcd_rec(content(a, v), b);
  Poly ca = content(a, v), cb = content(b, v);
  Poly pa, pb;
  divide_exact(a, ca, pa);
  divide_exact(b, cb, pb);
  Poly c = gcd_rec(ca, cb);
  for (;;) {
    if (pa.degree(v) < pb.degree(v)) std::swap(pa, pb);
    Poly r = prem(pa, pb, v);
    if (r.is_zero()) break;
    if (r.degree(v) == 0) {
      pb = Poly::constant(n, 1);
      break;
    }
    pa = pb;
    pb = monic(primitive(r, v));
  }
  Poly g = pb.is_constant() ? Poly::constant(n, 1) : primitive(pb, v);
  return monic(c * g);
}

Poly content(const Poly& p, int v) {
  auto cs = p.coeffs_in(v);
  Poly g(p.nvars());
  for (const auto& [e, c] : cs) {
    g = gcd_rec(g, c);
    if (g.is_constant()) return Poly::constant(p.nvars(), 1);
  }
  return g;
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) {
  if (a.size() + b.size() > kGcdLimit) throw TooLarge("gcd input too large");
  return gcd_rec(a, b);
}

// ------------------------------------------------------------ conversion

namespace {

long lcm_l(long a, long b) { return std::lcm(a, b); }

struct RF {
  Poly n, d;
};

enum class SymType { Plain, Radical, ExpAtom, Opaque };

struct Sym {
  SymType type;
  Expr key;
  std::string name;
  long d = 1;
  bool rel_ready = false;
  Poly bn, bd;
};

class Converter {
 public:
  void scan(const Expr& e) {
    if (!seen_.emplace(e.node(), true).second) return;
    switch (e.kind()) {
      case Kind::Num:
        return;
      case Kind::Var:
        plain(e.name(), 1);
        return;
      case Kind::Sum:
      case Kind::Product:
        for (const auto& a : e.args()) scan(a);
        return;
      case Kind::Pow: {
        const Expr& b = e.arg(0);
        long den = e.num().get_den().get_si();
        if (b.kind() == Kind::Var) {
          plain(b.name(), den);
        } else if (den == 1) {
          scan(b);
        } else {
          scan(b);
          int i = keyed(radical_, b, SymType::Radical);
          syms_[i].d = lcm_l(syms_[i].d, den);
        }
        return;
      }
      case Kind::Exp: {
        const Expr& a = e.arg(0);
        std::vector<Expr> terms = a.kind() == Kind::Sum ? a.args() : std::vector<Expr>{a};
        for (const auto& t : terms) {
          auto [c, rest] = split_coeff(t);
          int i = keyed(expo_, rest, SymType::ExpAtom);
          syms_[i].d = lcm_l(syms_[i].d, c.get_den().get_si());
        }
        return;
      }
      default:
        keyed(opaque_, e, SymType::Opaque);
    }
  }

  void freeze() { n_ = static_cast<int>(syms_.size()); }
  int nvars() const { return n_; }
  bool pure() const {
    return std::all_of(syms_.begin(), syms_.end(),
                       [](const Sym& s) { return s.type == SymType::Plain; });
  }
  const std::vector<Sym>& syms() const { return syms_; }

  RF conv(const Expr& e) {
    auto it = memo_.find(e.node());
    if (it != memo_.end()) return it->second;
    RF r = compute(e);
    memo_.emplace(e.node(), r);
    return r;
  }

  // Applies T^d = base for every radical atom.
  Poly reduce(Poly p) {
    for (int i = n_ - 1; i >= 0; --i) {
      Sym& s = syms_[i];
      if (s.type != SymType::Radical) continue;
      relation(i);
      while (p.degree(i) >= s.d) {
        Poly low(n_), high(n_);
        for (const auto& [m, c] : p.terms()) {
          if (m[i] >= s.d) {
            Mono k = m;
            k[i] -= static_cast<int>(s.d);
            high.add_term(k, c);
          } else {
            low.add_term(m, c);
          }
        }
        p = low * s.bd + high * s.bn;
      }
    }
    return p;
  }

 private:
  std::vector<Sym> syms_;
  std::map<std::string, int> plain_;
  std::map<Expr, int, ExprLess> radical_, expo_, opaque_;
  std::unordered_map<const Node*, bool> seen_;
  std::unordered_map<const Node*, RF> memo_;
  int n_ = 0;

  void plain(const std::string& name, long den) {
    auto it = plain_.find(name);
    if (it == plain_.end()) {
      it = plain_.emplace(name, static_cast<int>(syms_.size())).first;
      syms_.push_back(Sym{SymType::Plain, var(name), name, 1, false, Poly(0), Poly(0)});
    }
    syms_[it->second].d = lcm_l(syms_[it->second].d, den);
  }

  int keyed(std::map<Expr, int, ExprLess>& m, const Expr& k, SymType t) {
    auto it = m.find(k);
    if (it != m.end()) return it->second;
    int i = static_cast<int>(syms_.size());
    m.emplace(k, i);
    syms_.push_back(Sym{t, k, "", 1, false, Poly(0), Poly(0)});
    return i;
  }

  void relation(int i) {
    Sym& s = syms_[i];
    if (s.rel_ready) return;
    RF b = conv(s.key);
    s.bn = b.n;
    s.bd = b.d;
    s.rel_ready = true;
  }

  RF one() const { return RF{Poly::constant(n_, 1), Poly::constant(n_, 1)}; }

  RF monomial(int i, long k) const {
    if (k >= 0) return RF{Poly::variable(n_, i, static_cast<int>(k)), Poly::constant(n_, 1)};
    return RF{Poly::constant(n_, 1), Poly::variable(n_, i, static_cast<int>(-k))};
  }

  static bool is_monomial(const Poly& p) { return p.size() == 1; }

  RF tidy(RF r) const {
    if (r.n.is_zero()) return RF{Poly(n_), Poly::constant(n_, 1)};
    if (is_monomial(r.d)) {
      Mono dm = r.d.terms().begin()->first;
      Q dc = r.d.terms().begin()->second;
      Mono g = dm;
      for (const auto& [m, c] : r.n.terms())
        for (int i = 0; i < n_; ++i) g[i] = std::min(g[i], m[i]);
      Poly nn(n_);
      for (const auto& [m, c] : r.n.terms()) {
        Mono k = m;
        for (int i = 0; i < n_; ++i) k[i] -= g[i];
        nn.add_term(k, c / dc);
      }
      Mono k = dm;
      for (int i = 0; i < n_; ++i) k[i] -= g[i];
      Poly dd(n_);
      dd.add_term(k, 1);
      return RF{nn, dd};
    }
    return r;
  }

  RF add(const RF& a, const RF& b) const {
    if (a.n.is_zero()) return b;
    if (b.n.is_zero()) return a;
    if (a.d == b.d) return tidy(RF{a.n + b.n, a.d});
    if (is_monomial(a.d) && is_monomial(b.d)) {
      const Mono& ma = a.d.terms().begin()->first;
      const Mono& mb = b.d.terms().begin()->first;
      Mono l(n_), fa(n_), fb(n_);
      for (int i = 0; i < n_; ++i) {
        l[i] = std::max(ma[i], mb[i]);
        fa[i] = l[i] - ma[i];
        fb[i] = l[i] - mb[i];
      }
      Poly pa(n_), pb(n_), pl(n_);
      pa.add_term(fa, 1 / a.d.terms().begin()->second);
      pb.add_term(fb, 1 / b.d.terms().begin()->second);
      pl.add_term(l, 1);
      return tidy(RF{a.n * pa + b.n * pb, pl});
    }
    return tidy(RF{a.n * b.d + b.n * a.d, a.d * b.d});
  }

  RF mul(const RF& a, const RF& b) const {
    if (a.n.is_zero() || b.n.is_zero()) return RF{Poly(n_), Poly::constant(n_, 1)};
    return tidy(RF{a.n * b.n, a.d * b.d});
  }

  RF inv(const RF& a) const {
    if (a.n.is_zero()) throw DomainError("division by zero");
    RF r{a.d, a.n};
    Q lc = r.d.lead_coeff();
    return tidy(RF{r.n.scaled(1 / lc), r.d.scaled(1 / lc)});
  }

  RF ipow(const RF& a, long k) const {
    RF base = k < 0 ? inv(a) : a;
    unsigned long m = static_cast<unsigned long>(k < 0 ? -k : k);
    return tidy(RF{base.n.pow(static_cast<unsigned>(m)), base.d.pow(static_cast<unsigned>(m))});
  }

  RF compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Num:
        return RF{Poly::constant(n_, e.num()), Poly::constant(n_, 1)};
      case Kind::Var: {
        int i = plain_.at(e.name());
        return monomial(i, syms_[i].d);
      }
      case Kind::Sum: {
        RF acc{Poly(n_), Poly::constant(n_, 1)};
        for (const auto& a : e.args()) acc = add(acc, conv(a));
        return acc;
      }
      case Kind::Product: {
        RF acc = one();
        for (const auto& a : e.args()) acc = mul(acc, conv(a));
        return acc;
      }
      case Kind::Pow: {
        const Expr& b = e.arg(0);
        const Q& q = e.num();
        if (b.kind() == Kind::Var) {
          int i = plain_.at(b.name());
          Q k = q * syms_[i].d;
          return monomial(i, k.get_num().get_si());
        }
        if (q.get_den() == 1) return ipow(conv(b), q.get_num().get_si());
        int i = radical_.at(b);
        Q kq = q * syms_[i].d;
        long k = kq.get_num().get_si();
        long d = syms_[i].d;
        long a = k >= 0 ? k / d : -((-k + d - 1) / d);
        long rem = k - a * d;
        RF r = monomial(i, rem);
        if (a != 0) r = mul(r, ipow(conv(b), a));
        return r;
      }
      case Kind::Exp: {
        const Expr& a = e.arg(0);
        std::vector<Expr> terms = a.kind() == Kind::Sum ? a.args() : std::vector<Expr>{a};
        RF acc = one();
        for (const auto& t : terms) {
          auto [c, rest] = split_coeff(t);
          int i = expo_.at(rest);
          Q k = c * syms_[i].d;
          acc = mul(acc, monomial(i, k.get_num().get_si()));
        }
        return acc;
      }
      default:
        return monomial(opaque_.at(e), 1);
    }
  }
};

Expr poly_to_expr(const Poly& p, const std::vector<Sym>& syms) {
  std::vector<Expr> terms;
  for (const auto& [m, c] : p.terms()) {
    std::vector<Expr> f{Expr(c)};
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] != 0) f.push_back(pow(var(syms[i].name), Q(m[i], syms[i].d)));
    terms.push_back(mul(std::move(f)));
  }
  return add(std::move(terms));
}

}  // namespace

RationalForm normalize_rational(const Expr& e) {
  RationalForm out{e, false, true};
  if (e.is_num()) {
    out.exact = true;
    return out;
  }
  Converter cv;
  cv.scan(e);
  cv.freeze();
  if (!cv.pure()) return out;
  RF r;
  try {
    r = cv.conv(e);
  } catch (const TooLarge&) {
    return out;
  }
  Poly n = r.n, d = r.d;
  try {
    Poly g = gcd(n, d);
    if (!g.is_constant()) {
      Poly qn, qd;
      divide_exact(n, g, qn);
      divide_exact(d, g, qd);
      n = qn;
      d = qd;
    }
  } catch (const TooLarge&) {
    out.reduced = false;
  }
  Q lc = d.lead_coeff();
  n = n.scaled(1 / lc);
  d = d.scaled(1 / lc);
  Expr ne = poly_to_expr(n, cv.syms());
  out.value = d.is_constant() ? ne : mul({ne, pow(poly_to_expr(d, cv.syms()), Q(-1))});
  out.exact = true;
  return out;
}

ExactVerdict exact_zero_test(const Expr& e) {
  if (e.is_num()) return e.is_zero() ? ExactVerdict::Zero : ExactVerdict::NonZero;
  Converter cv;
  cv.scan(e);
  cv.freeze();
  try {
    RF r = cv.conv(e);
    Poly n = cv.reduce(r.n);
    if (n.is_zero()) return ExactVerdict::Zero;
    return cv.pure() ? ExactVerdict::NonZero : ExactVerdict::Undecided;
  } catch (const TooLarge&) {
    return ExactVerdict::Undecided;
  } catch (const DomainError&) {
    return ExactVerdict::Undecided;
  }
}

}  // namespace paracr
