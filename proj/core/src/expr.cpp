#include "paracr/expr.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace paracr {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_q(const Q& q) {
  std::size_t h = std::hash<std::string>{}(q.get_str());
  return h;
}

int kind_rank(Kind k) { return static_cast<int>(k); }

const Expr& zero_expr() {
  static const Expr z = Expr::make(Node{Kind::Num, Q(0), {}, {}, 0});
  return z;
}

const Expr& one_expr() {
  static const Expr o = Expr::make(Node{Kind::Num, Q(1), {}, {}, 0});
  return o;
}

Expr node(Kind k, std::vector<Expr> args, const Q& q = Q(0)) {
  return Expr::make(Node{k, q, {}, std::move(args), 0});
}

bool is_integer(const Q& q) { return q.get_den() == 1; }

// Exact q^(1/n) when it is rational.
bool exact_root(const Q& q, unsigned long n, Q& out) {
  if (q < 0) return false;
  mpz_class a, b;
  if (!mpz_root(a.get_mpz_t(), q.get_num_mpz_t(), n)) return false;
  if (!mpz_root(b.get_mpz_t(), q.get_den_mpz_t(), n)) return false;
  out = Q(a, b);
  out.canonicalize();
  return true;
}

Q qpow(const Q& base, long e) {
  Q r = 1;
  Q b = base;
  bool inv = e < 0;
  unsigned long n = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), b.get_num_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), b.get_den_mpz_t(), n);
  r = inv ? Q(den, num) : Q(num, den);
  r.canonicalize();
  return r;
}

Q qfloor(const Q& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Q(f);
}

std::pair<Expr, Q> base_exp(const Expr& e) {
  if (e.kind() == Kind::Pow) return {e.arg(0), e.num()};
  return {e, Q(1)};
}

// Product node from a coefficient and an already canonical monomial.
Expr scale(const Q& k, const Expr& rest) {
  if (k == 1) return rest;
  std::vector<Expr> a{Expr(k)};
  if (rest.kind() == Kind::Product) {
    a.insert(a.end(), rest.args().begin(), rest.args().end());
  } else {
    a.push_back(rest);
  }
  return node(Kind::Product, std::move(a));
}

// Positive rational base raised to a rational exponent, split into
// an exact coefficient and a residual radical with exponent in (0,1).
std::pair<Q, Expr> numeric_power(const Q& v, const Q& e) {
  Q k = qfloor(e);
  Q f = e - k;
  Q coef = qpow(v, k.get_num().get_si());
  if (f == 0) return {coef, Expr()};
  Q vm = qpow(v, f.get_num().get_si());
  Q root;
  if (exact_root(vm, f.get_den().get_ui(), root)) return {coef * root, Expr()};
  return {coef, node(Kind::Pow, {Expr(v)}, f)};
}

}  // namespace

Expr::Expr() : n_(zero_expr().n_) {}
Expr::Expr(long v) : Expr(Q(v)) {}
Expr::Expr(const Q& v) {
  Q c = v;
  c.canonicalize();
  n_ = make(Node{Kind::Num, c, {}, {}, 0}).n_;
}

Expr Expr::make(Node n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1315423911ULL;
  if (n.kind == Kind::Num || n.kind == Kind::Pow) h = mix(h, hash_q(n.num));
  if (n.kind == Kind::Var) h = mix(h, std::hash<std::string>{}(n.name));
  for (const auto& a : n.args) h = mix(h, a.hash());
  n.hash = h;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  bool an = a.is_num(), bn = b.is_num();
  if (an && bn) return cmp(a.num(), b.num()) < 0 ? -1 : (a.num() == b.num() ? 0 : 1);
  if (an) return -1;
  if (bn) return 1;
  if (a.kind() == Kind::Pow || b.kind() == Kind::Pow) {
    auto [ba, ea] = base_exp(a);
    auto [bb, eb] = base_exp(b);
    int c = compare(ba, bb);
    if (c != 0) return c;
    if (ea == eb) return 0;
    return ea < eb ? -1 : 1;
  }
  if (a.kind() != b.kind()) return kind_rank(a.kind()) < kind_rank(b.kind()) ? -1 : 1;
  if (a.kind() == Kind::Var) {
    int c = a.name().compare(b.name());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  const auto& x = a.args();
  const auto& y = b.args();
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(x[i], y[i]);
    if (c != 0) return c;
  }
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

Expr num(const Q& v) { return Expr(v); }
Expr num(long n, long d) { return Expr(Q(n, d)); }

Expr var(const std::string& name) { return Expr::make(Node{Kind::Var, Q(0), name, {}, 0}); }

std::pair<Q, Expr> split_coeff(const Expr& t) {
  if (t.is_num()) return {t.num(), one_expr()};
  if (t.kind() == Kind::Product && t.arg(0).is_num()) {
    const auto& a = t.args();
    if (a.size() == 2) return {a[0].num(), a[1]};
    return {a[0].num(), node(Kind::Product, std::vector<Expr>(a.begin() + 1, a.end()))};
  }
  return {Q(1), t};
}

Expr add(std::vector<Expr> terms) {
  Q c = 0;
  std::map<Expr, Q, ExprLess> acc;
  std::function<void(const Expr&)> put = [&](const Expr& t) {
    if (t.kind() == Kind::Sum) {
      for (const auto& s : t.args()) put(s);
    } else if (t.is_num()) {
      c += t.num();
    } else {
      auto [k, rest] = split_coeff(t);
      acc[rest] += k;
    }
  };
  for (const auto& t : terms) put(t);
  std::vector<Expr> out;
  for (const auto& [rest, k] : acc)
    if (k != 0) out.push_back(scale(k, rest));
  if (c != 0) out.push_back(Expr(c));
  if (out.empty()) return zero_expr();
  if (out.size() == 1) return out[0];
  return node(Kind::Sum, std::move(out));
}

Expr mul(std::vector<Expr> factors) {
  Q c = 1;
  std::map<Expr, Q, ExprLess> powers;
  std::map<Q, Q> radicals;
  std::vector<Expr> exps;
  std::function<void(const Expr&)> put = [&](const Expr& f) {
    switch (f.kind()) {
      case Kind::Num:
        c *= f.num();
        break;
      case Kind::Product:
        for (const auto& g : f.args()) put(g);
        break;
      case Kind::Pow:
        if (f.arg(0).is_num() && f.arg(0).num() > 0)
          radicals[f.arg(0).num()] += f.num();
        else
          powers[f.arg(0)] += f.num();
        break;
      case Kind::Exp:
        exps.push_back(f.arg(0));
        break;
      default:
        powers[f] += 1;
    }
  };
  for (const auto& f : factors) put(f);
  if (c == 0) return zero_expr();

  std::vector<Expr> out;
  bool reflow = false;
  for (const auto& [b, e] : powers) {
    if (e == 0) continue;
    Expr p = pow(b, e);
    Kind k = p.kind();
    if (k == Kind::Num || k == Kind::Product || k == Kind::Exp) reflow = true;
    if (k == Kind::Pow && p.arg(0) != b) reflow = true;
    out.push_back(p);
  }
  for (const auto& [v, e] : radicals) {
    if (e == 0) continue;
    auto [k, rad] = numeric_power(v, e);
    c *= k;
    if (!rad.is_zero()) out.push_back(rad);
  }
  if (!exps.empty()) {
    Expr a = add(exps);
    if (!a.is_zero()) out.push_back(node(Kind::Exp, {a}));
  }
  if (reflow) {
    out.push_back(Expr(c));
    return mul(std::move(out));
  }
  if (out.empty()) return Expr(c);
  std::sort(out.begin(), out.end(), ExprLess{});
  if (c == 1 && out.size() == 1) return out[0];
  if (c != 1) out.insert(out.begin(), Expr(c));
  return node(Kind::Product, std::move(out));
}

Expr pow(const Expr& b, const Q& q) {
  if (q == 0) return one_expr();
  if (q == 1) return b;
  switch (b.kind()) {
    case Kind::Num: {
      const Q& v = b.num();
      if (v == 0) {
        if (q > 0) return zero_expr();
        throw DomainError("division by zero");
      }
      if (v == 1) return one_expr();
      if (is_integer(q)) return Expr(qpow(v, q.get_num().get_si()));
      if (v < 0) {
        if (q.get_den() % 2 == 0) return node(Kind::Pow, {b}, q);
        bool odd = q.get_num() % 2 != 0;
        Expr p = pow(Expr(Q(-v)), q);
        return odd ? mul({Expr(-1), p}) : p;
      }
      auto [k, rad] = numeric_power(v, q);
      if (rad.is_zero()) return Expr(k);
      return k == 1 ? rad : mul({Expr(k), rad});
    }
    case Kind::Product: {
      if (is_integer(q)) {
        std::vector<Expr> f;
        for (const auto& a : b.args()) f.push_back(pow(a, q));
        return mul(std::move(f));
      }
      if (b.arg(0).is_num()) {
        Q c = b.arg(0).num();
        if (c > 0 || q.get_den() % 2 != 0) {
          auto [k, rest] = split_coeff(b);
          return mul({pow(Expr(k), q), pow(rest, q)});
        }
      }
      return node(Kind::Pow, {b}, q);
    }
    case Kind::Pow: {
      const Q& e = b.num();
      bool even_num = e.get_num() % 2 == 0;
      bool even_den = q.get_den() % 2 == 0;
      if (is_integer(q) || !(even_num && even_den)) return pow(b.arg(0), e * q);
      return node(Kind::Pow, {b}, q);
    }
    case Kind::Exp:
      return exp(mul({Expr(q), b.arg(0)}));
    default:
      return node(Kind::Pow, {b}, q);
  }
}

Expr powx(const Expr& b, const Expr& e) {
  if (e.is_num()) return pow(b, e.num());
  if (b.is_one()) return one_expr();
  if (b.kind() == Kind::Exp) return exp(mul({b.arg(0), e}));
  return node(Kind::PowX, {b, e});
}

Expr sqrt(const Expr& a) { return pow(a, Q(1, 2)); }

Expr exp(const Expr& a) {
  if (a.is_zero()) return one_expr();
  if (a.kind() == Kind::Log) return a.arg(0);
  return node(Kind::Exp, {a});
}

Expr log(const Expr& a) {
  if (a.is_one()) return zero_expr();
  if (a.kind() == Kind::Exp) return a.arg(0);
  return node(Kind::Log, {a});
}

Expr atan(const Expr& a) {
  if (a.is_zero()) return zero_expr();
  return node(Kind::Atan, {a});
}

Expr sin(const Expr& a) {
  if (a.is_zero()) return zero_expr();
  return node(Kind::Sin, {a});
}

Expr cos(const Expr& a) {
  if (a.is_zero()) return one_expr();
  return node(Kind::Cos, {a});
}

Expr sgn(const Expr& a) {
  if (a.is_num()) return Expr(Q(sgn(a.num())));
  return node(Kind::Sgn, {a});
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, Q(-1))}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> a) {
  switch (e.kind()) {
    case Kind::Num:
    case Kind::Var:
      return e;
    case Kind::Sum:
      return add(std::move(a));
    case Kind::Product:
      return mul(std::move(a));
    case Kind::Pow:
      return pow(a[0], e.num());
    case Kind::PowX:
      return powx(a[0], a[1]);
    case Kind::Exp:
      return exp(a[0]);
    case Kind::Log:
      return log(a[0]);
    case Kind::Atan:
      return atan(a[0]);
    case Kind::Sin:
      return sin(a[0]);
    case Kind::Cos:
      return cos(a[0]);
    case Kind::Sgn:
      return sgn(a[0]);
  }
  return e;
}

void collect_vars(const Expr& e, std::set<std::string>& out,
                  std::unordered_map<const Node*, bool>& seen) {
  if (!seen.emplace(e.node(), true).second) return;
  if (e.kind() == Kind::Var) out.insert(e.name());
  for (const auto& a : e.args()) collect_vars(a, out, seen);
}

struct Differ {
  const std::string& v;
  std::unordered_map<const Node*, Expr> memo;
  std::unordered_map<const Node*, bool> dep;

  bool depends(const Expr& e) {
    auto it = dep.find(e.node());
    if (it != dep.end()) return it->second;
    bool d = false;
    if (e.kind() == Kind::Var)
      d = e.name() == v;
    else
      for (const auto& a : e.args())
        if (depends(a)) {
          d = true;
          break;
        }
    dep.emplace(e.node(), d);
    return d;
  }

  Expr operator()(const Expr& e) {
    if (!depends(e)) return Expr();
    auto it = memo.find(e.node());
    if (it != memo.end()) return it->second;
    Expr r = compute(e);
    memo.emplace(e.node(), r);
    return r;
  }

  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Num:
        return Expr();
      case Kind::Var:
        return Expr(1);
      case Kind::Sum: {
        std::vector<Expr> t;
        for (const auto& a : e.args()) t.push_back((*this)(a));
        return add(std::move(t));
      }
      case Kind::Product: {
        const auto& f = e.args();
        std::vector<Expr> t;
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (!depends(f[i])) continue;
          std::vector<Expr> g;
          for (std::size_t j = 0; j < f.size(); ++j) g.push_back(i == j ? (*this)(f[j]) : f[j]);
          t.push_back(mul(std::move(g)));
        }
        return add(std::move(t));
      }
      case Kind::Pow: {
        const Q& q = e.num();
        return mul({Expr(q), pow(e.arg(0), q - 1), (*this)(e.arg(0))});
      }
      case Kind::PowX: {
        const Expr& b = e.arg(0);
        const Expr& x = e.arg(1);
        Expr inner = add({mul({(*this)(x), log(b)}), mul({x, (*this)(b), pow(b, Q(-1))})});
        return mul({e, inner});
      }
      case Kind::Exp:
        return mul({e, (*this)(e.arg(0))});
      case Kind::Log:
        return mul({(*this)(e.arg(0)), pow(e.arg(0), Q(-1))});
      case Kind::Atan:
        return mul({(*this)(e.arg(0)), pow(add({Expr(1), pow(e.arg(0), Q(2))}), Q(-1))});
      case Kind::Sin:
        return mul({cos(e.arg(0)), (*this)(e.arg(0))});
      case Kind::Cos:
        return mul({Expr(-1), sin(e.arg(0)), (*this)(e.arg(0))});
      case Kind::Sgn:
        throw DomainError("sgn cannot be differentiated");
    }
    return Expr();
  }
};

}  // namespace

Expr diff(const Expr& e, const std::string& v) {
  Differ d{v, {}, {}};
  return d(e);
}

Expr subs(const Expr& e, const std::map<std::string, Expr>& b) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (x.kind() == Kind::Var) {
      auto it = b.find(x.name());
      return it == b.end() ? x : it->second;
    }
    if (x.args().empty()) return x;
    auto it = memo.find(x.node());
    if (it != memo.end()) return it->second;
    std::vector<Expr> a;
    bool changed = false;
    for (const auto& c : x.args()) {
      a.push_back(go(c));
      if (a.back().node() != c.node()) changed = true;
    }
    Expr r = changed ? rebuild(x, std::move(a)) : x;
    memo.emplace(x.node(), r);
    return r;
  };
  return go(e);
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  std::unordered_map<const Node*, bool> seen;
  collect_vars(e, out, seen);
  return out;
}

bool has_kind(const Expr& e, Kind k) {
  if (e.kind() == k) return true;
  for (const auto& a : e.args())
    if (has_kind(a, k)) return true;
  return false;
}

std::size_t tree_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args()) n += tree_size(a);
  return n;
}

// ---------------------------------------------------------------- printing

std::string to_string(const Q& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

enum Prec { kSum = 1, kProd = 2, kPow = 3, kAtom = 4 };

std::string str(const Expr& e, int& prec);

std::string wrap(const Expr& e, int need) {
  int p = 0;
  std::string s = str(e, p);
  return p < need ? "(" + s + ")" : s;
}

std::string exponent_str(const Q& q) {
  if (q.get_den() == 1 && q > 0) return q.get_num().get_str();
  return "(" + to_string(q) + ")";
}

std::string pow_str(const Expr& b, const Q& q) {
  if (q == 1) return wrap(b, kPow);
  if (q == Q(1, 2)) {
    int p = 0;
    return "sqrt(" + str(b, p) + ")";
  }
  return wrap(b, kAtom) + "^" + exponent_str(q);
}

std::string product_str(const Q& c, const std::vector<Expr>& factors, int& prec) {
  std::vector<std::string> numer, denom;
  for (const auto& f : factors) {
    if (f.kind() == Kind::Pow && f.num() < 0)
      denom.push_back(pow_str(f.arg(0), -f.num()));
    else
      numer.push_back(wrap(f, kPow));
  }
  mpz_class a = abs(c.get_num());
  mpz_class d = c.get_den();
  std::string s;
  if (a != 1 || numer.empty()) s = a.get_str();
  for (const auto& n : numer) s += (s.empty() ? "" : "*") + n;
  std::size_t ndenom = denom.size() + (d != 1 ? 1 : 0);
  if (ndenom > 0) {
    std::string ds = d != 1 ? d.get_str() : "";
    for (const auto& n : denom) ds += (ds.empty() ? "" : "*") + n;
    s += "/" + (ndenom > 1 ? "(" + ds + ")" : ds);
  }
  bool single = numer.size() + (a != 1 || numer.empty() ? 1 : 0) == 1 && ndenom == 0;
  prec = single ? kPow : kProd;
  if (c < 0) {
    s = "-" + s;
    prec = kSum;
  }
  return s;
}

std::string str(const Expr& e, int& prec) {
  switch (e.kind()) {
    case Kind::Num: {
      const Q& q = e.num();
      prec = q < 0 ? kSum : (q.get_den() == 1 ? kAtom : kProd);
      return to_string(q);
    }
    case Kind::Var:
      prec = kAtom;
      return e.name();
    case Kind::Sum: {
      std::string s;
      bool first = true;
      for (const auto& t : e.args()) {
        auto [k, rest] = split_coeff(t);
        std::vector<Expr> f;
        if (!rest.is_one()) {
          if (rest.kind() == Kind::Product)
            f = rest.args();
          else
            f = {rest};
        }
        int p = 0;
        if (first) {
          s = product_str(k, f, p);
        } else {
          s += k < 0 ? " - " : " + ";
          s += product_str(k < 0 ? Q(-k) : k, f, p);
        }
        first = false;
      }
      prec = kSum;
      return s;
    }
    case Kind::Product: {
      auto [k, rest] = split_coeff(e);
      std::vector<Expr> f = rest.kind() == Kind::Product ? rest.args() : std::vector<Expr>{rest};
      return product_str(k, f, prec);
    }
    case Kind::Pow:
      if (e.num() < 0) return product_str(Q(1), {e}, prec);
      prec = e.num() == Q(1, 2) ? kAtom : kPow;
      return pow_str(e.arg(0), e.num());
    case Kind::PowX: {
      prec = kPow;
      const Expr& x = e.arg(1);
      std::string xs = x.kind() == Kind::Var ? x.name() : "(" + [&] {
        int p = 0;
        return str(x, p);
      }() + ")";
      return wrap(e.arg(0), kAtom) + "^" + xs;
    }
    default: {
      static const std::map<Kind, std::string> names = {
          {Kind::Exp, "exp"}, {Kind::Log, "log"}, {Kind::Atan, "arctan"},
          {Kind::Sin, "sin"}, {Kind::Cos, "cos"}, {Kind::Sgn, "sgn"}};
      int p = 0;
      prec = kAtom;
      return names.at(e.kind()) + "(" + str(e.arg(0), p) + ")";
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  int p = 0;
  return str(e, p);
}

}  // namespace paracr
