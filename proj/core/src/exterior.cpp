#include "paracr/exterior.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "paracr/poly.hpp"

namespace paracr {

Chart::Chart(std::vector<std::string> coords)
    : d_(std::make_shared<const Data>(Data{std::move(coords)})) {
  for (std::size_t i = 0; i < d_->coords.size(); ++i)
    for (std::size_t j = i + 1; j < d_->coords.size(); ++j)
      if (d_->coords[i] == d_->coords[j])
        throw std::invalid_argument("duplicate chart coordinate " + d_->coords[i]);
}

int Chart::index(const std::string& name) const {
  const auto& c = d_->coords;
  auto it = std::find(c.begin(), c.end(), name);
  return it == c.end() ? -1 : static_cast<int>(it - c.begin());
}

namespace {

// Sorts idx in place; returns the permutation sign, or 0 on a repeated index.
int sort_sign(Index& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

void require_same(const Chart& a, const Chart& b) {
  if (a != b) throw std::invalid_argument("objects live on different charts");
}

}  // namespace

Form Form::function(const Chart& c, const Expr& f) {
  Form r(c, 0);
  if (!f.is_zero()) r.t_[{}] = f;
  return r;
}

Form Form::coord(const Chart& c, int i) {
  Form r(c, 1);
  r.t_[{i}] = Expr(1);
  return r;
}

Form Form::coord(const Chart& c, const std::string& name) {
  int i = c.index(name);
  if (i < 0) throw std::invalid_argument("unknown coordinate " + name);
  return coord(c, i);
}

Form Form::one_form(const Chart& c, const std::vector<Expr>& coeffs) {
  Form r(c, 1);
  for (int i = 0; i < static_cast<int>(coeffs.size()); ++i) r.add_term({i}, coeffs[i]);
  return r;
}

Expr Form::coeff(const Index& idx) const {
  auto it = t_.find(idx);
  return it == t_.end() ? Expr(0) : it->second;
}

void Form::add_term(Index idx, const Expr& c) {
  if (c.is_zero()) return;
  int s = sort_sign(idx);
  if (s == 0) return;
  auto it = t_.find(idx);
  Expr v = s > 0 ? c : -c;
  if (it == t_.end()) {
    t_.emplace(std::move(idx), v);
    return;
  }
  it->second = it->second + v;
  if (it->second.is_zero()) t_.erase(it);
}

Form& Form::operator+=(const Form& o) {
  if (o.t_.empty()) return *this;
  if (t_.empty() && deg_ == 0 && chart_.dim() == 0) {
    *this = o;
    return *this;
  }
  require_same(chart_, o.chart_);
  if (deg_ != o.deg_) throw std::invalid_argument("adding forms of different degree");
  for (const auto& [i, c] : o.t_) add_term(i, c);
  return *this;
}

Form& Form::operator-=(const Form& o) { return *this += -o; }

Form Form::operator+(const Form& o) const {
  Form r = *this;
  r += o;
  return r;
}

Form Form::operator-(const Form& o) const { return *this + (-o); }

Form Form::operator-() const {
  Form r(chart_, deg_);
  for (const auto& [i, c] : t_) r.t_.emplace(i, -c);
  return r;
}

Form Form::map(const std::function<Expr(const Expr&)>& f) const {
  Form r(chart_, deg_);
  for (const auto& [i, c] : t_) r.add_term(i, f(c));
  return r;
}

std::string Form::to_string() const {
  if (t_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [idx, c] : t_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << paracr::to_string(c) << ")";
    for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "^d" : " d") << chart_.name(idx[k]);
  }
  return os.str();
}

Form operator*(const Expr& f, const Form& a) {
  Form r(a.chart(), a.degree());
  if (f.is_zero()) return r;
  for (const auto& [i, c] : a.terms()) r.add_term(i, f * c);
  return r;
}

Form wedge(const Form& a, const Form& b) {
  require_same(a.chart(), b.chart());
  int k = a.degree() + b.degree();
  Form r(a.chart(), k);
  if (k > a.chart().dim()) return r;
  for (const auto& [ia, ca] : a.terms())
    for (const auto& [ib, cb] : b.terms()) {
      Index idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      r.add_term(std::move(idx), ca * cb);
    }
  return r;
}

Form wedge(const std::vector<Form>& fs) {
  if (fs.empty()) throw std::invalid_argument("empty wedge");
  Form r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = wedge(r, fs[i]);
  return r;
}

Form d(const Form& a) {
  const Chart& c = a.chart();
  Form r(c, a.degree() + 1);
  for (const auto& [idx, coef] : a.terms()) {
    for (int j = 0; j < c.dim(); ++j) {
      if (std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
      Expr dj = diff(coef, c.name(j));
      if (dj.is_zero()) continue;
      Index full{j};
      full.insert(full.end(), idx.begin(), idx.end());
      r.add_term(std::move(full), dj);
    }
  }
  return r;
}

VectorField::VectorField(Chart chart, std::vector<Expr> comps)
    : chart_(std::move(chart)), v_(std::move(comps)) {
  if (static_cast<int>(v_.size()) != chart_.dim())
    throw std::invalid_argument("vector field length does not match chart dimension");
}

VectorField VectorField::zero(const Chart& c) {
  return VectorField(c, std::vector<Expr>(c.dim(), Expr(0)));
}

VectorField VectorField::partial(const Chart& c, int i) {
  VectorField r = zero(c);
  r.v_[i] = Expr(1);
  return r;
}

Expr VectorField::apply(const Expr& f) const {
  std::vector<Expr> t;
  for (int i = 0; i < chart_.dim(); ++i) {
    if (v_[i].is_zero()) continue;
    Expr df = diff(f, chart_.name(i));
    if (!df.is_zero()) t.push_back(v_[i] * df);
  }
  return add(std::move(t));
}

VectorField VectorField::operator+(const VectorField& o) const {
  require_same(chart_, o.chart_);
  VectorField r = *this;
  for (int i = 0; i < chart_.dim(); ++i) r.v_[i] = v_[i] + o.v_[i];
  return r;
}

VectorField VectorField::operator-(const VectorField& o) const {
  require_same(chart_, o.chart_);
  VectorField r = *this;
  for (int i = 0; i < chart_.dim(); ++i) r.v_[i] = v_[i] - o.v_[i];
  return r;
}

VectorField VectorField::map(const std::function<Expr(const Expr&)>& f) const {
  VectorField r = *this;
  for (auto& c : r.v_) c = f(c);
  return r;
}

std::string VectorField::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < chart_.dim(); ++i) {
    if (v_[i].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << paracr::to_string(v_[i]) << ")*d_" << chart_.name(i);
  }
  return first ? "0" : os.str();
}

VectorField operator*(const Expr& f, const VectorField& X) {
  return X.map([&](const Expr& c) { return f * c; });
}

VectorField bracket(const VectorField& X, const VectorField& Y) {
  require_same(X.chart(), Y.chart());
  std::vector<Expr> out;
  for (int i = 0; i < X.chart().dim(); ++i) out.push_back(X.apply(Y[i]) - Y.apply(X[i]));
  return VectorField(X.chart(), std::move(out));
}

Form interior(const VectorField& X, const Form& a) {
  require_same(X.chart(), a.chart());
  Form r(a.chart(), std::max(0, a.degree() - 1));
  if (a.degree() == 0) return r;
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t m = 0; m < idx.size(); ++m) {
      const Expr& xm = X[idx[m]];
      if (xm.is_zero()) continue;
      Index rest;
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (k != m) rest.push_back(idx[k]);
      Expr t = xm * c;
      r.add_term(std::move(rest), m % 2 ? -t : t);
    }
  }
  return r;
}

Form lie_derivative(const VectorField& X, const Form& a) {
  if (a.degree() == 0) return Form::function(a.chart(), X.apply(a.coeff(Index{})));
  return d(interior(X, a)) + interior(X, d(a));
}

CoframeSet::CoframeSet(Chart chart, std::vector<Form> forms)
    : chart_(std::move(chart)), forms_(std::move(forms)) {
  int n = chart_.dim();
  if (static_cast<int>(forms_.size()) != n)
    throw std::invalid_argument("coframe must have as many forms as the chart dimension");
  for (const auto& f : forms_) {
    require_same(chart_, f.chart());
    if (f.degree() != 1) throw std::invalid_argument("coframe entries must be 1-forms");
    std::vector<Expr> row(n);
    for (int j = 0; j < n; ++j) row[j] = f.coeff(j);
    m_.push_back(std::move(row));
  }
}

namespace {

// Replaces transcendental subterms by fresh symbols; exp(k*u) with integer k becomes E^k.
struct AtomAbstraction {
  std::map<Expr, std::string, ExprLess> names;
  std::map<std::string, Expr> back;

  Expr atom(const Expr& e) {
    auto it = names.find(e);
    if (it != names.end()) return var(it->second);
    std::string n = "\x01atom" + std::to_string(names.size());
    names.emplace(e, n);
    back.emplace(n, e);
    return var(n);
  }

  Expr operator()(const Expr& e) {
    switch (e.kind()) {
      case Kind::Num:
      case Kind::Var:
        return e;
      case Kind::Sum: {
        std::vector<Expr> t;
        for (const auto& a : e.args()) t.push_back((*this)(a));
        return add(std::move(t));
      }
      case Kind::Product: {
        std::vector<Expr> t;
        for (const auto& a : e.args()) t.push_back((*this)(a));
        return mul(std::move(t));
      }
      case Kind::Pow: {
        if (e.num().get_den() != 1 && e.arg().kind() != Kind::Var) return atom(e);
        return pow((*this)(e.arg()), e.num());
      }
      case Kind::Exp: {
        auto [c, rest] = split_coeff(e.arg());
        if (c.get_den() == 1 && !rest.is_one() && !rest.is_zero()) return pow(atom(exp(rest)), c);
        return atom(e);
      }
      default:
        return atom(e);
    }
  }
};

}  // namespace

Expr simplify_rational(const Expr& e) {
  RationalForm r = normalize_rational(e);
  if (r.exact) return r.value;
  AtomAbstraction abs;
  Expr a = abs(e);
  if (abs.back.empty()) return r.value;
  RationalForm ra = normalize_rational(a);
  if (!ra.exact) return r.value;
  Expr out = subs(ra.value, abs.back);
  return tree_size(out) <= tree_size(e) ? out : e;
}

namespace {

Expr det_rec(std::vector<std::vector<Expr>> m) {
  int n = static_cast<int>(m.size());
  if (n == 1) return m[0][0];
  // Expansion along the sparsest row keeps symbolic sizes small.
  int best = 0, best_nz = n + 1;
  for (int i = 0; i < n; ++i) {
    int nz = 0;
    for (int j = 0; j < n; ++j) nz += !m[i][j].is_zero();
    if (nz < best_nz) best_nz = nz, best = i;
  }
  std::vector<Expr> terms;
  for (int j = 0; j < n; ++j) {
    if (m[best][j].is_zero()) continue;
    std::vector<std::vector<Expr>> minor;
    for (int i = 0; i < n; ++i) {
      if (i == best) continue;
      std::vector<Expr> row;
      for (int k = 0; k < n; ++k)
        if (k != j) row.push_back(m[i][k]);
      minor.push_back(std::move(row));
    }
    Expr t = m[best][j] * det_rec(std::move(minor));
    terms.push_back((best + j) % 2 ? -t : t);
  }
  return add(std::move(terms));
}

}  // namespace

Expr CoframeSet::determinant() const { return det_rec(m_); }

std::vector<VectorField> dual_frame(const CoframeSet& c, const ZeroTestProtocol& proto) {
  int n = c.size();
  auto a = c.matrix();
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n, Expr(0)));
  for (int i = 0; i < n; ++i) inv[i][i] = Expr(1);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    // Prefer constant pivots, then any entry that is not identically zero.
    for (int r = col; r < n && piv < 0; ++r)
      if (a[r][col].is_num() && !a[r][col].is_zero()) piv = r;
    for (int r = col; r < n && piv < 0; ++r) {
      if (a[r][col].is_zero()) continue;
      if (!is_identically_zero(a[r][col], proto).zero) piv = r;
    }
    if (piv < 0) throw SingularFrame("coframe matrix is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Expr pinv = simplify_rational(pow(a[col][col], Q(-1)));
    for (int k = 0; k < n; ++k) {
      a[col][k] = simplify_rational(a[col][k] * pinv);
      inv[col][k] = simplify_rational(inv[col][k] * pinv);
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Expr f = a[r][col];
      for (int k = 0; k < n; ++k) {
        if (!a[col][k].is_zero()) a[r][k] = simplify_rational(a[r][k] - f * a[col][k]);
        if (!inv[col][k].is_zero()) inv[r][k] = simplify_rational(inv[r][k] - f * inv[col][k]);
      }
    }
  }
  // a * inv_input = I, so X_j has components inv[k][j].
  std::vector<VectorField> out;
  for (int j = 0; j < n; ++j) {
    std::vector<Expr> comps(n);
    for (int k = 0; k < n; ++k) comps[k] = inv[k][j];
    out.emplace_back(c.chart(), std::move(comps));
  }
  return out;
}

std::vector<std::vector<long double>> dual_frame_at(const CoframeSet& c, const EvaluationPoint& pt) {
  int n = c.size();
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  M m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = evaluate_ext(c.matrix()[i][j], pt);
  Eigen::FullPivLU<M> lu(m);
  if (!lu.isInvertible()) throw SingularFrame("coframe matrix is singular at the sample point");
  M inv = lu.inverse();
  std::vector<std::vector<long double>> out(n, std::vector<long double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = inv(i, j);
  return out;
}

std::vector<Expr> coframe_derivatives(const Expr& f, const std::vector<VectorField>& dual) {
  std::vector<Expr> out;
  for (const auto& X : dual) out.push_back(X.apply(f));
  return out;
}

std::vector<Expr> coframe_derivatives(const Expr& f, const CoframeSet& c,
                                      const ZeroTestProtocol& proto) {
  return coframe_derivatives(f, dual_frame(c, proto));
}

ZeroCertificate form_is_zero(const Form& a, const ZeroTestProtocol& proto) {
  ZeroCertificate all;
  all.zero = true;
  all.path = ZeroPath::Exact;
  for (const auto& [idx, c] : a.terms()) {
    ZeroCertificate z = is_identically_zero(c, proto);
    if (z.path == ZeroPath::Numeric) all.path = ZeroPath::Numeric;
    all.samples = std::max(all.samples, z.samples);
    all.worst = std::max(all.worst, z.worst);
    all.worst_abs = std::max(all.worst_abs, z.worst_abs);
    if (!z.zero) {
      all.zero = false;
      all.witness = z.witness;
      return all;
    }
  }
  return all;
}

}  // namespace paracr
