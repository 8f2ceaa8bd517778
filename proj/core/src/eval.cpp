#include "paracr/eval.hpp"

#include <cmath>
#include <unordered_map>

namespace paracr {

namespace {

template <class T>
T pow_q(T x, const Q& q) {
  if (q.get_den() == 1) {
    long n = q.get_num().get_si();
    if (x == 0 && n < 0) throw EvalError("pole: zero to a negative power");
    T r = 1, b = n < 0 ? T(1) / x : x;
    unsigned long m = static_cast<unsigned long>(n < 0 ? -n : n);
    while (m) {
      if (m & 1) r *= b;
      b *= b;
      m >>= 1;
    }
    return r;
  }
  long num = q.get_num().get_si();
  long den = q.get_den().get_si();
  if (x == 0) {
    if (num < 0) throw EvalError("pole: zero to a negative power");
    return 0;
  }
  if (x < 0) {
    if (den % 2 == 0) throw EvalError("even root of a negative number");
    T mag = std::pow(-x, static_cast<T>(num) / static_cast<T>(den));
    return (num % 2 != 0) ? -mag : mag;
  }
  return std::pow(x, static_cast<T>(num) / static_cast<T>(den));
}

template <class T>
struct Eval {
  const EvaluationPoint& pt;
  std::unordered_map<const Node*, std::pair<T, T>> memo;  // value, scale

  std::pair<T, T> operator()(const Expr& e) {
    if (e.kind() == Kind::Num) {
      T v = static_cast<T>(e.num().get_num().get_d()) / static_cast<T>(e.num().get_den().get_d());
      return {v, std::fabs(v)};
    }
    if (e.kind() == Kind::Var) {
      auto it = pt.values.find(e.name());
      if (it == pt.values.end()) throw EvalError("unbound variable '" + e.name() + "'");
      T v = static_cast<T>(it->second);
      return {v, std::fabs(v)};
    }
    auto m = memo.find(e.node());
    if (m != memo.end()) return m->second;
    auto r = compute(e);
    if (!std::isfinite(static_cast<double>(r.first))) throw EvalError("non-finite value");
    memo.emplace(e.node(), r);
    return r;
  }

  std::pair<T, T> compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Sum: {
        // Neumaier compensated summation.
        T s = 0, c = 0, sc = 0;
        for (const auto& a : e.args()) {
          auto [v, w] = (*this)(a);
          T t = s + v;
          if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
          else
            c += (v - t) + s;
          s = t;
          sc += w;
        }
        return {s + c, sc};
      }
      case Kind::Product: {
        T p = 1, sc = 1;
        for (const auto& a : e.args()) {
          auto [v, w] = (*this)(a);
          p *= v;
          sc *= w;
        }
        return {p, sc};
      }
      case Kind::Pow: {
        auto [v, w] = (*this)(e.arg(0));
        T r = pow_q<T>(v, e.num());
        T s = e.num() > 0 ? pow_q<T>(w, e.num()) : std::fabs(r);
        return {r, std::max(std::fabs(r), std::fabs(s))};
      }
      case Kind::PowX: {
        T b = (*this)(e.arg(0)).first;
        T x = (*this)(e.arg(1)).first;
        if (b < 0) throw EvalError("negative base with symbolic exponent");
        if (b == 0 && x <= 0) throw EvalError("pole: zero to a non-positive power");
        T r = std::pow(b, x);
        return {r, std::fabs(r)};
      }
      case Kind::Exp: {
        T r = std::exp((*this)(e.arg(0)).first);
        return {r, r};
      }
      case Kind::Log: {
        T a = (*this)(e.arg(0)).first;
        if (a <= 0) throw EvalError("log of a non-positive number");
        T r = std::log(a);
        return {r, std::fabs(r)};
      }
      case Kind::Atan: {
        T r = std::atan((*this)(e.arg(0)).first);
        return {r, std::fabs(r)};
      }
      case Kind::Sin: {
        T r = std::sin((*this)(e.arg(0)).first);
        return {r, std::fabs(r)};
      }
      case Kind::Cos: {
        T r = std::cos((*this)(e.arg(0)).first);
        return {r, std::fabs(r)};
      }
      case Kind::Sgn: {
        T a = (*this)(e.arg(0)).first;
        T r = a > 0 ? 1 : (a < 0 ? -1 : 0);
        return {r, std::fabs(r)};
      }
      default:
        break;
    }
    throw EvalError("unsupported node");
  }
};

}  // namespace

Evaluation evaluate(const Expr& e, const EvaluationPoint& pt) {
  Evaluation out;
  Eval<double> d{pt, {}};
  Eval<long double> l{pt, {}};
  out.value = d(e).first;
  auto r = l(e);
  out.value_ext = r.first;
  out.scale = r.second;
  return out;
}

double evaluate_double(const Expr& e, const EvaluationPoint& pt) {
  Eval<double> d{pt, {}};
  return d(e).first;
}

long double evaluate_ext(const Expr& e, const EvaluationPoint& pt) {
  Eval<long double> l{pt, {}};
  return l(e).first;
}

long double real_pow(long double x, const Q& q) { return pow_q<long double>(x, q); }

}  // namespace paracr
