#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "paracr/eval.hpp"
#include "paracr/expr.hpp"
#include "paracr/zero_test.hpp"

namespace paracr {

class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> coords);

  int dim() const { return static_cast<int>(d_->coords.size()); }
  const std::vector<std::string>& coords() const { return d_->coords; }
  const std::string& name(int i) const { return d_->coords[i]; }
  // -1 when absent.
  int index(const std::string& name) const;
  Expr coord(int i) const { return var(d_->coords[i]); }

  bool operator==(const Chart& o) const { return d_ == o.d_ || d_->coords == o.d_->coords; }
  bool operator!=(const Chart& o) const { return !(*this == o); }

 private:
  struct Data {
    std::vector<std::string> coords;
  };
  std::shared_ptr<const Data> d_ = std::make_shared<const Data>();
};

using Index = std::vector<int>;

class VectorField;

class Form {
 public:
  Form() = default;
  Form(Chart chart, int degree) : chart_(std::move(chart)), deg_(degree) {}

  static Form function(const Chart& c, const Expr& f);
  // dx_i
  static Form coord(const Chart& c, int i);
  static Form coord(const Chart& c, const std::string& name);
  // Sum of f_i dx_i.
  static Form one_form(const Chart& c, const std::vector<Expr>& coeffs);

  const Chart& chart() const { return chart_; }
  int degree() const { return deg_; }
  const std::map<Index, Expr>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  Expr coeff(const Index& idx) const;
  // Coefficient of dx_i for a 1-form.
  Expr coeff(int i) const { return coeff(Index{i}); }
  // Adds c to the coefficient of the (possibly unsorted) index tuple.
  void add_term(Index idx, const Expr& c);

  Form operator+(const Form& o) const;
  Form operator-(const Form& o) const;
  Form operator-() const;
  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);

  Form map(const std::function<Expr(const Expr&)>& f) const;
  std::string to_string() const;

 private:
  Chart chart_;
  int deg_ = 0;
  std::map<Index, Expr> t_;
};

Form operator*(const Expr& f, const Form& a);
Form wedge(const Form& a, const Form& b);
Form wedge(const std::vector<Form>& fs);
Form d(const Form& a);

class VectorField {
 public:
  VectorField() = default;
  VectorField(Chart chart, std::vector<Expr> comps);
  static VectorField zero(const Chart& c);
  // Partial derivative along coordinate i.
  static VectorField partial(const Chart& c, int i);

  const Chart& chart() const { return chart_; }
  const std::vector<Expr>& comps() const { return v_; }
  const Expr& operator[](int i) const { return v_[i]; }

  Expr apply(const Expr& f) const;
  VectorField operator+(const VectorField& o) const;
  VectorField operator-(const VectorField& o) const;
  VectorField map(const std::function<Expr(const Expr&)>& f) const;
  std::string to_string() const;

 private:
  Chart chart_;
  std::vector<Expr> v_;
};

VectorField operator*(const Expr& f, const VectorField& X);
VectorField bracket(const VectorField& X, const VectorField& Y);
Form interior(const VectorField& X, const Form& a);
Form lie_derivative(const VectorField& X, const Form& a);

class SingularFrame : public DomainError {
 public:
  using DomainError::DomainError;
};

// n independent 1-forms on an n-dimensional chart.
class CoframeSet {
 public:
  CoframeSet() = default;
  CoframeSet(Chart chart, std::vector<Form> forms);

  const Chart& chart() const { return chart_; }
  const std::vector<Form>& forms() const { return forms_; }
  const Form& operator[](int i) const { return forms_[i]; }
  int size() const { return static_cast<int>(forms_.size()); }
  // Row i holds the coefficients of forms[i].
  const std::vector<std::vector<Expr>>& matrix() const { return m_; }
  Expr determinant() const;

 private:
  Chart chart_;
  std::vector<Form> forms_;
  std::vector<std::vector<Expr>> m_;
};

// Simplifier applied to intermediate entries during symbolic elimination.
Expr simplify_rational(const Expr& e);

// Vector fields X_j with forms[i](X_j) = delta_ij. Throws SingularFrame when the
// matrix is singular on the sampling box of proto.
std::vector<VectorField> dual_frame(const CoframeSet& c, const ZeroTestProtocol& proto = {});

// Pointwise numeric inverse of the coefficient matrix; column j holds X_j.
std::vector<std::vector<long double>> dual_frame_at(const CoframeSet& c, const EvaluationPoint& pt);

// f_mu with df = sum f_mu forms[mu].
std::vector<Expr> coframe_derivatives(const Expr& f, const std::vector<VectorField>& dual);
std::vector<Expr> coframe_derivatives(const Expr& f, const CoframeSet& c,
                                      const ZeroTestProtocol& proto = {});

// Every coefficient passes the zero test; worst residual collected in the certificate.
ZeroCertificate form_is_zero(const Form& a, const ZeroTestProtocol& proto);

}  // namespace paracr
