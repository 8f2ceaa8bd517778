#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paracr/exterior.hpp"
#include "paracr/paracr.hpp"

namespace paracr {

// c^k_ij for i < j with d(theta^k) = sum_{i<j} c^k_ij theta^i ^ theta^j. Indices are 0-based.
class StructureConstants {
 public:
  explicit StructureConstants(int n = 5) : n_(n) {}
  int dim() const { return n_; }
  // Antisymmetric in (i, j).
  Expr get(int k, int i, int j) const;
  void add(int k, int i, int j, const Expr& v);
  void set(int k, int i, int j, const Expr& v);
  const std::map<std::array<int, 3>, Expr>& entries() const { return c_; }
  StructureConstants map(const std::function<Expr(const Expr&)>& f) const;

 private:
  int n_;
  std::map<std::array<int, 3>, Expr> c_;
};

// Constant systems of the non-flat branches.
StructureConstants homo1(const Expr& eps);
StructureConstants homo2(const Expr& eps, const Expr& s);
// Flat structure equations with the auxiliary forms fixed to varpi_2 = r omega^5.
StructureConstants flat_structure();

struct JacobiResult {
  bool ok = true;
  double worst = 0;
  std::vector<std::array<int, 4>> failures;  // (i, j, k, l), 0-based
};

// Each Jacobi sum must pass the zero test (exact for polynomial entries).
JacobiResult jacobi_check(const StructureConstants& sc, const ZeroTestProtocol& proto = {});

class ParamDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct ParamSpec {
  std::string name;
  long double lo = 0, hi = 0;
  bool unbounded_above = false;
  Q default_value;
};

struct ModelSpec {
  std::string id;
  std::string target;  // flat | homo1 | homo2
  PdePair pair;        // parameters left symbolic
  std::vector<ParamSpec> params;
  // Realization chart and coframe; empty coframe means the initial coframe of the pair.
  Chart chart;
  std::vector<std::vector<Expr>> coframe;
  SampleBox chart_box;
  std::vector<std::vector<Expr>> S;
  std::optional<Expr> S11_printed;
  Expr r_expr;
  std::map<std::string, Expr> defs;
  std::vector<std::vector<Expr>> generators;
  std::map<std::string, Expr> generator_bindings;
  // Upper-triangle table entries [X_i, X_j] as expressions linear in X1..Xn.
  std::map<std::pair<int, int>, Expr> table;
};

const std::vector<ModelSpec>& catalog();
const ModelSpec& model(const std::string& id);
std::string catalog_text();

// Throws ParamDomainError when b lies outside the model's parameter domain.
void check_param(const ModelSpec& m, const std::optional<Q>& b);
Q default_param(const ModelSpec& m);

// Bindings for b and eps; defs are expanded first.
Expr instantiate(const ModelSpec& m, const Expr& e, const std::optional<Q>& b, int eps);

PdePair model_pair(const ModelSpec& m, const std::optional<Q>& b);
CoframeSet model_coframe(const ModelSpec& m, const std::optional<Q>& b);
std::vector<std::vector<Expr>> model_S(const ModelSpec& m, const std::optional<Q>& b, int eps);
ZeroTestProtocol model_protocol(const ModelSpec& m, const ZeroTestProtocol& base);

// Realization parameter s for the homo2 models, with the closed-form derivative.
struct SValue {
  long double s = 0;
  long double ds = 0;
};
SValue s_of_b(const std::string& id, long double b);
Expr s_expr(const std::string& id, const Q& b);

StructureConstants target_structure(const ModelSpec& m, const std::optional<Q>& b, int eps);

struct ResidualLine {
  std::string name;
  bool pass = false;
  ZeroCertificate cert;
  std::string detail;
};

struct RealizationReport {
  std::string id;
  int eps = 0;
  std::optional<Q> b;
  bool pass = true;
  std::vector<ResidualLine> lines;
};

// theta = S omega, then d(theta^k) - sum c^k_ij theta^i ^ theta^j on the model box.
// eps = 0 resolves eps = -sgn(r) on the box.
RealizationReport verify_realization(const ModelSpec& m, const std::optional<Q>& b, int eps,
                                     const ZeroTestProtocol& proto);

// Block-zero shape of the structure group G0.
bool in_G0_pattern(const std::vector<std::vector<Expr>>& S);

// Residuals of the implicit defining equations for f and h of model iiib, evaluated
// on the explicit general solution at random samples.
struct ImplicitCheck {
  double worst_f = 0, worst_h = 0;
  int samples = 0;
};
ImplicitCheck check_iiib_implicit(const Q& b, int samples, std::uint64_t seed);

}  // namespace paracr
