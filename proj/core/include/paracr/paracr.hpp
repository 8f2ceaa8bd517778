#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "paracr/exterior.hpp"
#include "paracr/expr.hpp"
#include "paracr/zero_test.hpp"

namespace paracr {

// A free parameter sampled from an interval, or pinned to a rational value.
struct Param {
  std::string name;
  long double lo = 0, hi = 0;
  std::optional<Q> value;
};

// Replaces the jet coordinate p by a function p = P(s) of a fiber coordinate s,
// used when F and H are only known parametrically.
struct FiberChart {
  std::string coord;
  Expr p_of;
};

class InadmissiblePair : public DomainError {
 public:
  using DomainError::DomainError;
};

class PdePair {
 public:
  PdePair() = default;
  PdePair(Expr F, Expr H, std::vector<Param> params = {}, SampleBox box = {},
          std::optional<FiberChart> fiber = std::nullopt);

  const Expr& F() const { return F_; }
  const Expr& H() const { return H_; }
  const std::vector<Param>& params() const { return params_; }
  const SampleBox& box() const { return box_; }
  const std::optional<FiberChart>& fiber() const { return fiber_; }

  // (x, y, z, p, r), or (x, y, z, s, r) with a fiber chart.
  const Chart& chart() const { return chart_; }
  // p as an expression on the chart.
  Expr p() const;
  // Partial derivative with respect to p, holding x, y, z, r fixed.
  Expr dp(const Expr& e) const;
  Expr partial(const Expr& e, const std::string& v) const { return v == "p" ? dp(e) : diff(e, v); }

  Expr D(const Expr& e) const;
  Expr Delta(const Expr& e) const;

  // Protocol with the pair's sampling box merged in.
  ZeroTestProtocol protocol(ZeroTestProtocol base) const;

 private:
  Expr F_, H_;
  std::vector<Param> params_;
  SampleBox box_;
  std::optional<FiberChart> fiber_;
  Chart chart_;
};

// Pins parameters with a fixed value into F and H.
PdePair specialize(const PdePair& pair);

// F_r = 0, F_pp != 0, D^3 F = Delta H.
struct AdmissibilityReport {
  ZeroCertificate fr_zero;
  ZeroCertificate fpp_zero;
  ZeroCertificate integrable;
  Expr residual;
  bool fr_ok = false, fpp_ok = false, integrable_ok = false;
  bool admissible() const { return fr_ok && fpp_ok && integrable_ok; }
};

Expr integrability_residual(const PdePair& pair);
AdmissibilityReport check_admissibility(const PdePair& pair, const ZeroTestProtocol& proto);

CoframeSet initial_coframe(const PdePair& pair);
// d(omega^mu) written in the initial coframe, from the general closed-form expressions.
std::vector<Form> initial_structure(const PdePair& pair);

struct InvariantBundle {
  Expr A, B, C, Ct, I1, I2, I3;
  Expr C4, C5;
};

InvariantBundle invariants(const PdePair& pair, const ZeroTestProtocol& proto = {});

// A - 27 I1, B - 27 I2, C - 3 I3.
std::array<ZeroCertificate, 3> check_cross_relations(const InvariantBundle& inv,
                                                      const ZeroTestProtocol& proto);

enum class Branch { Flat, NonflatI3, NonflatI2, Inadmissible };
std::string to_string(Branch b);

struct BranchLabel {
  Branch branch = Branch::Inadmissible;
  // -sgn(r) on the sampling box; 0 when r changes sign there.
  int eps = 0;
  InvariantBundle inv;
  ZeroCertificate i3, i2, i1;
};

BranchLabel classify(const PdePair& pair, const ZeroTestProtocol& proto);

// -sgn(r) when r keeps one sign on the protocol box, else 0.
int epsilon_on_box(const ZeroTestProtocol& proto, const std::string& rname = "r");

// Solution manifold z = Q(x,y,a,b,c) (parameters side) or c = P(a,b,x,y,z) (variables side).
enum class Side { Parameters, Variables };

struct SolutionManifold {
  Side side = Side::Parameters;
  Expr expr;
};

struct LeviResult {
  std::array<std::array<Expr, 2>, 2> matrix;
  Expr det;
  int rank = 0;
};

LeviResult levi_matrix(const SolutionManifold& m, const ZeroTestProtocol& proto);

struct NondegeneracyResult {
  Expr det;
  bool nondegenerate = false;
  ZeroCertificate cert;
};

NondegeneracyResult two_nondegeneracy(const SolutionManifold& m, const ZeroTestProtocol& proto);

}  // namespace paracr
