#include <doctest.h>

#include <Eigen/Dense>

#include <random>

#include "helpers.hpp"
#include "paracr/exterior.hpp"
#include "paracr/models.hpp"
#include "paracr/paracr.hpp"

using namespace paracr;
using testutil::exact_equal;
using testutil::P;

namespace {

const Chart& jet() {
  static const Chart c({"x", "y", "z", "p", "r"});
  return c;
}

Form dv(const std::string& v) { return Form::coord(jet(), v); }

// Flat representative: omega^1 = -dz + p dx + p^2/4 dy, ...
std::vector<Form> flat_forms() {
  Expr p = var("p"), r = var("r");
  return {-dv("z") + p * dv("x") + P("p^2/4") * dv("y"), dv("p") - r * dv("x") - P("p*r/2") * dv("y"),
          -dv("r") + P("r^2/2") * dv("y"), dv("x") + P("p/2") * dv("y"), num(-1, 2) * dv("y")};
}

bool forms_equal(const Form& a, const Form& b, const ZeroTestProtocol& proto = {}) {
  return form_is_zero(a - b, proto).zero;
}

}  // namespace

TEST_CASE("wedge products are alternating") {
  CHECK(wedge(dv("x"), dv("x")).is_zero());
  CHECK((wedge(dv("x"), dv("y")) + wedge(dv("y"), dv("x"))).is_zero());
  Form a = var("p") * dv("x") + dv("z"), b = dv("r") - var("x") * dv("y");
  CHECK(form_is_zero(wedge(a, b) + wedge(b, a), {}).zero);
  CHECK(wedge(a, b).degree() == 2);
}

TEST_CASE("flat coframe satisfies d omega^1 = omega^2 ^ omega^4") {
  auto w = flat_forms();
  CHECK(forms_equal(d(w[0]), wedge(w[1], w[3])));
}

TEST_CASE("exterior derivative squares to zero") {
  CHECK(d(dv("x")).is_zero());
  CHECK(form_is_zero(d(d(Form::function(jet(), P("exp(x*y)*sin(p) + r^3/z")))), {}).zero);
  PdePair ii(P("p^2/4"), P("r^3"), {}, SampleBox().set("r", 0.5, 2).set("p", 0.5, 2));
  CoframeSet w = initial_coframe(ii);
  ZeroTestProtocol proto = ii.protocol(ZeroTestProtocol{});
  proto.samples = 50;
  ZeroCertificate z = form_is_zero(d(d(w[2])), proto);
  CHECK(z.zero);
  CHECK(z.worst < 1e-9);
}

TEST_CASE("initial coframe derivatives match the closed-form structure equations") {
  for (const auto& m : catalog()) {
    PdePair pair = model_pair(m, std::nullopt);
    CoframeSet w = initial_coframe(pair);
    auto st = initial_structure(pair);
    ZeroTestProtocol proto = pair.protocol(ZeroTestProtocol{});
    for (int k = 0; k < 5; ++k) CHECK_MESSAGE(forms_equal(d(w[k]), st[k], proto), m.id << " d omega^" << k + 1);
  }
}

TEST_CASE("vector field brackets") {
  VectorField dx = VectorField::partial(jet(), 0), dy = VectorField::partial(jet(), 1);
  VectorField xy = bracket(dx, dy);
  for (const auto& c : xy.comps()) CHECK(c.is_zero());
  const ModelSpec& flat = model("flat");
  auto field = [&](int i) {
    std::vector<Expr> c;
    for (const auto& s : flat.generators[i - 1]) c.push_back(s);
    return VectorField(jet(), c);
  };
  auto same = [](const VectorField& a, const VectorField& b) {
    for (int k = 0; k < 5; ++k)
      if (!exact_equal(a[k], b[k])) return false;
    return true;
  };
  CHECK(same(bracket(field(3), field(7)), Expr(2) * field(10)));
  CHECK(same(bracket(field(5), field(7)), Expr(2) * field(9)));
  CHECK(same(bracket(field(1), field(2)), VectorField::zero(jet())));
}

TEST_CASE("Lie derivatives of 1-forms") {
  VectorField dx = VectorField::partial(jet(), 0), dp = VectorField::partial(jet(), 3);
  CHECK(lie_derivative(dx, dv("x")).is_zero());
  PdePair flat(P("p^2/4"), Expr(0));
  CoframeSet w = initial_coframe(flat);
  CHECK(form_is_zero(wedge(lie_derivative(dx, w[0]), w[0]), {}).zero);
  Form L = lie_derivative(dp, w[0]);
  CHECK(forms_equal(L, -dv("x") - P("p/2") * dv("y")));
  Form lw = wedge(L, w[0]);
  CHECK(lw.degree() == 2);
  CHECK(!form_is_zero(lw, {}).zero);
}

TEST_CASE("Lie derivative obeys the Cartan formula") {
  VectorField X(jet(), {P("x*y"), P("z^2"), P("sin(p)"), P("r*x"), P("exp(y)")});
  std::vector<Form> forms = {P("p*r") * dv("x") + P("cos(z)") * dv("r"),
                             wedge(P("x + r") * dv("y"), dv("p")) + P("z") * wedge(dv("x"), dv("r"))};
  for (const auto& a : forms) {
    Form cartan = d(interior(X, a)) + interior(X, d(a));
    CHECK(forms_equal(lie_derivative(X, a), cartan));
  }
}

TEST_CASE("dual frames") {
  CoframeSet coords(jet(), {dv("x"), dv("y"), dv("z"), dv("p"), dv("r")});
  auto duals = dual_frame(coords);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(exact_equal(duals[i][j], Expr(i == j ? 1 : 0)));

  CoframeSet flat(jet(), flat_forms());
  std::mt19937_64 rng(11);
  std::set<std::string> vars = {"x", "y", "z", "p", "r"};
  for (int s = 0; s < 20; ++s) {
    EvaluationPoint pt = random_point(vars, SampleBox{}, rng);
    auto X = dual_frame_at(flat, pt);
    Eigen::Matrix<long double, 5, 5> M, Xm;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        M(i, j) = evaluate_ext(flat.matrix()[i][j], pt);
        Xm(i, j) = X[i][j];
      }
    CHECK(static_cast<double>((M * Xm - Eigen::Matrix<long double, 5, 5>::Identity()).cwiseAbs().maxCoeff()) < 1e-12);
  }

  CoframeSet bad(jet(), {dv("x"), dv("y"), dv("z"), dv("p"), dv("p") + dv("x")});
  CHECK_THROWS_AS(dual_frame(bad), SingularFrame);
}

TEST_CASE("coframe derivatives") {
  CoframeSet coords(jet(), {dv("x"), dv("y"), dv("z"), dv("p"), dv("r")});
  auto fx = coframe_derivatives(var("x"), coords);
  for (int i = 0; i < 5; ++i) CHECK(exact_equal(fx[i], Expr(i == 0 ? 1 : 0)));

  PdePair ii(P("p^2/4"), P("r^3"));
  CoframeSet w = initial_coframe(ii);
  Expr C = P("6*r");
  auto c = coframe_derivatives(C, w);
  CHECK(exact_equal(c[2], Expr(6)));
  CHECK(exact_equal(c[3], P("6*r^3")));
  CHECK(exact_equal(c[4], P("3*r^2*(1 + p*r)")));
  Form rebuilt(jet(), 1);
  for (int k = 0; k < 5; ++k) rebuilt += c[k] * w[k];
  CHECK(forms_equal(d(Form::function(jet(), C)), rebuilt));
}
