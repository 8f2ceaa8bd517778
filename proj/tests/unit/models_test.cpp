#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "paracr/models.hpp"

using namespace paracr;
using testutil::exact_equal;
using testutil::P;

namespace {

bool all_pass(const RealizationReport& r) {
  for (const auto& l : r.lines)
    if (!l.pass) return false;
  return r.pass;
}

}  // namespace

TEST_CASE("structure constants of the constant-coefficient systems") {
  StructureConstants h1 = homo1(Expr(1));
  CHECK(exact_equal(h1.get(0, 0, 2), Expr(-6)));
  CHECK(exact_equal(h1.get(0, 1, 3), Expr(1)));
  CHECK(exact_equal(h1.get(0, 3, 1), Expr(-1)));
  StructureConstants h2 = homo2(Expr(-1), Expr(0));
  CHECK(exact_equal(h2.get(1, 1, 4), Expr(1)));
  for (int e : {1, -1})
    for (int s : {-2, 0, 1}) CHECK(exact_equal(homo2(Expr(e), Expr(s)).get(4, 0, 1), Expr(1)));
}

TEST_CASE("Jacobi identity for both constant-coefficient systems") {
  for (int e : {1, -1}) {
    CHECK(jacobi_check(homo1(Expr(e))).ok);
    for (int s : {-2, 0, 1}) CHECK(jacobi_check(homo2(Expr(e), Expr(s))).ok);
    CHECK(jacobi_check(homo2(Expr(e), var("s"))).ok);
  }
}

TEST_CASE("Jacobi check detects a flipped constant") {
  StructureConstants h = homo1(Expr(1));
  h.set(0, 1, 3, Expr(-1));
  JacobiResult r = jacobi_check(h);
  CHECK(!r.ok);
  CHECK(!r.failures.empty());
}

TEST_CASE("Jacobi sums with a free eps leave multiples of eps^2 - 1") {
  JacobiResult r = jacobi_check(homo1(var("eps")));
  CHECK(!r.ok);
}

TEST_CASE("realizations of the catalog models") {
  ZeroTestProtocol proto;
  proto.samples = 50;
  CHECK(all_pass(verify_realization(model("flat"), std::nullopt, 0, proto)));
  RealizationReport ii = verify_realization(model("ii"), std::nullopt, 0, proto);
  CHECK(ii.eps == -1);
  CHECK(all_pass(ii));
  CHECK(all_pass(verify_realization(model("iiia"), Q(3, 2), 0, proto)));
  CHECK(all_pass(verify_realization(model("iiia"), Q(5, 4), 0, proto)));
  RealizationReport b = verify_realization(model("iiib"), Q(3), 0, proto);
  CHECK(b.eps == -1);
  CHECK(all_pass(b));
}

TEST_CASE("(ii) realization identities hold for both signs of eps") {
  CHECK(verify_realization(model("ii"), std::nullopt, 1, ZeroTestProtocol{}).pass);
  CHECK(verify_realization(model("ii"), std::nullopt, -1, ZeroTestProtocol{}).pass);
}

TEST_CASE("mismatched eps between S and the target system is detected") {
  ModelSpec m = model("ii");
  for (auto& row : m.S)
    for (auto& e : row) e = subs(e, {{"eps", Expr(1)}});
  CHECK(!verify_realization(m, std::nullopt, -1, ZeroTestProtocol{}).pass);
}

TEST_CASE("printed (iiib) S11 entry fails the structure equations") {
  const ModelSpec& m = model("iiib");
  REQUIRE(m.S11_printed.has_value());
  ModelSpec printed = m;
  printed.S[0][0] = *m.S11_printed;
  CHECK(!verify_realization(printed, Q(3), -1, ZeroTestProtocol{}).pass);
  // The corrected entry is the printed one times 3 (1 + b^2).
  Expr ratio = m.S[0][0] / *m.S11_printed;
  CHECK(is_identically_zero(instantiate(m, ratio, Q(3), -1) - 30, model_protocol(m, ZeroTestProtocol{})).zero);
}

TEST_CASE("realization matrices lie in the structure group pattern") {
  for (const auto& m : catalog()) CHECK_MESSAGE(in_G0_pattern(model_S(m, std::nullopt, -1)), m.id);
  auto S = model_S(model("ii"), std::nullopt, -1);
  S[0][1] = Expr(1);
  CHECK(!in_G0_pattern(S));
}

TEST_CASE("(iiib) coframe is nondegenerate on its chart box") {
  const ModelSpec& m = model("iiib");
  CoframeSet w = model_coframe(m, Q(3));
  ZeroTestProtocol proto = model_protocol(m, ZeroTestProtocol{});
  proto.samples = 50;
  std::mt19937_64 rng(3);
  auto vars = free_vars(w.determinant());
  for (int i = 0; i < 50; ++i) CHECK(std::fabs(evaluate_ext(w.determinant(), random_point(vars, proto.box, rng))) > 1e-12);
}

TEST_CASE("s(b) values") {
  const long double bound = -3.0L * std::pow(2.0L, -5.0L / 3.0L);
  CHECK(static_cast<double>(s_of_b("iiia", 1).s) == doctest::Approx(static_cast<double>(bound)).epsilon(1e-14));
  CHECK(static_cast<double>(s_of_b("iiia", 1).s) == doctest::Approx(-0.944940).epsilon(1e-6));
  CHECK(static_cast<double>(s_of_b("iiia", 1.5L).s) == doctest::Approx(-21.0 / 8 * std::pow(2.5, -2.0 / 3)).epsilon(1e-14));
  CHECK(static_cast<double>(s_of_b("iiia", 1.5L).s) == doctest::Approx(-1.425069).epsilon(1e-6));
  CHECK(std::fabs(static_cast<double>(s_of_b("iiib", std::sqrt(3.0L)).s)) < 1e-15);
  CHECK(static_cast<double>(s_of_b("iiib", 3).s) == doctest::Approx(-9 / std::pow(108.0, 2.0 / 3)).epsilon(1e-14));
  CHECK(static_cast<double>(s_of_b("iiib", 3).s) == doctest::Approx(-0.396850).epsilon(1e-6));
  CHECK(evaluate_double(s_expr("iiia", Q(3, 2)), {}) == doctest::Approx(static_cast<double>(s_of_b("iiia", 1.5L).s)));
}

TEST_CASE("closed-form ds/db agrees with a central difference") {
  for (const char* id : {"iiia", "iiib"}) {
    for (long double b : {1.2L, 1.5L, 1.8L}) {
      if (std::string(id) == "iiib") b *= 2;
      long double h = 1e-6L;
      long double fd = (s_of_b(id, b + h).s - s_of_b(id, b - h).s) / (2 * h);
      CHECK(static_cast<double>(s_of_b(id, b).ds) == doctest::Approx(static_cast<double>(fd)).epsilon(1e-7));
    }
  }
}

TEST_CASE("parameter domains") {
  const ModelSpec& a = model("iiia");
  CHECK_THROWS_AS(check_param(a, Q(1)), ParamDomainError);
  CHECK_THROWS_AS(check_param(a, Q(2)), ParamDomainError);
  CHECK_NOTHROW(check_param(a, Q(3, 2)));
  CHECK_THROWS_AS(check_param(model("iiib"), Q(0)), ParamDomainError);
  CHECK_NOTHROW(check_param(model("iiib"), Q(25)));
  CHECK(default_param(a) == Q(3, 2));
  CHECK_THROWS(model("iv"));
}

TEST_CASE("model pairs instantiate the parameter") {
  PdePair p = model_pair(model("iiia"), Q(3, 2));
  CHECK(exact_equal(p.F(), P("p^(3/2)/4")));
  CHECK(exact_equal(p.H(), P("r^2/(2*p)")));
}

TEST_CASE("(iiib) implicit defining equations hold on the explicit solution") {
  for (int b : {1, 3}) {
    ImplicitCheck c = check_iiib_implicit(Q(b), 100, 20231117);
    CHECK(c.samples == 100);
    CHECK(c.worst_f < 1e-9);
    CHECK(c.worst_h < 1e-9);
  }
}

TEST_CASE("catalog text is valid and lists four models") {
  CHECK(catalog().size() == 4);
  CHECK(catalog_text().find("\"iiib\"") != std::string::npos);
}
