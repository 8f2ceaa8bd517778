#include <doctest.h>

#include "helpers.hpp"
#include "paracr/pairfile.hpp"

using namespace paracr;
using testutil::exact_equal;
using testutil::P;

TEST_CASE("pair file with comments and boxes") {
  PdePair p = parse_pair(
      "# flat model\n"
      "F = z_x^2/4   # trailing comment\n"
      "\n"
      "H = 0\n"
      "box r in [0.5, 2]\n");
  CHECK(exact_equal(p.F(), P("p^2/4")));
  CHECK(p.H().is_zero());
  auto [lo, hi] = p.box().range("r");
  CHECK(lo == doctest::Approx(0.5));
  CHECK(hi == doctest::Approx(2));
}

TEST_CASE("free and pinned parameters") {
  PdePair free = parse_pair("F = p^b/4\nH = (2 - b)*r^2/p\nparam b in (1, 2)\n");
  REQUIRE(free.params().size() == 1);
  CHECK(free.params()[0].name == "b");
  CHECK(!free.params()[0].value);
  PdePair pinned = with_param(free, "", Q(3, 2));
  REQUIRE(pinned.params()[0].value);
  CHECK(*pinned.params()[0].value == Q(3, 2));
  CHECK_THROWS(with_param(free, "c", Q(1)));

  PdePair fixed = parse_pair("F = p^b/4\nH = (2 - b)*r^2/p\nparam b = 3/2\n");
  CHECK(*fixed.params()[0].value == Q(3, 2));
}

TEST_CASE("fiber chart") {
  PdePair p = parse_pair(
      "fiber theta\n"
      "p = exp(theta)*(cos(theta) - sin(theta))\n"
      "F = exp(theta)*(sin(theta) + cos(theta))\n"
      "H = r^2\n");
  REQUIRE(p.fiber());
  CHECK(p.fiber()->coord == "theta");
  CHECK(p.chart().name(3) == "theta");
}

TEST_CASE("malformed pair files report the line") {
  auto line_of = [](const std::string& text) {
    try {
      parse_pair(text);
    } catch (const PairFileError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("F = p^2/4\nH = r^(\n") == 2);
  CHECK(line_of("F = p^2/4\n") == 1);
  CHECK(line_of("F = p^2/4\nH = 0\nwibble\n") == 3);
  CHECK(line_of("F = p^2/4\nH = 0\nparam b in (2, 1)\n") == 3);
  CHECK(line_of("F = p^2/4\nH = 0\nbox r in [1]\n") == 3);
  CHECK(line_of("F = p^2/4\nF = p^2\nH = 0\n") == 2);
}

TEST_CASE("shipped pair files load") {
  for (const char* name : {"flat", "ii", "iiia", "iiib", "nonintegrable"}) {
    std::string path = std::string(PARACR_PAIRS_DIR) + "/" + name + ".pair";
    CHECK_NOTHROW(load_pair(path));
  }
  CHECK_THROWS(load_pair(std::string(PARACR_PAIRS_DIR) + "/missing.pair"));
}
