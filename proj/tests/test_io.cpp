#include <random>
#include <sstream>

#include "doctest.h"
#include "kam/errors.hpp"
#include "kam/io.hpp"
#include "support.hpp"

using namespace kam;

TEST_CASE("zero field is header only") {
  std::ostringstream os;
  write_field(os, FourierField(2, 0.5, 3));
  CHECK(os.str() == "torusfield v1 n=2 s=0.5 kmax=3\n");
  std::istringstream is(os.str());
  auto back = read_field(is);
  CHECK(back.is_zero());
  CHECK(back.kmax() == 3);
  CHECK(back.width() == 0.5);
}

TEST_CASE("random fields round-trip exactly") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    auto f = kt::random_field(rng, n, 1 + trial % 3, kt::uniform(rng, 0.1, 1.0), kt::uniform(rng, 1e-9, 10.0), 0.8);
    std::ostringstream os;
    write_field(os, f);
    std::istringstream is(os.str());
    auto g = read_field(is);
    CHECK(g.coefficients_equal(f));
    CHECK(g.width() == f.width());
    CHECK(g.kmax() == f.kmax());
  }
}

TEST_CASE("reader accepts both members of a pair and rebuilds the other") {
  std::istringstream one("torusfield v1 n=2 s=1 kmax=1\n-1 0 0.5 0.25 0 0\n");
  auto f = read_field(one);
  const int k[] = {1, 0};
  CHECK(f.coeff(k, 0) == Complex(0.5, -0.25));
  std::istringstream both("torusfield v1 n=2 s=1 kmax=1\n-1 0 0.5 0.25 0 0\n1 0 0.5 -0.25 0 0\n");
  CHECK(read_field(both).coefficients_equal(f));
}

TEST_CASE("reader errors") {
  auto bad = [](const std::string& s) {
    std::istringstream is(s);
    return read_field(is);
  };
  CHECK_THROWS_AS(bad(""), ParseError);
  CHECK_THROWS_AS(bad("torusfield v2 n=2 s=1 kmax=1\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 kmax=1\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n1 0 0.5 0.1\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n2 0 0.5 0.1 0 0\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n1 0 0.5 x 0 0\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n1 0 0.5 0 0 0\n1 0 0.5 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n1 0 0.5 0.1 0 0\n-1 0 0.5 0.1 0 0\n"), RealityError);
  CHECK_THROWS_AS(bad("torusfield v1 n=2 s=1 kmax=1\n0 0 0.5 0.1 0 0\n"), RealityError);
  try {
    bad("torusfield v1 n=2 s=1 kmax=1\n\n1 0 0.5 0 0 0\n1 1 oops 0 0 0\n");
    FAIL("no throw");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("frequency round trip and validation") {
  auto a = kt::golden();
  std::ostringstream os;
  write_frequency(os, a);
  std::istringstream is(os.str());
  auto b = read_frequency(is);
  CHECK(b.alpha_tilde == a.alpha_tilde);
  CHECK(b.gamma == a.gamma);
  CHECK(b.gamma_bar == a.gamma_bar);
  CHECK(b.tau == a.tau);
  std::istringstream bad("freq v1 n=2 tau=0 gamma=2 gammabar=0.3\n0.5\n");
  CHECK_THROWS_AS(read_frequency(bad), ParameterError);
  std::istringstream shortf("freq v1 n=3 tau=0 gamma=0.2 gammabar=0.3\n0.5\n");
  CHECK_THROWS_AS(read_frequency(shortf), ParseError);
}

TEST_CASE("json floats carry 17 significant digits") {
  nlohmann::json j;
  j["x"] = 0.1;
  j["v"] = {1.0 / 3.0};
  const auto s = dump_json(j, -1);
  CHECK(s == "{\"v\":[0.33333333333333331],\"x\":0.10000000000000001}");
}
