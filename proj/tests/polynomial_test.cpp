#include <array>
#include <cmath>

#include "doctest.h"
#include "oscint/polynomial.hpp"

using namespace oscint;

namespace {
const std::array<std::string, 3> kVars{"x", "y", "z"};
}

TEST_CASE("parse and evaluate") {
  Poly p = Poly::parse("2*x^2 - y*z + 1/2", kVars);
  std::array<double, 3> pt{2.0, 3.0, 5.0};
  CHECK(p.eval(pt) == doctest::Approx(8.0 - 15.0 + 0.5));
  CHECK(p.degree() == 2);
  CHECK(p.degree_in(0) == 2);

  Poly q = Poly::parse("-(x - 1)^3", kVars);
  CHECK(q.eval(std::array{2.0, 0.0, 0.0}) == doctest::Approx(-1.0));
  CHECK(q.degree() == 3);

  Poly with_param =
      Poly::parse("l*y - x*z", kVars, {{"l", 4.0}});
  CHECK(with_param.eval(std::array{1.0, 2.0, 3.0}) == doctest::Approx(8.0 - 3.0));

  CHECK_THROWS_AS(Poly::parse("x + unknown", kVars), PreconditionError);
  CHECK_THROWS_AS(Poly::parse("x / y", kVars), PreconditionError);
}

TEST_CASE("symbolic derivative matches finite differences") {
  Poly p = Poly::parse("x^3*y + 0.25*z^2 - x*y*z", kVars);
  Poly dx = p.derivative(0);
  std::array<double, 3> pt{0.7, -1.3, 0.4};
  double h = 1e-6;
  auto up = pt, dn = pt;
  up[0] += h;
  dn[0] -= h;
  double fd = (p.eval(up) - p.eval(dn)) / (2 * h);
  CHECK(dx.eval(pt) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("substitution composes") {
  Poly p = Poly::parse("x^2 + y", kVars);
  Poly repl = Poly::parse("y - 2", kVars);
  Poly q = p.substitute(0, repl);  // (y-2)^2 + y
  CHECK(q.eval(std::array{0.0, 5.0, 0.0}) == doctest::Approx(9.0 + 5.0));
  // Substituting a variable by an expression containing itself is simultaneous.
  Poly r = p.substitute(0, Poly::parse("x + 1", kVars));
  CHECK(r.eval(std::array{1.0, 0.0, 0.0}) == doctest::Approx(4.0));
}

TEST_CASE("round trip through to_string") {
  Poly p = Poly::parse("t + t^3", std::array<std::string, 1>{"t"});
  Poly q = Poly::parse(p.to_string(std::array<std::string, 1>{"t"}),
                       std::array<std::string, 1>{"t"});
  CHECK((p - q).is_zero());
}

TEST_CASE("dense two-variable form") {
  Poly p = Poly::parse("3*x^2*y + x - 2*y^3 + 7", kVars);
  DensePoly2 d = DensePoly2::from(p, 0, 1);
  for (double u : {-1.5, 0.0, 0.3, 2.0})
    for (double v : {-0.7, 0.1, 1.9})
      CHECK(d.eval(u, v) == doctest::Approx(p.eval(std::array{u, v, 0.0})));
  std::vector<double> cu(d.d1 + 1);
  d.coeffs_in_u(0.5, cu);
  double s = 0, u = 1.25;
  for (int i = d.d1; i >= 0; --i) s = s * u + cu[i];
  CHECK(s == doctest::Approx(p.eval(std::array{u, 0.5, 0.0})));
}
