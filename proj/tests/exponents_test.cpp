#include "doctest.h"
#include "oscint/exponents.hpp"

using namespace oscint;

TEST_CASE("endpoint table entries") {
  CHECK(theorem_endpoint(3, Hypothesis::H2plus).value == BigRat(10, 3));
  CHECK(theorem_endpoint(4, Hypothesis::H2plus).value == BigRat(14, 5));
  CHECK(theorem_endpoint(3, Hypothesis::H2).value == BigRat(4));
  CHECK(theorem_endpoint(2, Hypothesis::H2).value == BigRat(4));
  CHECK(theorem_endpoint(5, Hypothesis::H2).value == BigRat(3));
  CHECK(theorem_endpoint(3, Hypothesis::H2plus).str() == "10/3");
  CHECK_THROWS_AS(theorem_endpoint(1, Hypothesis::H2), PreconditionError);
}

TEST_CASE("pbar") {
  CHECK(pbar(2, 3).value == BigRat(10, 3));
  for (int n = 2; n <= 12; ++n) {
    CHECK(pbar(n, n).value == BigRat(2 * n, n - 1));
    CHECK(pbar(1, n).value == BigRat(2 * (n + 1), n - 1));  // Stein exponent
  }
  CHECK_THROWS_AS(pbar(0, 3), PreconditionError);
  CHECK_THROWS_AS(pbar(4, 3), PreconditionError);
}

TEST_CASE("pbar strictly decreasing in k") {
  for (int n = 2; n <= 50; ++n)
    for (int k = 1; k < n; ++k) CHECK(pbar(k + 1, n).value < pbar(k, n).value);
}

TEST_CASE("necessary exponent") {
  // m = n: the sigma term vanishes.
  for (int n = 2; n <= 10; ++n) {
    CHECK(necessary_exponent(n, BigRat(1, 3), n).value == BigRat(2 * n, n - 1));
    CHECK(necessary_exponent(n, BigRat(0), n).value == BigRat(2 * n, n - 1));
  }
  // Odd n, m=(n+1)/2, sigma=1/2 reproduces the H2+ odd endpoint.
  for (int n = 3; n <= 49; n += 2)
    CHECK(necessary_exponent((n + 1) / 2, BigRat(1, 2), n).value ==
          BigRat(2 * (3 * n + 1), 3 * n - 3));
  // Even n, m=n/2+1, sigma=0 reproduces the H2 even endpoint.
  for (int n = 2; n <= 50; n += 2)
    CHECK(necessary_exponent(n / 2 + 1, BigRat(0), n).value == BigRat(2 * (n + 2), n));
  CHECK_THROWS_AS(necessary_exponent(1, BigRat(0), 3), PreconditionError);
}

TEST_CASE("figure 2 entries reproduce figure 1 for 2 <= n <= 50") {
  for (int n = 2; n <= 50; ++n)
    for (auto hyp : {Hypothesis::H2, Hypothesis::H2plus}) {
      auto ms = optimal_m_sigma(n, hyp);
      CHECK(necessary_exponent(ms.m, ms.sigma, n).value == theorem_endpoint(n, hyp).value);
    }
}

TEST_CASE("e_kn") {
  CHECK(e_kn(2, 3, pbar(2, 3).value).value == BigRat(1, 2));
  CHECK(e_kn(2, 3, BigRat(2)).value == BigRat(0));
  CHECK(e_kn(2, 3, BigRat(4)).value == BigRat(5, 8));
  // Sign test: -e + 1/2 <= 0 iff p >= pbar(k, n), checked exactly on a grid.
  for (int n = 2; n <= 12; ++n)
    for (int k = 2; k <= n; ++k)
      for (int pnum = 2; pnum <= 40; ++pnum) {
        BigRat p(pnum, 7);
        if (p <= 0) continue;
        bool lhs = (BigRat(1, 2) - e_kn(k, n, p).value) <= 0;
        bool rhs = p >= pbar(k, n).value;
        CHECK(lhs == rhs);
      }
}

TEST_CASE("broad_to_linear reproduces both theorems for 2 <= n <= 50") {
  for (int n = 2; n <= 50; ++n) {
    auto pd = broad_to_linear(
        n, [n](int k) { return pbar(k, n).value; }, ConversionMode::PositiveDefinite);
    CHECK(pd.p_linear.value == theorem_endpoint(n, Hypothesis::H2plus).value);
    int expect_k = (n % 2 == 0) ? n / 2 + 1 : (n + 1) / 2;
    CHECK(pd.k_star == expect_k);

    auto gen = broad_to_linear(
        n, [](int k) { return BigRat(2 * k, k - 1); }, ConversionMode::General);
    CHECK(gen.p_linear.value == theorem_endpoint(n, Hypothesis::H2).value);
  }
}

TEST_CASE("broad_to_linear named examples") {
  auto r4 = broad_to_linear(
      4, [](int k) { return pbar(k, 4).value; }, ConversionMode::PositiveDefinite);
  CHECK(r4.k_star == 3);
  CHECK(r4.p_linear.value == BigRat(14, 5));

  auto r5 = broad_to_linear(
      5, [](int k) { return pbar(k, 5).value; }, ConversionMode::PositiveDefinite);
  CHECK(r5.k_star == 3);
  CHECK(r5.p_linear.value == BigRat(8, 3));

  auto r3 = broad_to_linear(
      3, [](int k) { return BigRat(2 * k, k - 1); }, ConversionMode::General);
  CHECK(r3.k_star == 2);
  CHECK(r3.p_linear.value == BigRat(4));
}

TEST_CASE("tables render") {
  auto md = endpoint_table_markdown(5);
  CHECK(md.find("10/3") != std::string::npos);
  auto csv = endpoint_table_csv(5);
  CHECK(csv.find("3,4,10/3,2,0,2,1/2") != std::string::npos);
}
