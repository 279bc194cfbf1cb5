#include <array>
#include <cmath>

#include "doctest.h"
#include "oscint/experiments.hpp"
#include "oscint/wavepacket.hpp"

using namespace oscint;

TEST_CASE("kakeya compression at small scales") {
  std::array<double, 3> lambdas{32, 64, 128};
  auto rep = kakeya_compression(3, lambdas, 2024u);
  REQUIRE(rep.has_fit);
  for (size_t i = 0; i < lambdas.size(); ++i)
    CHECK(rep.extras.at("max_P_residual")[i] <= 1e-6 * lambdas[i] * lambdas[i]);
  // Exponent near 5/2 already at small scales.
  CHECK(rep.fitted_slope >= 2.2);
  CHECK(rep.fitted_slope <= 2.8);
  CHECK_THROWS_AS(kakeya_compression(3, std::array{48.0, 64.0, 128.0}, 1u),
                  PreconditionError);
  CHECK_THROWS_AS(kakeya_compression(3, std::array{256.0, 512.0, 1024.0}, 1u),
                  PreconditionError);
}

TEST_CASE("kakeya model curves agree with the generic solver") {
  double lambda = 128.0;
  auto kak = PhaseSpec::kakeya_compression_example(3);
  std::array<double, 2> wt{0.22, -0.31};
  std::array<double, 2> v{-lambda * wt[1], 0.0};
  std::array<double, 9> tg{-96, -64, -32, -16, 0, 16, 32, 64, 96};
  auto solved = core_curve(kak, wt, v, lambda, tg);
  for (size_t k = 0; k < solved.t.size(); ++k) {
    double s = solved.t[k] / lambda;
    double g1 = v[0] - lambda * (s * wt[0] + s * s * wt[1]);
    double g2 = v[1] - lambda * (s * s * wt[0] + (s + s * s * s) * wt[1]);
    CHECK(solved.gamma[2 * k] == doctest::Approx(g1).epsilon(1e-8));
    CHECK(solved.gamma[2 * k + 1] == doctest::Approx(g2).epsilon(1e-8));
    // The prescribed translation puts the curve on the variety exactly.
    CHECK(std::abs(lambda * g2 - g1 * solved.t[k]) <= 1e-6 * lambda * lambda);
  }
}

TEST_CASE("mass concentration scaling in n = 2") {
  std::array<double, 4> lambdas{64, 128, 256, 512};
  auto rep = mass_concentration(2, lambdas, 7u);
  REQUIRE(rep.has_fit);
  CHECK(rep.fitted_slope == doctest::Approx(-0.5).epsilon(0.25));
  CHECK(rep.pass);
}

TEST_CASE("mass concentration small n = 3 run and contrast") {
  std::array<double, 3> lambdas{32, 64, 128};
  MassConcentrationOptions opts;
  opts.points = 400;
  auto rep = mass_concentration(3, lambdas, 11u, opts);
  REQUIRE(rep.has_fit);
  CHECK(std::abs(rep.fitted_slope + 0.5) <= 0.2);  // loose bar at desk scales

  auto contrast = mass_concentration_contrast(3, 128.0, 11u, opts);
  CHECK(contrast.far_max <= contrast.in_median / 10.0);
}

TEST_CASE("transverse equidistribution" * doctest::timeout(1200)) {
  std::array<double, 3> rhos{16, 32, 64};
  TransverseEquidistributionOptions opts;
  opts.points_per_rho = 300;
  opts.delta_m = 0.25;  // R = 128 needs the wider tangency window
  auto rep = transverse_equidistribution(3, 128.0, rhos, 5u, opts);
  REQUIRE(rep.has_fit);
  CHECK(rep.fitted_slope >= 0.3);
  CHECK(rep.extras.at("tangent_packets")[0] >= 4);

  // m = n: the neighbourhood is everything and the ratio is flat.
  auto flat = transverse_equidistribution(3, 128.0, rhos, 5u,
                                          [&] {
                                            auto o = opts;
                                            o.whole_space = true;
                                            return o;
                                          }());
  CHECK(std::abs(flat.fitted_slope) <= 0.1);

  // Single tangent packet: measured integrals non-decreasing in rho.
  auto single = transverse_equidistribution(3, 128.0, rhos, 5u,
                                            [&] {
                                              auto o = opts;
                                              o.single_packet = true;
                                              return o;
                                            }());
  const auto& ints = single.extras.at("integrals");
  for (size_t i = 1; i < ints.size(); ++i) CHECK(ints[i] >= ints[i - 1] * 0.7);

  CHECK_THROWS_AS(transverse_equidistribution(3, 128.0, std::array{4.0, 8.0, 16.0}, 5u, opts),
                  PreconditionError);
}

TEST_CASE("scaling sweep: global L2 grows like lambda^{1/2}") {
  SweepConfig cfg;
  cfg.phase = "bourgain";
  cfg.input = "mass-bump";
  cfg.n = 2;
  cfg.p = 2.0;
  cfg.points = 4000;
  cfg.lambdas = {64, 128, 256, 512};
  cfg.seed = 21u;
  cfg.expected_slope = 0.5;
  cfg.tolerance = 0.1;
  auto rep = scaling_sweep(cfg);
  REQUIRE(rep.has_fit);
  CHECK(rep.pass);

  cfg.input = "zero";
  auto zero = scaling_sweep(cfg);
  CHECK(!zero.has_fit);
  CHECK(!zero.pass);
}

TEST_CASE("khintchine: signed sum tracks the square function") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto rep = khintchine_check(3, 64.0, seed, 200);
    CHECK(rep.ratio >= 0.25);
    CHECK(rep.ratio <= 4.0);
  }
}

TEST_CASE("report serialisation and determinism") {
  std::array<double, 3> lambdas{32, 64, 128};
  auto a = kakeya_compression(3, lambdas, 99u);
  auto b = kakeya_compression(3, lambdas, 99u);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.csv() == b.csv());
  CHECK(a.csv().find("parameter,measurement") == 0);
}
