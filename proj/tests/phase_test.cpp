#include <array>
#include <cmath>

#include "doctest.h"
#include "oscint/phase.hpp"

using namespace oscint;

namespace {

Poly t_poly(const std::string& s) {
  return Poly::parse(s, std::array<std::string, 1>{"t"});
}

// Reduced perturbation of the paraboloid used by several invariant tests.
PhaseSpec small_reduced_phase() {
  // n = 3; variables x1 x2 x3 w1 w2 (indices 0..4).
  std::array<std::string, 5> names{"x1", "x2", "x3", "w1", "w2"};
  Poly h = Poly::parse("w1^2/2 + w2^2/2 + 0.05*w1^3 + 0.03*w1*w2^2", names);
  Poly e = Poly::parse("0.04*x1^2*w1^2 + 0.03*x3^2*w2^2 + 0.02*x1*x2*w1*w2", names);
  return PhaseSpec::reduced(h, e, 3);
}

}  // namespace

TEST_CASE("model phase construction and validation") {
  auto kakeya = PhaseSpec::kakeya_compression_example(3);
  CHECK(kakeya.kind() == PhaseKind::ModelBlockDiag);

  // Identity block reproduces the paraboloid phase exactly.
  auto par_model = PhaseSpec::model_blockdiag(
      {{{t_poly("t"), t_poly("0")}, {t_poly("0"), t_poly("t")}}}, 3);
  CHECK((par_model.phi_poly() - PhaseSpec::paraboloid(3).phi_poly()).is_zero());

  CHECK_THROWS_AS(PhaseSpec::model_blockdiag(
                      {{{t_poly("t"), t_poly("t^2")}, {t_poly("t"), t_poly("t")}}}, 3),
                  PreconditionError);  // not symmetric
  CHECK_THROWS_AS(PhaseSpec::model_blockdiag(
                      {{{t_poly("t"), t_poly("1")}, {t_poly("1"), t_poly("t")}}}, 3),
                  PreconditionError);  // A(0) != 0
  CHECK_THROWS_AS(PhaseSpec::model_blockdiag({{{t_poly("t")}}}, 3),
                  PreconditionError);  // tiles 1 dim, need 2
}

TEST_CASE("evaluators agree with centered finite differences") {
  Rng rng(7u);
  for (const PhaseSpec& ph :
       {PhaseSpec::kakeya_compression_example(3), small_reduced_phase()}) {
    int n = ph.n();
    for (int trial = 0; trial < 100; ++trial) {
      auto x = rng.in_ball(n, 0.9);
      auto w = rng.in_ball(n - 1, 0.9);
      const double h = 2e-4;
      auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a));
      };

      auto gw = ph.grad_omega(x, w);
      auto gx = ph.grad_x(x, w);
      for (int j = 0; j < n - 1; ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        CHECK(close(gw[j], (ph.phi(x, wp) - ph.phi(x, wm)) / (2 * h)));
      }
      for (int i = 0; i < n; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(close(gx[i], (ph.phi(xp, w) - ph.phi(xm, w)) / (2 * h)));
      }

      auto mwx = ph.hess_omega_x(x, w);
      for (int j = 0; j < n - 1; ++j)
        for (int i = 0; i < n; ++i) {
          auto xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          auto wp = w, wm = w;
          wp[j] += h;
          wm[j] -= h;
          double fd = (ph.phi(xp, wp) - ph.phi(xp, wm) - ph.phi(xm, wp) + ph.phi(xm, wm)) /
                      (4 * h * h);
          CHECK(close(mwx[j * n + i], fd));
        }

      auto mww = ph.hess_omega_omega(x, w);
      for (int j = 0; j < n - 1; ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        double fd = (ph.phi(x, wp) - 2 * ph.phi(x, w) + ph.phi(x, wm)) / (h * h);
        CHECK(close(mww[j * (n - 1) + j], fd));
      }
    }
  }
}

TEST_CASE("gauss map on the named phases") {
  auto par = PhaseSpec::paraboloid(3);
  Rng rng(11u);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = rng.in_ball(3, 1.0);
    auto w = rng.in_ball(2, 1.0);
    auto g = par.gauss_map(x, w);
    double nn = std::sqrt(1 + w[0] * w[0] + w[1] * w[1]);
    CHECK(g[0] == doctest::Approx(-w[0] / nn).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(-w[1] / nn).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(1.0 / nn).epsilon(1e-12));
    // Orthogonality to the mixed Hessian rows.
    auto m = par.hess_omega_x(x, w);
    for (int j = 0; j < 2; ++j) {
      double dot = 0;
      for (int i = 0; i < 3; ++i) dot += m[j * 3 + i] * g[i];
      CHECK(std::abs(dot) < 1e-8);
    }
  }

  auto hyp = PhaseSpec::hyperbolic_paraboloid();
  auto g = hyp.gauss_map(std::array{0.2, -0.1, 0.4}, std::array{0.3, -0.5});
  double nn = std::sqrt(1 + 0.25 + 0.09);
  CHECK(g[0] == doctest::Approx(0.5 / nn));   // -w2
  CHECK(g[1] == doctest::Approx(-0.3 / nn));  // -w1
  CHECK(g[2] == doctest::Approx(1.0 / nn));

  // Reduced phases point along e_n at omega = 0.
  auto red = small_reduced_phase();
  auto g0 = red.gauss_map(std::array{0.3, 0.2, -0.4}, std::array{0.0, 0.0});
  CHECK(g0[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g0[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g0[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauss map H1 failure raises") {
  // phi = x1 w + x2 w^2/2 - x1 w: the omega-x Hessian row vanishes at omega=0.
  std::array<std::string, 3> names{"x1", "x2", "w1"};
  Poly h = Poly::parse("w1^2/2", names);
  Poly e = Poly::parse("-x1*w1", names);
  auto degenerate = PhaseSpec::reduced(h, e, 2);
  CHECK_THROWS_AS(degenerate.gauss_map(std::array{0.3, 0.1}, std::array{0.0}), SolverError);
}

TEST_CASE("curvature classification") {
  auto par = PhaseSpec::paraboloid(3);
  Rng rng(13u);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = rng.in_ball(3, 1.0);
    auto rep = par.classify_curvature(x, std::array{0.0, 0.0});
    CHECK(rep.classification.value == CurvatureClass::PositiveDefinite);
    for (double e : rep.eigenvalues) CHECK(e == doctest::Approx(1.0).epsilon(1e-10));
  }

  auto hyp = PhaseSpec::hyperbolic_paraboloid();
  auto rep = hyp.classify_curvature(std::array{0.0, 0.0, 0.0}, std::array{0.0, 0.0});
  CHECK(rep.classification.value == CurvatureClass::Indefinite);
  CHECK(rep.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(rep.eigenvalues[1] == doctest::Approx(1.0));

  // Kakeya example: eigenvalues equal those of A'(t), computed here by the
  // independent symbolic-differentiation oracle.
  auto kakeya = PhaseSpec::kakeya_compression_example(3);
  Poly a11 = t_poly("t").derivative(0);
  Poly a12 = t_poly("t^2").derivative(0);
  Poly a22 = t_poly("t + t^3").derivative(0);
  for (double t : {0.0, 0.5, -0.5}) {
    std::array<double, 1> tv{t};
    double p = a11.eval(tv), q = a12.eval(tv), r = a22.eval(tv);
    double tr = p + r, det = p * r - q * q;
    double disc = std::sqrt(tr * tr - 4 * det);
    double lo = (tr - disc) / 2, hi = (tr + disc) / 2;
    auto rep2 = kakeya.classify_curvature(std::array{0.0, 0.0, t}, std::array{0.0, 0.0});
    CHECK(rep2.classification.value == CurvatureClass::PositiveDefinite);
    CHECK(rep2.eigenvalues[0] == doctest::Approx(lo).epsilon(1e-10));
    CHECK(rep2.eigenvalues[1] == doctest::Approx(hi).epsilon(1e-10));
  }

  // Bourgain example: H2+ fails at t = 0.
  auto bourgain = PhaseSpec::mass_concentration_example(3);
  auto rep3 = bourgain.classify_curvature(std::array{0.0, 0.0, 0.0}, std::array{0.0, 0.0});
  CHECK(rep3.classification.value == CurvatureClass::Indefinite);
}

TEST_CASE("parabolic rescaling") {
  auto par = PhaseSpec::paraboloid(2);
  auto scaled = parabolic_rescale(par, std::array{0.37}, 4.0);
  CHECK((scaled.h_poly() - par.h_poly()).is_zero(1e-12));  // fixed point

  std::array<std::string, 3> names{"x1", "x2", "w1"};
  Poly h = Poly::parse("w1^2/2 + w1^3", names);
  auto ext = PhaseSpec::extension_graph(h, 2);
  auto r4 = parabolic_rescale(ext, std::array{0.0}, 4.0);
  Poly expect = Poly::parse("w1^2/2 + w1^3/4", names);
  CHECK((r4.h_poly() - expect).is_zero(1e-12));

  // rho = 1 subtracts value and gradient at omega_bar.
  Poly g = Poly::parse("1 + w1 + w1^2/2 + w1^4", names);
  auto r1 = parabolic_rescale(PhaseSpec::extension_graph(g, 2), std::array{0.0}, 1.0);
  Poly expect1 = Poly::parse("w1^2/2 + w1^4", names);
  CHECK((r1.h_poly() - expect1).is_zero(1e-12));

  // Derivative shrinkage: degree-d coefficients scale by rho^{2-d}.
  auto r2 = parabolic_rescale(ext, std::array{0.0}, 8.0);
  Poly expect2 = Poly::parse("w1^2/2 + w1^3/8", names);
  CHECK((r2.h_poly() - expect2).is_zero(1e-12));

  CHECK_THROWS_AS(parabolic_rescale(PhaseSpec::kakeya_compression_example(3),
                                    std::array{0.0, 0.0}, 2.0),
                  PreconditionError);
}

TEST_CASE("translate phase") {
  auto par = PhaseSpec::paraboloid(3);
  double lambda = 64;

  // y = 0 normalises away phi(0; .): for the paraboloid nothing changes.
  auto t0 = translate_phase(par, std::array{0.0, 0.0, 0.0}, lambda);
  CHECK((t0.phi_poly() - par.phi_poly()).is_zero(1e-12));

  // Pure x' translation only shifts modulation; the phase is unchanged.
  auto t1 = translate_phase(par, std::array{10.0, -4.0, 0.0}, lambda);
  CHECK((t1.phi_poly() - par.phi_poly()).is_zero(1e-12));

  // x_n translation also fixes the paraboloid phase.
  auto t2 = translate_phase(par, std::array{0.0, 0.0, 12.0}, lambda);
  CHECK((t2.phi_poly() - par.phi_poly()).is_zero(1e-12));

  CHECK_THROWS_AS(translate_phase(par, std::array{2.0 * lambda, 0.0, 0.0}, lambda),
                  PreconditionError);

  // General phase: the translated phase vanishes at x = 0.
  auto kakeya = PhaseSpec::kakeya_compression_example(3);
  auto t3 = translate_phase(kakeya, std::array{5.0, 1.0, -7.0}, lambda);
  Rng rng(3u);
  for (int i = 0; i < 20; ++i) {
    auto w = rng.in_ball(2, 1.0);
    CHECK(std::abs(t3.phi(std::array{0.0, 0.0, 0.0}, w)) < 1e-12);
  }
}

TEST_CASE("gauss map lipschitz bounds") {
  auto ph = small_reduced_phase();
  double lambda = 64;
  Rng rng(1234u);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x = rng.in_ball(3, 0.8 * lambda);
    auto w1 = rng.in_ball(2, 0.8);
    auto w2 = rng.in_ball(2, 0.8);
    double dw = std::hypot(w1[0] - w2[0], w1[1] - w2[1]);
    if (dw < 1e-3) continue;
    auto g1 = ph.gauss_map_lambda(x, w1, lambda);
    auto g2 = ph.gauss_map_lambda(x, w2, lambda);
    double ratio = line_angle(g1, g2) / dw;
    CHECK(ratio >= 1.0 / 20);
    CHECK(ratio <= 20.0);

    auto xb = rng.in_ball(3, 0.8 * lambda);
    auto g3 = ph.gauss_map_lambda(xb, w1, lambda);
    double dx = std::hypot(std::hypot(x[0] - xb[0], x[1] - xb[1]), x[2] - xb[2]);
    CHECK(line_angle(g1, g3) <= 20.0 * dx / lambda + 1e-12);
  }
}

TEST_CASE("graph reparametrisation") {
  auto ph = small_reduced_phase();
  Rng rng(17u);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = rng.in_ball(3, 0.5);
    std::array<double, 2> zero{0.0, 0.0};
    CHECK(std::abs(ph.graph_height(x, zero)) < 1e-10);
    const double h = 1e-4;
    for (int j = 0; j < 2; ++j) {
      auto up = zero, dn = zero;
      up[j] += h;
      dn[j] -= h;
      double d1 = (ph.graph_height(x, up) - ph.graph_height(x, dn)) / (2 * h);
      CHECK(std::abs(d1) <= 1e-6);
    }
    // Hessian close to the identity.
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        std::array<double, 2> pp = zero, pm = zero, mp = zero, mm = zero;
        pp[j] += h; pp[k] += h;
        pm[j] += h; pm[k] -= h;
        mp[j] -= h; mp[k] += h;
        mm[j] -= h; mm[k] -= h;
        double d2 = (ph.graph_height(x, pp) - ph.graph_height(x, pm) -
                     ph.graph_height(x, mp) + ph.graph_height(x, mm)) /
                    (4 * h * h);
        double expect = (j == k) ? 1.0 : 0.0;
        CHECK(std::abs(d2 - expect) <= 0.2);
      }
  }
}

TEST_CASE("reduction report on a reduced phase") {
  auto rep = small_reduced_phase().reduction_report(3);
  CHECK(rep.phi_x0_residual < 1e-12);
  CHECK(rep.phi_0omega_residual < 1e-12);
  CHECK(rep.sup_dwx_minus_identity < 0.5);
  CHECK(rep.sup_dww_dxk_minus_delta < 0.7);
}

TEST_CASE("phase JSON round trip") {
  std::string spec_doc =
      R"({"n":3,"kind":"model","blocks":[[["t","t^2"],["t^2","t+t^3"]]],)"
      R"("x_radius":1.0,"omega_radius":1.0})";
  auto parsed = PhaseSpec::from_json(spec_doc);
  CHECK((parsed.phi_poly() - PhaseSpec::kakeya_compression_example(3).phi_poly()).is_zero());

  for (const PhaseSpec& ph :
       {PhaseSpec::paraboloid(3), PhaseSpec::kakeya_compression_example(3),
        small_reduced_phase()}) {
    auto back = PhaseSpec::from_json(ph.to_json());
    CHECK((back.phi_poly() - ph.phi_poly()).is_zero(1e-12));
    CHECK(back.kind() == ph.kind());
  }
}
