#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oscint/wavepacket.hpp"

using namespace oscint;

namespace {

InputFunction smooth_bump_1d() {
  return InputFunction::modulated_bump(Poly{}, 0.0, 0.7, 0.6, 1);
}

}  // namespace

TEST_CASE("core curves of the named phases") {
  double lambda = 256.0;
  std::array<double, 9> tgrid{-64, -48, -32, -16, 0, 16, 32, 48, 64};

  // Extension phase: gamma(t) = v - t grad h(omega_theta).
  std::array<std::string, 3> names{"x1", "x2", "w1"};
  auto ext = PhaseSpec::extension_graph(Poly::parse("w1^2/2 + 0.1*w1^3", names), 2);
  std::array<double, 1> wt{0.3};
  std::array<double, 1> v{5.0};
  auto curve = core_curve(ext, wt, v, lambda, tgrid);
  double dh = 0.3 + 0.3 * 0.3 * 0.3 / 0.3;  // h'(w) = w + 0.3 w^2 at w = 0.3
  dh = 0.3 + 0.3 * 0.09;
  for (size_t k = 0; k < curve.t.size(); ++k)
    CHECK(curve.gamma[k] == doctest::Approx(5.0 - curve.t[k] * dh).epsilon(1e-9));
  CHECK(curve.max_residual <= 1e-8 * lambda);

  // Paraboloid: straight line with slope -omega_theta.
  auto par = PhaseSpec::paraboloid(3);
  std::array<double, 2> wt2{0.2, -0.4};
  std::array<double, 2> v2{3.0, 7.0};
  auto c2 = core_curve(par, wt2, v2, lambda, tgrid);
  for (size_t k = 0; k < c2.t.size(); ++k) {
    CHECK(c2.gamma[2 * k] == doctest::Approx(3.0 - c2.t[k] * 0.2).epsilon(1e-9));
    CHECK(c2.gamma[2 * k + 1] == doctest::Approx(7.0 + c2.t[k] * 0.4).epsilon(1e-9));
  }

  // Model phase: gamma^lambda(t) = v - lambda A(t/lambda) omega_theta.
  auto kak = PhaseSpec::kakeya_compression_example(3);
  auto c3 = core_curve(kak, wt2, v2, lambda, tgrid);
  for (size_t k = 0; k < c3.t.size(); ++k) {
    double s = c3.t[k] / lambda;
    double a11 = s, a12 = s * s, a22 = s + s * s * s;
    double g1 = v2[0] - lambda * (a11 * wt2[0] + a12 * wt2[1]);
    double g2 = v2[1] - lambda * (a12 * wt2[0] + a22 * wt2[1]);
    CHECK(c3.gamma[2 * k] == doctest::Approx(g1).epsilon(1e-8));
    CHECK(c3.gamma[2 * k + 1] == doctest::Approx(g2).epsilon(1e-8));
  }
}

TEST_CASE("tube tangents align with the Gauss map and have unit speed") {
  auto kak = PhaseSpec::kakeya_compression_example(3);
  double lambda = 128.0;
  auto tube = make_tube(kak, std::array{0.25, -0.1}, std::array{4.0, -6.0}, 128.0, 0.1,
                        lambda, 65);
  CHECK(tube.core.max_residual <= 1e-6 * lambda);
  int n = 3;
  for (size_t k = 0; k < tube.core.t.size(); ++k) {
    std::vector<double> x(tube.core.gamma_at(k, n).begin(), tube.core.gamma_at(k, n).end());
    x.push_back(tube.core.t[k]);
    auto g = kak.gauss_map_lambda(x, tube.omega_center, lambda);
    std::span<const double> tangent(tube.core.tangent.data() + k * n, static_cast<size_t>(n));
    CHECK(line_angle(tangent, g) <= 1e-4);
  }

  // Unit-scale curve speed |Gamma'| in [1/2, 2] for a reduced-type phase.
  auto par = PhaseSpec::paraboloid(3);
  std::vector<double> unit_grid(33);
  for (int k = 0; k < 33; ++k) unit_grid[k] = -0.9 + 1.8 * k / 32.0;
  auto c = core_curve(par, std::array{0.2, 0.1}, std::array{0.05, -0.1}, 1.0, unit_grid);
  for (size_t k = 0; k < c.t.size(); ++k) {
    // tangent is normalised (gamma', 1)/|.|; recover |Gamma'| = 1/t_n.
    double tn = c.tangent[k * 3 + 2];
    double speed = 1.0 / tn;
    CHECK(speed >= 0.5);
    CHECK(speed <= 2.0);
  }
}

TEST_CASE("decompose: zero input") {
  auto dec = decompose(InputFunction::zero(), 64.0, 0.1, 256.0);
  CHECK(dec.packets.empty());
  CHECK(dec.reconstruction_residual == 0.0);
}

TEST_CASE("decompose: preconditions") {
  CHECK_THROWS_AS(decompose(smooth_bump_1d(), 512.0, 0.1, 256.0), PreconditionError);
  CHECK_THROWS_AS(decompose(smooth_bump_1d(), 64.0, 0.4, 256.0), PreconditionError);
  auto coarse = OmegaLattice::make(1, 1.0 / 8, 0.8);
  auto f = InputFunction::grid_sampled(coarse, std::vector<complexd>(coarse.size, {1, 0}));
  CHECK_THROWS_AS(decompose(f, 256.0, 0.1, 256.0), ResolutionError);
}

TEST_CASE("decompose: reconstruction and orthogonality at R in {64, 256}") {
  for (double R : {64.0, 256.0}) {
    auto f = smooth_bump_1d();
    auto dec = decompose(f, R, 0.1, 256.0);
    CHECK(dec.f_l2 > 0.1);
    CHECK(dec.reconstruction_residual <= 1e-6 * dec.f_l2);
    CHECK(dec.orthogonality_defect >= 1.0 / 8);
    CHECK(dec.orthogonality_defect <= 8.0);

    // Almost-orthogonality on random subfamilies.
    Rng rng(42u);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<size_t> sub;
      double sub_energy = 0;
      for (size_t i = 0; i < dec.packets.size(); ++i)
        if (rng.uniform() < 0.4) {
          sub.push_back(i);
          sub_energy += sqr(dec.packets[i].l2);
        }
      if (sub.empty() || sub_energy < 1e-20) continue;
      auto vals = dec.sum_packets(sub);
      double e = 0;
      for (const auto& z : vals) e += std::norm(z);
      e *= dec.lattice.weight();
      CHECK(e / sub_energy >= 1.0 / 8);
      CHECK(e / sub_energy <= 8.0);
    }
  }
}

TEST_CASE("decompose: energy localisation of a single model packet") {
  double R = 256.0, delta = 0.1, lambda = 256.0;
  double s_cap = 1.0 / std::sqrt(R);
  double s_v = std::pow(R, (1.0 + delta) / 2.0);
  auto caps = std::make_shared<CapCover>(1, s_cap, 0.8, CapProfile{0.3});
  CapCover::Key theta0{2, 0};
  double v0 = 3.0 * s_v;  // on the v-lattice
  auto f = InputFunction::packet_superposition(caps, {ModelPacket{theta0, {v0}, {1.0, 0.0}}});

  auto dec = decompose(f, R, delta, lambda);
  double total = sqr(dec.f_l2);
  std::vector<size_t> window;
  for (size_t i = 0; i < dec.packets.size(); ++i)
    if (dec.packets[i].theta == theta0 && std::abs(dec.packets[i].v[0] - v0) <= 2.0 * s_v)
      window.push_back(i);
  auto vals = dec.sum_packets(window);
  double captured = 0;
  for (const auto& z : vals) captured += std::norm(z);
  captured *= dec.lattice.weight();
  CHECK(captured >= 0.9 * total);
}

TEST_CASE("regroup at scale rho") {
  double R = 64.0, delta = 0.1, lambda = 256.0;
  auto par = PhaseSpec::paraboloid(2);
  auto dec = decompose(smooth_bump_1d(), R, delta, lambda);
  REQUIRE(dec.packets.size() > 4);

  // y = 0: vbar = 0, windows centred on the packets themselves.
  std::array<double, 2> y0{0.0, 0.0};
  auto rg0 = regroup_at_scale(par, dec, y0, 16.0);
  double s_rho_v = std::pow(16.0, (1.0 + delta) / 2.0);
  for (size_t k = 0; k < dec.packets.size(); ++k)
    CHECK(std::abs(rg0.windows[k].w_center[0] - dec.packets[k].v[0]) <= 0.5 * s_rho_v + 1e-9);

  // Shifted centre: curve identity and family proximity.
  std::array<double, 2> y{0.0, 20.0};
  auto rg = regroup_at_scale(par, dec, y, 16.0);
  CHECK(rg.curve_identity_residual <= 1e-6);
  CHECK(rg.max_core_mismatch <= 10.0 * std::pow(R, 0.5 + delta));

  // Families partition the packet list.
  size_t covered = 0;
  for (const auto& [key, members] : rg.families) covered += members.size();
  CHECK(covered == dec.packets.size());

  CHECK_THROWS_AS(regroup_at_scale(par, dec, y, 4.0), PreconditionError);
  CHECK_THROWS_AS(regroup_at_scale(par, dec, y, 60.0), PreconditionError);
}

TEST_CASE("packet concentration on its tube" * doctest::timeout(300)) {
  // n = 2, R = lambda = 256: |T f_tv| drops by 1e-3 within 8 tube widths.
  double R = 256.0, delta = 0.1, lambda = 256.0;
  DecomposeOptions opts;
  opts.eval_max_x = R;
  auto dec = decompose(smooth_bump_1d(), R, delta, lambda, opts);

  // Pick the most energetic packet near the centre.
  size_t best = 0;
  for (size_t i = 0; i < dec.packets.size(); ++i)
    if (dec.packets[i].l2 > dec.packets[best].l2) best = i;
  const auto& pk = dec.packets[best];
  auto tube = make_tube(PhaseSpec::paraboloid(2), pk.omega_center, pk.v, R, delta, lambda);
  auto packet_input = dec.single_packet_input(best);

  AmplitudeSpec amp;
  amp.kind = AmplitudeKind::ConstantOneOnOmega;
  auto par = PhaseSpec::paraboloid(2);

  auto shell_points = [&](double dist) {
    std::vector<double> pts;
    for (double t : {-0.4 * R, 0.0, 0.4 * R}) {
      auto g = tube.core.interpolate(t, 2);
      for (double side : {-1.0, 1.0}) {
        double x1 = g[0] + side * dist;
        if (std::hypot(x1, t) < R) {
          pts.push_back(x1);
          pts.push_back(t);
        }
      }
    }
    return pts;
  };

  double w = tube.radius;
  double r8 = concentration_profile(par, amp, lambda, packet_input, tube, shell_points(8 * w));
  CHECK(r8 <= 1e-3);
  double r25 = concentration_profile(par, amp, lambda, packet_input, tube, shell_points(2.5 * w));
  double r5 = concentration_profile(par, amp, lambda, packet_input, tube, shell_points(5 * w));
  CHECK(r5 <= r25 * (1 + 1e-9));
  CHECK(r8 <= r5 * (1 + 1e-9));

  // Points inside the 2-dilated tube violate the precondition.
  CHECK_THROWS_AS(
      concentration_profile(par, amp, lambda, packet_input, tube, shell_points(1.5 * w)),
      PreconditionError);
}
