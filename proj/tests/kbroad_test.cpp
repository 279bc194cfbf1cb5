#include <array>
#include <cmath>

#include "doctest.h"
#include "oscint/kbroad.hpp"

using namespace oscint;

namespace {

// Synthetic field: caps with prescribed directions, seeded complex samples.
CapField synthetic(const std::vector<std::vector<double>>& directions, size_t balls,
                   size_t samples, std::uint64_t seed, double amplitude_scale = 1.0) {
  CapField f;
  f.n = 3;
  f.K = 8.0;
  f.sample_weight = 1.0 / static_cast<double>(samples);
  Rng rng(seed);
  for (size_t b = 0; b < balls; ++b) f.ball_centers.push_back({64.0 * b, 0.0, 0.0});
  for (const auto& d : directions) {
    CapField::Cap cap;
    cap.omega_center = {d[0], d[1]};  // placeholder centre; direction is what matters
    double nn = norm2(d);
    std::vector<double> unit(d);
    for (auto& c : unit) c /= nn;
    double scale = amplitude_scale * (0.5 + rng.uniform());
    for (size_t b = 0; b < balls; ++b) {
      cap.directions.push_back(unit);
      std::vector<complexd> vals(samples);
      for (auto& v : vals) v = complexd{rng.normal(), rng.normal()} * scale;
      cap.samples.push_back(vals);
    }
    f.caps.push_back(cap);
  }
  return f;
}

KBroadConfig base_cfg(int k, int A, double p = 2.0, size_t frames = 400) {
  KBroadConfig cfg;
  cfg.k = k;
  cfg.A = A;
  cfg.p = p;
  cfg.K = 8.0;
  cfg.frames = frames;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("single cap is always hidden") {
  auto f = synthetic({{0.1, 0.2, 1.0}}, 2, 16, 3u);
  auto mu = mu_ball(f, 0, base_cfg(2, 1));
  CHECK(mu.mu == 0.0);
  // bl over balls is then zero too.
  CHECK(bl_norm(f, std::nullopt, base_cfg(2, 1)).value == 0.0);
}

TEST_CASE("two separated caps: mu equals the smaller mass") {
  Rng rng(17u);
  for (int inst = 0; inst < 20; ++inst) {
    auto f = synthetic({{0.0, 0.0, 1.0}, {0.5, 0.0, 1.0}}, 1, 32, 100 + inst);
    auto cfg = base_cfg(2, 1);
    double m0 = f.cap_mass(0, 0, cfg.p);
    double m1 = f.cap_mass(1, 0, cfg.p);
    auto mu = mu_ball(f, 0, cfg);
    CHECK(mu.exhaustive);
    CHECK(mu.mu == doctest::Approx(std::min(m0, m1)).epsilon(1e-12));
  }
}

TEST_CASE("A = cap count hides everything") {
  auto f = synthetic({{0.0, 0.0, 1.0}, {0.4, 0.0, 1.0}, {0.0, 0.4, 1.0}}, 1, 8, 9u);
  auto mu = mu_ball(f, 0, base_cfg(2, 3));
  CHECK(mu.mu == 0.0);
}

TEST_CASE("mu monotone under cap removal, A, and threshold relaxation") {
  auto f = synthetic({{0.0, 0.0, 1.0}, {0.4, 0.1, 1.0}, {-0.3, 0.2, 1.0}}, 1, 16, 23u);
  auto cfg = base_cfg(2, 1);
  double mu_full = mu_ball(f, 0, cfg).mu;
  for (size_t c = 0; c < 3; ++c) {
    double mu_less = mu_ball(f.without_cap(c), 0, cfg).mu;
    CHECK(mu_less <= mu_full + 1e-12);
  }
  auto cfg2 = base_cfg(2, 2);
  CHECK(mu_ball(f, 0, cfg2).mu <= mu_full + 1e-12);
  auto cfg3 = cfg;
  cfg3.angle_threshold = 0.5;  // coarser capture angle hides more
  CHECK(mu_ball(f, 0, cfg3).mu <= mu_full + 1e-12);
}

TEST_CASE("bl dominated by the cap-sum upper bound") {
  Rng rng(5u);
  for (int inst = 0; inst < 20; ++inst) {
    auto f = synthetic({{0.0, 0.1, 1.0}, {0.6, -0.2, 1.0}}, 3, 16, 500 + inst);
    auto cfg = base_cfg(2, 1);
    auto bl = bl_norm(f, std::nullopt, cfg);
    double capsum = 0;
    for (size_t b = 0; b < f.ball_count(); ++b)
      for (size_t c = 0; c < f.caps.size(); ++c) capsum += f.cap_mass(c, b, cfg.p);
    CHECK(bl.value <= std::pow(capsum, 1.0 / cfg.p) * (1 + 1e-12));
  }
}

TEST_CASE("sub-additivity over regions is exact") {
  auto f = synthetic({{0.0, 0.0, 1.0}, {0.5, 0.3, 1.0}}, 4, 16, 77u);
  auto cfg = base_cfg(2, 1);
  auto whole = bl_norm(f, std::nullopt, cfg);
  auto left = bl_norm(f, Region::ball({32.0, 0.0, 0.0}, 64.0), cfg);
  auto right = bl_norm(f, Region::ball({160.0, 0.0, 0.0}, 64.0), cfg);
  double lp = std::pow(left.value, cfg.p) + std::pow(right.value, cfg.p);
  CHECK(std::pow(whole.value, cfg.p) <= lp * (1 + 1e-12));
}

TEST_CASE("triangle inequality with C <= 8") {
  for (int inst = 0; inst < 15; ++inst) {
    auto f1 = synthetic({{0.0, 0.0, 1.0}, {0.45, 0.0, 1.0}}, 2, 16, 900 + inst);
    auto f2 = synthetic({{0.0, 0.0, 1.0}, {0.45, 0.0, 1.0}}, 2, 16, 1900 + inst);
    auto cfg = base_cfg(2, 2, 2.0, 300);
    auto rep = check_triangle(f1, f2, cfg, 1, 1);
    CHECK(rep.ok);
    // f2 = 0 gives the trivial inequality.
    CapField zero = f2;
    for (auto& cap : zero.caps)
      for (auto& ball : cap.samples)
        for (auto& v : ball) v = 0;
    auto rep0 = check_triangle(f1, zero, cfg, 1, 1);
    CHECK(rep0.lhs <= (rep0.rhs1 + rep0.rhs2) * (1 + 1e-9) + 1e-15);
  }
}

TEST_CASE("logarithmic convexity with C <= 8") {
  for (int inst = 0; inst < 15; ++inst) {
    auto f = synthetic({{0.0, 0.05, 1.0}, {0.5, -0.1, 1.0}}, 2, 16, 3100 + inst);
    auto cfg = base_cfg(2, 2, 4.0, 300);
    // p = 4 interpolates p1 = 2 and the p2 = 64 surrogate for infinity:
    // 1/4 = a1/2 + a2/64 with a1 + a2 = 1 -> a1 = 15/31.
    double a1 = 15.0 / 31.0;
    auto rep = check_logconvexity(f, cfg, 4.0, 2.0, 64.0, a1, 1.0 - a1, 1, 1);
    CHECK(rep.ok);
    // A-monotonicity special case p = p1 = p2.
    auto repA = check_logconvexity(f, cfg, 4.0, 4.0, 4.0, 0.5, 0.5, 1, 1);
    CHECK(repA.ok);
    CHECK_THROWS_AS(check_logconvexity(f, cfg, 4.0, 2.0, 64.0, 0.5, 0.5, 1, 1),
                    PreconditionError);
  }
}

TEST_CASE("greedy matches exhaustive within 5 percent on small instances") {
  for (int inst = 0; inst < 30; ++inst) {
    auto f = synthetic({{0.0, 0.0, 1.0}, {0.4, 0.2, 1.0}, {-0.35, 0.25, 1.0}}, 1, 16,
                       7000 + inst);
    auto cfg = base_cfg(2, 1, 2.0, 1500);
    auto exact = mu_ball(f, 0, cfg);
    REQUIRE(exact.exhaustive);
    auto cfg_greedy = cfg;
    cfg_greedy.exhaustive_limit = 0;  // force the greedy path
    auto greedy = mu_ball(f, 0, cfg_greedy);
    CHECK(!greedy.exhaustive);
    double scale = std::max({exact.mu, greedy.mu, 1e-12});
    CHECK(std::abs(greedy.mu - exact.mu) / scale <= 0.05);
  }
}

TEST_CASE("operator-backed cap field") {
  auto par = PhaseSpec::paraboloid(3);
  AmplitudeSpec amp;
  amp.omega_support = 0.8;
  auto f = InputFunction::modulated_bump(Poly{}, 0.0, 0.7, 0.6, 2);
  auto cf = make_capfield(par, amp, 32.0, f, 4.0, 20.0, 8, 24, 42u);
  CHECK(cf.caps.size() >= 4);
  CHECK(cf.ball_count() >= 2);
  auto cfg = base_cfg(2, 1, 2.0, 200);
  cfg.K = 4.0;
  auto bl = bl_norm(cf, std::nullopt, cfg);
  CHECK(bl.value >= 0.0);
  CHECK(std::isfinite(bl.value));
}
