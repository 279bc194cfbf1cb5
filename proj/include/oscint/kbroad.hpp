#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oscint/field.hpp"
#include "oscint/phase.hpp"

namespace oscint {

/// Search/evaluation parameters for the k-broad norms. The Grassmannian is
/// searched over a finite net: seeded random orthonormal (k-1)-frames plus
/// all frames spanned by cap directions at the relevant ball.
struct KBroadConfig {
  int k = 2;
  int A = 1;
  double p = 2.0;
  double K = 8.0;
  size_t frames = 2000;
  std::uint64_t seed = 1;
  size_t exhaustive_limit = 1000000;  // tuple budget before switching to greedy
  double angle_threshold = 0.0;       // 0 = use 1/K
};

/// Per-cap data of a decomposed field: the cap centre, one unit Gauss
/// direction per ball, and |T f_tau| samples on each K^2-ball.
struct CapField {
  int n = 3;
  double K = 8.0;
  double sample_weight = 1.0;  // integration weight per sample in the L^p sums
  std::vector<std::vector<double>> ball_centers;
  struct Cap {
    std::vector<double> omega_center;
    std::vector<std::vector<double>> directions;  // [ball][n]
    std::vector<std::vector<complexd>> samples;   // [ball][sample]
  };
  std::vector<Cap> caps;

  size_t ball_count() const { return ball_centers.size(); }
  /// ||T f_tau||_{L^p(B)}^p from the stored samples.
  double cap_mass(size_t cap, size_t ball, double p) const;
  /// Pointwise sum of two fields over identical geometry.
  static CapField add(const CapField& a, const CapField& b);
  CapField without_cap(size_t cap) const;
};

struct MuResult {
  double mu = 0.0;
  bool exhaustive = true;
  double greedy_value = 0.0;
  double random_best = 0.0;  // best of 1000 random tuples (greedy path only)
  double optimality_gap = 0.0;
};

/// min over A-tuples of (k-1)-subspaces of the max cap mass not angularly
/// captured by any subspace (eq-style (1.5) with the cap-centre surrogate).
MuResult mu_ball(const CapField& field, size_t ball, const KBroadConfig& cfg);

struct BlResult {
  double value = 0.0;                  // (sum_B mu)^{1/p}
  std::vector<double> per_ball_mu;
};

/// k-broad norm over the balls whose centres lie in `region` (all balls when
/// absent).
BlResult bl_norm(const CapField& field, const std::optional<Region>& region,
                 const KBroadConfig& cfg);

struct TriangleReport {
  double lhs = 0.0;
  double rhs1 = 0.0, rhs2 = 0.0;
  double constant = 0.0;  // lhs / (rhs1 + rhs2)
  bool ok = true;         // constant <= 8
};
/// bl_{k,A1+A2}(f1 + f2) against bl_{k,A1}(f1) + bl_{k,A2}(f2).
TriangleReport check_triangle(const CapField& f1, const CapField& f2, const KBroadConfig& cfg,
                              int A1, int A2);

struct ConvexityReport {
  double lhs = 0.0;
  double rhs = 0.0;       // bl_{p1,A1}^{alpha1} bl_{p2,A2}^{alpha2}
  double constant = 0.0;
  bool ok = true;
};
ConvexityReport check_logconvexity(const CapField& field, const KBroadConfig& cfg, double p,
                                   double p1, double p2, double alpha1, double alpha2, int A1,
                                   int A2);

/// CapField of an actual operator: K^{-1}-caps of the input, K^2-balls
/// covering the region, stratified samples per ball.
CapField make_capfield(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                       const InputFunction& f, double K, double region_radius,
                       size_t max_balls, size_t samples_per_ball, std::uint64_t seed);

}  // namespace oscint
