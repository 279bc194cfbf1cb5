#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscint/polynomial.hpp"
#include "oscint/util.hpp"
#include "oscint/wavepacket.hpp"

namespace oscint {

// ---------------------------------------------------------------------------
// Transverse complete intersections
// ---------------------------------------------------------------------------

/// Zero set of n-m polynomials whose gradient matrix has full rank on the
/// sampled zero locus. An empty polynomial list encodes Z = R^n (m = n).
class Variety {
 public:
  Variety() = default;
  int n() const { return n_; }
  int m() const { return n_ - static_cast<int>(polys_.size()); }
  int max_degree() const;
  bool is_whole_space() const { return polys_.empty(); }
  const std::vector<Poly>& polys() const { return polys_; }

  /// |P_j(x)| residual vector and its max.
  double residual(std::span<const double> x) const;

  /// Gauss-Newton projection of x onto Z (50-step cap). Returns the landing
  /// point; satisfies residual(out) <= tol when it reports success.
  struct Projection {
    std::vector<double> point;
    double distance = 0.0;
    bool converged = false;
  };
  Projection project(std::span<const double> x, int max_iter = 50) const;

  /// Distance estimate dist(x, Z) via project(); +inf when the descent fails.
  double distance(std::span<const double> x) const;

  /// Orthonormal basis of the tangent space at a (near-)zero z, as columns.
  std::vector<double> tangent_basis(std::span<const double> z) const;
  /// Angle between a direction and the tangent space at z, in [0, pi/2].
  double tangent_angle(std::span<const double> z, std::span<const double> dir) const;

  /// Smallest/largest singular value ratio of the gradient matrix at z.
  double rank_margin(std::span<const double> z) const;

  std::string to_json() const;
  static Variety from_json(const std::string& text,
                           const std::map<std::string, double>& params = {});

  friend Variety make_tci(std::vector<Poly> polys, int n, double box_radius,
                          std::uint64_t seed, int zero_samples);

 private:
  int n_ = 0;
  std::vector<Poly> polys_;
  std::vector<std::vector<Poly>> grads_;
};

/// Builds the variety and certifies the rank condition on sampled zeros found
/// by random descent inside B(0, box_radius). Throws with a witness point if
/// the gradient matrix degenerates on the zero locus.
Variety make_tci(std::vector<Poly> polys, int n, double box_radius = 1.0,
                 std::uint64_t seed = 1u, int zero_samples = 64);

// ---------------------------------------------------------------------------
// Neighbourhood covers (Wongkew-style counting)
// ---------------------------------------------------------------------------

struct NeighborhoodCover {
  size_t ball_count = 0;
  double covered_volume = 0.0;      // Monte-Carlo volume of N_rho(Z) in B_R
  double volume_stderr = 0.0;
  bool empty_intersection = false;
  double count_constant = 0.0;      // ball_count / (R/rho)^m
};

NeighborhoodCover neighborhood_cover(const Variety& z, double rho, double R,
                                     size_t samples = 40000, std::uint64_t seed = 7u);

// ---------------------------------------------------------------------------
// Polynomial partitioning
// ---------------------------------------------------------------------------

struct WeightedPoints {
  int n = 2;
  std::vector<double> coords;   // n per point
  std::vector<double> weights;  // same length
  size_t count() const { return weights.size(); }
  std::span<const double> point(size_t i) const {
    return {coords.data() + i * static_cast<size_t>(n), static_cast<size_t>(n)};
  }
};

struct PartitionCell {
  std::vector<int> signs;       // sign of each factor (+1/-1)
  int component = 0;            // flood-fill component within the sign class
  double weight = 0.0;
  size_t point_count = 0;
  std::vector<double> sample_point;
};

class Partition {
 public:
  std::vector<Poly> factors;
  int degree = 0;               // deg P = sum of factor degrees
  std::vector<PartitionCell> cells;
  double wall_weight = 0.0;
  double wall_width = 0.0;
  std::vector<double> box_lo, box_hi;
  double total_weight = 0.0;
  double worst_imbalance = 0.0;  // max over steps/parts of |pos-frac - 1/2|

  /// Cell lookup for a point: -1 when the point lies in the width-w wall (or
  /// no component can be resolved). Uses the flood-fill grid for components.
  int cell_index(std::span<const double> x, double wall) const;
  bool in_wall(std::span<const double> x, double wall) const;

  std::string cells_csv() const;

  // flood-fill grid (resolution wall_width / 4)
  int grid_nx = 0, grid_ny = 0;
  std::vector<int> grid_component;  // -1 wall, else index into cells

  // Dense evaluation forms of the factors and their gradients (hot paths).
  std::vector<DensePoly2> dense_factors;
  std::vector<std::array<DensePoly2, 2>> dense_grads;
  void build_dense();
};

/// Iterated simultaneous ham-sandwich bisection of a discrete weighted point
/// set (Veronese lifting, annealed sign balancing). Produces ~D^n cells each
/// holding ~D^{-n} of the weight.
Partition partition(const WeightedPoints& pts, int D, int n, double wall_width = 0.0,
                    std::uint64_t seed = 11u);

/// Number of distinct shrunken cells met by the curve, sampled at spatial
/// resolution <= shrink/4.
struct PolyCurve;
size_t tube_cell_incidence(const PolyCurve& curve, const Partition& part, double shrink);
size_t segment_cell_incidence(std::span<const double> a, std::span<const double> b,
                              const Partition& part, double shrink);

// ---------------------------------------------------------------------------
// Polynomial curves
// ---------------------------------------------------------------------------

struct PolyCurve {
  std::vector<Poly> components;  // variable 0 = t
  double t_lo = 0.0, t_hi = 0.0;
  double error_bound = 0.0;      // measured sup distance to the source curve
  double tangent_angle_constant = 0.0;  // sup angle * lambda^{1/2}

  int degree() const;
  std::vector<double> eval(double t) const;
  std::vector<double> velocity(double t) const;
  double sup_second_derivative(int samples = 512) const;
};

/// Degree-N Taylor approximation (N = ceil(1/(2 eps))) of the core curve
/// Gamma^lambda at t = 0, valid on |t| <= lambda^{1 - eps}.
PolyCurve taylor_curve(const PhaseSpec& phase, std::span<const double> omega_theta,
                       std::span<const double> v, double lambda, double eps);

/// Greedy (r/alpha)-ball cover of the sampled transverse zone
/// {z in Z : some x on Gamma has |x - z| < r and angle(T_z Z, T_x Gamma) > alpha}.
struct TransverseZone {
  size_t ball_count = 0;
  std::vector<double> centers;  // n per ball
  double count_constant = 0.0;  // count / (degZ degGamma)^n
};

TransverseZone transverse_zone(const Variety& z, const PolyCurve& curve, double alpha,
                               double r, double lambda, std::uint64_t seed = 13u);

// ---------------------------------------------------------------------------
// Tube-variety tangency
// ---------------------------------------------------------------------------

struct TangencyOptions {
  double c_tang = 1.0;   // angle threshold constant
  double C_tang = 2.0;   // interaction distance constant
  int core_samples = 33;
  int cross_samples = 4;
};

struct TangencyResult {
  bool tangent = false;
  std::string reason;
  std::vector<double> witness;  // offending point when transverse
  double max_distance = 0.0;    // sup dist(tube sample, Z)
  double max_angle = 0.0;       // sup angle(G, T_z Z) over interacting pairs
};

TangencyResult tangency_classify(const PhaseSpec& phase, const Tube& tube, const Variety& z,
                                 double R, double delta_m, TangencyOptions opts = {});

}  // namespace oscint
