#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscint/caps.hpp"
#include "oscint/phase.hpp"
#include "oscint/polynomial.hpp"
#include "oscint/util.hpp"

namespace oscint {

// ---------------------------------------------------------------------------
// Frequency-side lattice
// ---------------------------------------------------------------------------

/// Uniform lattice over the omega ball (dim 1 or 2); nodes are spacing * k for
/// integer vectors k with |spacing * k| <= radius, enumerated row by row.
struct OmegaLattice {
  int dim = 1;
  double spacing = 0.0;
  double radius = 0.0;

  struct Row {
    int j;           // omega_2 index (0 when dim == 1)
    int i_min, i_max;
    size_t offset;   // index of (i_min, j) in node order
  };
  std::vector<Row> rows;
  size_t size = 0;

  static OmegaLattice make(int dim, double spacing, double radius);
  double weight() const;  // spacing^dim
  std::vector<double> node(size_t idx) const;
  /// Index of the nearest node, or npos if outside the lattice.
  size_t nearest(std::span<const double> omega) const;
};

// ---------------------------------------------------------------------------
// Input functions
// ---------------------------------------------------------------------------

/// A wave packet in the model sense: coeff * e^{-2 pi i <v, w - w_theta>}
/// psi_theta(w), with v at operator scale and psi_theta from a CapCover.
struct ModelPacket {
  CapCover::Key cap;
  std::vector<double> v;  // length dim
  complexd coeff{1.0, 0.0};
};

class InputFunction {
 public:
  enum class Kind { Zero, GridSampled, ModulatedBump, PacketSuperposition };

  static InputFunction zero(int dim = 1);
  /// Values on an explicit lattice (ownership shared with the caller).
  static InputFunction grid_sampled(OmegaLattice lattice, std::vector<complexd> values);
  /// e^{2 pi i lambda_mod Q(omega)} psi(omega); Q over variables 0..dim-1.
  static InputFunction modulated_bump(Poly q, double lambda_mod, double psi_support,
                                      double psi_plateau_frac = 0.8, int dim = 1);
  static InputFunction packet_superposition(std::shared_ptr<CapCover> caps,
                                            std::vector<ModelPacket> packets);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  const OmegaLattice* own_lattice() const {
    return kind_ == Kind::GridSampled ? &lattice_ : nullptr;
  }

  complexd eval(std::span<const double> omega) const;  // analytic kinds only
  complexd value_at_node(const OmegaLattice& lat, size_t idx) const;

  /// Worst-case extra oscillation rate (cycles per unit omega) contributed by
  /// the input itself, for the resolution rule.
  double bandwidth_hint() const;

  /// Radius beyond which the input vanishes (0 meaning "no constraint").
  double support_hint() const;

  /// Frequency-space dimension when the input pins one (0 = unspecified).
  int dim_hint() const;

  /// Packet superposition restricted to the packets passing `keep`.
  InputFunction filtered(const std::function<bool(const ModelPacket&)>& keep) const;
  const std::vector<ModelPacket>& packets() const { return packets_; }
  const CapCover& cap_cover() const;

  InputFunction() = default;

 private:
  Kind kind_ = Kind::Zero;
  OmegaLattice lattice_;
  std::vector<complexd> values_;
  Poly q_;
  double lambda_mod_ = 0.0;
  double psi_support_ = 1.0;
  double psi_plateau_ = 0.8;
  std::shared_ptr<CapCover> caps_;
  std::vector<ModelPacket> packets_;
  int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Sampled fields
// ---------------------------------------------------------------------------

enum class RegionKind { Ball, Ellipse, Slab, Custom };

struct Region {
  RegionKind kind = RegionKind::Ball;
  std::vector<double> center;
  double radius = 0.0;                // Ball
  std::vector<double> semi_axes;      // Ellipse
  double slab_coord = 0.0;            // Slab: {x_n = slab_coord}, extent radius
  std::string description;

  static Region ball(std::vector<double> center, double radius);
  static Region ellipse(std::vector<double> center, std::vector<double> semi_axes);
  static Region custom(std::string description, double nominal_volume);
  double custom_volume = 0.0;

  bool contains(std::span<const double> x) const;
  double volume(int n) const;
};

enum class SamplingScheme { Grid, StratifiedRandom, Explicit };

struct SampledField {
  int n = 2;
  double lambda = 1.0;
  std::vector<double> points;  // flattened, n coords per point
  std::vector<complexd> values;
  Region region;
  SamplingScheme scheme = SamplingScheme::Explicit;
  std::uint64_t seed = 0;
  double grid_cell_volume = 0.0;  // Grid scheme integration weight per point

  size_t count() const { return values.size(); }
  std::span<const double> point(size_t i) const {
    return {points.data() + i * static_cast<size_t>(n), static_cast<size_t>(n)};
  }

  std::string csv() const;          // x coords, Re, Im
  std::string header_json() const;  // lambda, seed, region, scheme
};

struct LpEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for grid/deterministic estimates
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

enum class FastMode { On, Off, Audit };

struct EvalOptions {
  double oversample = 4.0;      // lattice nodes per oscillation period
  FastMode fast = FastMode::On; // phasor-recurrence rows vs plain sincos
  double extra_bandwidth = 0.0; // additional spectral margin (cycles/unit)
  std::optional<double> forced_spacing;  // overrides the resolution rule
};

/// Operator evaluation context: fixes (phase, amplitude, lambda, f), builds
/// the omega lattice once, then evaluates T^lambda f at arbitrary points.
class Evaluator {
 public:
  Evaluator(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
            const InputFunction& f, double max_point_norm, EvalOptions opts = {});

  complexd operator()(std::span<const double> x) const;
  void evaluate_block(std::span<const double> points_flat, std::span<complexd> out) const;

  const OmegaLattice& lattice() const { return lattice_; }
  double f_l2() const { return f_l2_; }      // lattice L^2 norm of f
  double f_mass() const { return f_mass_; }  // lattice integral of f (complex abs of sum)
  complexd f_integral() const { return f_integral_; }

 private:
  const PhaseSpec& phase_;
  AmplitudeSpec amp_;
  double lambda_;
  OmegaLattice lattice_;
  std::vector<complexd> weights_;  // f * a_omega * spacing^dim per node
  std::vector<std::pair<long, long>> row_support_;  // nonzero weight range per row
  double f_l2_ = 0.0;
  double f_mass_ = 0.0;
  complexd f_integral_{0.0, 0.0};
  EvalOptions opts_;
  // Dense omega-monomial form of phi with x-dependent coefficients.
  struct OmegaTerm {
    int e1, e2;
    Poly coeff_in_x;
  };
  std::vector<OmegaTerm> omega_form_;
  int deg1_ = 0, deg2_ = 0;

  complexd eval_one(std::span<const double> x, bool fast) const;
};

/// T^lambda f on an explicit point list.
SampledField evaluate(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                      const InputFunction& f, std::span<const double> points_flat,
                      EvalOptions opts = {});

/// Grid sample of a ball (n = 2 only) and stratified sample of a region.
SampledField evaluate_on_ball_grid(const PhaseSpec& phase, const AmplitudeSpec& amp,
                                   double lambda, const InputFunction& f, const Region& ball,
                                   double grid_spacing, EvalOptions opts = {});
SampledField evaluate_stratified(const PhaseSpec& phase, const AmplitudeSpec& amp,
                                 double lambda, const InputFunction& f, const Region& region,
                                 size_t count, std::uint64_t seed, EvalOptions opts = {});

LpEstimate lp_norm(const SampledField& field, double p);

/// ||T^lambda f||_{L^2(B_R)} / (R^{1/2} ||f||_2) for each R in r_list.
std::vector<std::pair<double, double>> hormander_ratio(const PhaseSpec& phase,
                                                       const AmplitudeSpec& amp, double lambda,
                                                       const InputFunction& f,
                                                       std::span<const double> r_list,
                                                       double grid_spacing = 1.0);

/// Fixed-slice variant: ratios ||T^lambda f||_{L^2(R^{n-1} x {x_n})} / ||f||_2.
std::vector<std::pair<double, double>> slab_ratio(const PhaseSpec& phase,
                                                  const AmplitudeSpec& amp, double lambda,
                                                  const InputFunction& f,
                                                  std::span<const double> xn_list,
                                                  double grid_spacing = 1.0);

// ---------------------------------------------------------------------------
// Non-stationary decay (1-D oscillatory integrals)
// ---------------------------------------------------------------------------

/// integral of e^{i lambda g(z)} a(z) dz with a plateau-bump amplitude.
struct Oscillatory1D {
  Poly g;                   // variable 0
  double support = 1.0;     // amplitude support radius
  double plateau_frac = 0.5;
};

struct DecayReport {
  std::vector<double> lambdas;
  std::vector<double> magnitudes;
  double fitted_slope = 0.0;
  double slope_ci95 = 0.0;
  double hypothesis_M = 0.0;  // measured constant in the derivative bounds
  double constant_C = 0.0;    // max over lambda of |I| M^{-N} lambda^N
};

DecayReport nonstationary_decay(const Oscillatory1D& spec, std::span<const double> lambdas,
                                int decay_order);

}  // namespace oscint
