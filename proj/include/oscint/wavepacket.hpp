#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oscint/caps.hpp"
#include "oscint/field.hpp"
#include "oscint/phase.hpp"

namespace oscint {

// ---------------------------------------------------------------------------
// Core curves and tubes
// ---------------------------------------------------------------------------

/// Solution samples of d_omega phi^lambda(gamma(t), t; omega_theta) = v,
/// restricted to the maximal solvable interval around t = 0.
struct CoreCurve {
  std::vector<double> t;
  std::vector<double> gamma;     // (n-1) coords per sample
  std::vector<double> tangent;   // n coords per sample: (gamma'(t), 1) normalised
  double t_min = 0.0, t_max = 0.0;
  double max_residual = 0.0;     // sup_t |d_omega phi^lambda - v|

  std::span<const double> gamma_at(size_t k, int n) const {
    return {gamma.data() + k * static_cast<size_t>(n - 1), static_cast<size_t>(n - 1)};
  }
  /// Linear interpolation of gamma at time s (s must lie in [t_min, t_max]).
  std::vector<double> interpolate(double s, int n) const;
};

CoreCurve core_curve(const PhaseSpec& phase, std::span<const double> omega_theta,
                     std::span<const double> v, double lambda, std::span<const double> t_grid);

struct Tube {
  std::vector<double> omega_center;
  std::vector<double> v;
  CoreCurve core;
  double radius = 0.0;  // R^{1/2 + delta}
  double R = 0.0, lambda = 0.0, delta = 0.0;

  bool contains(std::span<const double> x) const;
  double core_distance(std::span<const double> x) const;  // |x' - gamma(x_n)|
};

Tube make_tube(const PhaseSpec& phase, std::span<const double> omega_center,
               std::span<const double> v, double R, double delta, double lambda,
               int t_samples = 129);

// ---------------------------------------------------------------------------
// Scale-R wave packet decomposition
// ---------------------------------------------------------------------------

struct WavePacket {
  CapCover::Key theta;
  std::vector<double> omega_center;
  std::vector<double> v;
  double l2 = 0.0;
  // Values on the decomposition lattice, restricted to the cap block.
  long i0 = 0, j0 = 0;
  int ni = 0, nj = 1;
  std::vector<complexd> block;
};

struct DecomposeOptions {
  double support_radius = 0.8;   // caps cover B(0, support_radius)
  double cap_transition = 0.3;
  double eta_transition = 0.5;
  int v_window = 0;              // half-width in v-lattice steps; 0 = automatic
  double oversample = 2.5;       // lattice oversampling vs total z-bandwidth
  double eval_max_x = 0.0;       // also resolve T^lambda evaluation out to |x| <= this
  double prune_l2 = 1e-9;        // drop packets below prune_l2 * ||f||_2
  double kernel_radius = 6.0;    // eta-hat truncation, in units of R^{-(1+delta)/2}
};

struct Decomposition {
  double R = 0.0, delta = 0.0, lambda = 0.0;
  OmegaLattice lattice;
  std::shared_ptr<CapCover> caps;
  std::vector<WavePacket> packets;
  double f_l2 = 0.0;
  double reconstruction_residual = 0.0;  // ||f - sum||_inf
  double orthogonality_defect = 0.0;     // sum ||f_tv||^2 / ||f||^2
  size_t pruned_count = 0;

  /// Sum of the chosen packets as values on the decomposition lattice.
  std::vector<complexd> sum_packets(std::span<const size_t> indices) const;
  InputFunction as_grid_input(std::span<const size_t> indices) const;
  InputFunction single_packet_input(size_t index) const;

  std::string summary_csv(const PhaseSpec& phase) const;
};

/// Scale-R decomposition of f into cap x modulation pieces; the pieces
/// reconstruct f up to the reported sup-norm residual and are almost
/// orthogonal.
Decomposition decompose(const InputFunction& f, double R, double delta, double lambda,
                        DecomposeOptions opts = {});

/// max |T f_tv| over exterior points divided by max |T f_tv| over core samples.
double concentration_profile(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                             const InputFunction& packet, const Tube& tube,
                             std::span<const double> exterior_points_flat,
                             EvalOptions opts = {});

// ---------------------------------------------------------------------------
// Re-decomposition bookkeeping at a smaller scale rho
// ---------------------------------------------------------------------------

struct PacketWindow {
  CapCover::Key theta_tilde;      // rho-scale cap containing omega_theta
  std::vector<double> w_center;   // v - vbar(y; omega_theta), snapped to the rho v-lattice
  double cap_dist_bound = 0.0;    // C rho^{-1/2}
  double v_dist_bound = 0.0;      // C R^{(1+delta)/2}
};

struct RegroupResult {
  std::vector<PacketWindow> windows;            // one per scale-R packet
  std::map<std::pair<CapCover::Key, std::vector<long>>, std::vector<size_t>> families;
  double max_core_mismatch = 0.0;               // Hausdorff-style core distance check
  double curve_identity_residual = 0.0;         // gamma = gamma~ shifted, sampled
};

/// Predicts, for each scale-R packet, the scale-rho packets of its recentred
/// version at y, and partitions the packet list into the regrouped families.
RegroupResult regroup_at_scale(const PhaseSpec& phase, const Decomposition& dec,
                               std::span<const double> y, double rho);

}  // namespace oscint
