#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscint/polynomial.hpp"
#include "oscint/util.hpp"

namespace oscint {

// Variable layout inside phase polynomials: indices 0..n-1 are x_1..x_n,
// indices n..2n-2 are omega_1..omega_{n-1}. All supported phases are
// polynomial in (x; omega), so every derivative below is symbolic.

enum class PhaseKind { ExtensionGraph, ModelBlockDiag, Reduced, Translated };

enum class AmplitudeKind { IndicatorSmoothed, TensorBump, ConstantOneOnOmega };

/// Amplitude a(x; omega) at unit scale; the operator uses a(x/lambda; omega).
struct AmplitudeSpec {
  AmplitudeKind kind = AmplitudeKind::IndicatorSmoothed;
  double x_support = 1.0;      // support radius in x (unit scale)
  double omega_support = 1.0;  // support radius in omega
  double plateau_frac = 0.8;   // fraction of the support where a == 1
  int smoothness = -1;         // -1 = C^inf profiles

  double eval(std::span<const double> x_unit, std::span<const double> omega) const;
  double eval_omega_only(std::span<const double> omega) const;
};

struct CurvatureClass {
  enum Value { PositiveDefinite, Indefinite, Degenerate } value;
  std::string name() const;
};

struct CurvatureReport {
  std::vector<double> eigenvalues;
  CurvatureClass classification;
  std::vector<double> gauss_vector;
};

/// Measured sup-norms of the reduced-form closeness conditions; reported, not
/// enforced (the smallness thresholds are left to callers).
struct ReductionReport {
  double sup_dwx_minus_identity = 0.0;   // ||d^2_{omega x'} phi - I||_op
  double sup_domega_dxn = 0.0;           // |d_omega d_{x_n} phi|
  double sup_dww_dxk_minus_delta = 0.0;  // ||d^2_{ww} d_{x_k} phi - delta_{kn} I||_op
  double phi_x0_residual = 0.0;          // sup |phi(x;0)|
  double phi_0omega_residual = 0.0;      // sup |phi(0;omega)|
};

class PhaseSpec {
 public:
  /// phi = <x', omega> + (1/2) <A(x_n) omega, omega> for a block-diagonal
  /// polynomial matrix A with A(0) = 0; blocks are given as square matrices of
  /// polynomials in the single variable t.
  static PhaseSpec model_blockdiag(const std::vector<std::vector<std::vector<Poly>>>& blocks,
                                   int n, double x_radius = 1.0, double omega_radius = 1.0);

  /// phi = <x', omega> + x_n h(omega); h a polynomial over omega variables.
  static PhaseSpec extension_graph(const Poly& h, int n, double x_radius = 1.0,
                                   double omega_radius = 1.0);

  /// phi = <x', omega> + x_n h(omega) + E(x; omega) with the modulation
  /// normalisation phi(x;0) = phi(0;omega) = 0.
  static PhaseSpec reduced(const Poly& h, const Poly& error_term, int n,
                           double x_radius = 1.0, double omega_radius = 1.0);

  // Named phases used throughout.
  static PhaseSpec paraboloid(int n);                     // h = |omega|^2 / 2
  static PhaseSpec hyperbolic_paraboloid();               // n=3, h = w1 w2
  static PhaseSpec kakeya_compression_example(int n);     // blocks [[t,t^2],[t^2,t+t^3]]
  static PhaseSpec mass_concentration_example(int n);     // blocks [[0,t],[t,t^2]]

  int n() const { return n_; }
  PhaseKind kind() const { return kind_; }
  double x_radius() const { return x_radius_; }
  double omega_radius() const { return omega_radius_; }
  const Poly& phi_poly() const { return phi_; }
  const Poly& h_poly() const;  // extension/reduced kinds only

  int omega_var(int j) const { return n_ + j; }  // 0-based omega_{j+1}

  // Pointwise evaluators (unit scale).
  double phi(std::span<const double> x, std::span<const double> omega) const;
  std::vector<double> grad_omega(std::span<const double> x, std::span<const double> omega) const;
  std::vector<double> grad_x(std::span<const double> x, std::span<const double> omega) const;
  /// Mixed Hessian rows d_{omega_j} d_x phi, an (n-1) x n matrix (row-major).
  std::vector<double> hess_omega_x(std::span<const double> x, std::span<const double> omega) const;
  std::vector<double> hess_omega_omega(std::span<const double> x, std::span<const double> omega) const;

  // Rescaled operator data: phi^lambda(x; omega) = lambda phi(x/lambda; omega).
  double phi_lambda(std::span<const double> x, std::span<const double> omega, double lambda) const;
  std::vector<double> grad_omega_lambda(std::span<const double> x, std::span<const double> omega,
                                        double lambda) const;
  /// phi^lambda with x frozen, as a polynomial in the omega variables.
  Poly phi_lambda_in_omega(std::span<const double> x, double lambda) const;

  /// Generalised Gauss map G = G0/|G0| at unit scale; throws SolverError when
  /// the rank condition H1 fails at the point.
  std::vector<double> gauss_map(std::span<const double> x, std::span<const double> omega) const;
  std::vector<double> gauss_map_lambda(std::span<const double> x, std::span<const double> omega,
                                       double lambda) const;

  CurvatureReport classify_curvature(std::span<const double> x,
                                     std::span<const double> omega0) const;

  /// Implicit solve of d_{x'} phi(x; Psi) = u for Psi (damped Newton from u).
  std::vector<double> solve_psi(std::span<const double> x, std::span<const double> u,
                                double tol = 1e-10, int max_iter = 50) const;
  /// Implicit solve of d_omega phi((Phi, x_n); omega) = zp for Phi (from zp).
  std::vector<double> solve_phi_map(std::span<const double> zp, double x_n,
                                    std::span<const double> omega, double tol = 1e-10,
                                    int max_iter = 50) const;
  /// Graph reparametrisation h_x(u) = d_{x_n} phi(x; Psi(x; u)).
  double graph_height(std::span<const double> x, std::span<const double> u) const;

  ReductionReport reduction_report(int samples_per_axis = 5) const;

  std::string to_json() const;
  static PhaseSpec from_json(const std::string& text);

 private:
  PhaseSpec() = default;
  void finalize();

  int n_ = 0;
  PhaseKind kind_ = PhaseKind::ExtensionGraph;
  double x_radius_ = 1.0;
  double omega_radius_ = 1.0;
  Poly phi_;
  std::optional<Poly> h_;
  std::optional<Poly> error_;
  std::vector<std::vector<std::vector<Poly>>> blocks_;  // model kind
  // Cached symbolic derivatives.
  std::vector<Poly> dw_;                 // d_{omega_j} phi
  std::vector<Poly> dx_;                 // d_{x_i} phi
  std::vector<std::vector<Poly>> dwx_;   // [j][i] = d_{omega_j} d_{x_i} phi
  std::vector<std::vector<Poly>> dww_;   // [j][k] = d^2_{omega_j omega_k} phi

  friend PhaseSpec translate_phase(const PhaseSpec&, std::span<const double>, double);
  friend PhaseSpec parabolic_rescale(const PhaseSpec&, std::span<const double>, double);
};

/// phi~(x; omega) = phi(x + y/lambda; omega) - phi(y/lambda; omega); requires
/// y/lambda inside the x-domain.
PhaseSpec translate_phase(const PhaseSpec& phase, std::span<const double> y, double lambda);

/// Lorentz-style (rho^{-1}, rho^{-2}) rescaling about omega_bar: replaces h by
/// rho^2 (h(omega_bar + omega/rho) - h(omega_bar) - <dh(omega_bar), omega>/rho)
/// and transforms the error term accordingly.
PhaseSpec parabolic_rescale(const PhaseSpec& phase, std::span<const double> omega_bar, double rho);

}  // namespace oscint
