#pragma once

#include <map>
#include <string>
#include <vector>

#include "oscint/field.hpp"
#include "oscint/phase.hpp"
#include "oscint/variety.hpp"

namespace oscint {

/// One scaling-law run: parameter grid, raw per-parameter measurements, the
/// fitted log-log slope with its interval, and the pass/fail verdict against
/// the expected exponent.
struct ExperimentReport {
  std::string name;
  int n = 3;
  std::uint64_t seed = 0;
  std::vector<double> parameters;    // lambda (or rho) grid
  std::vector<double> measurements;  // primary measurement per parameter
  std::map<std::string, std::vector<double>> extras;
  bool has_fit = false;
  double fitted_slope = 0.0;
  double slope_ci95 = 0.0;
  std::vector<double> residuals;
  double expected_slope = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  std::string to_json() const;
  std::string csv() const;  // parameter, measurement rows
  void fit_and_judge(double expected, double tol, bool lower_bound_only = false);
};

struct KakeyaOptions {
  size_t volume_samples = 20000;
  int curve_samples = 65;
  double omega_support = 0.5;
};

/// Kakeya compression: prescribed translations put every core curve inside
/// the degree-2 variety; the tube union's volume then scales like
/// lambda^{m + (n-m)/2} = lambda^{5/2} in n = 3.
ExperimentReport kakeya_compression(int n, std::span<const double> lambdas, std::uint64_t seed,
                                    KakeyaOptions opts = {});

struct MassConcentrationOptions {
  double c = 0.1;              // neighbourhood width
  size_t points = 1000;
  double psi_support = 0.45;
  double quantile = 0.10;
};

/// Bourgain-style mass concentration: |T^lambda f| holds at height
/// ~ lambda^{-floor(n/2)/2} on the unit-width neighbourhood of Z.
ExperimentReport mass_concentration(int n, std::span<const double> lambdas, std::uint64_t seed,
                                    MassConcentrationOptions opts = {});

/// Far-field contrast at a fixed lambda: values lambda/4 away from N_c(Z)
/// against the in-neighbourhood median.
struct ContrastReport {
  double in_median = 0.0;
  double far_max = 0.0;
};
ContrastReport mass_concentration_contrast(int n, double lambda, std::uint64_t seed,
                                           MassConcentrationOptions opts = {});

struct TransverseEquidistributionOptions {
  double delta = 0.1;      // packet delta
  double delta_m = 0.2;    // tangency exponent (desk scale: large enough that
                           // several v-offsets stay tangent and spread the slab)
  size_t points_per_rho = 600;
  double omega_support = 0.45;
  bool whole_space = false;  // m = n trivial variant
  bool single_packet = false;
};

/// Tangent-packet mass in shrinking neighbourhoods of a hyperplane: the
/// integral over N_{rho^{1/2+dm}}(Z) grows like rho^{(n-m)/2 + O(dm)}.
ExperimentReport transverse_equidistribution(int n, double R, std::span<const double> rhos,
                                             std::uint64_t seed,
                                             TransverseEquidistributionOptions opts = {});

struct SweepConfig {
  std::string phase = "bourgain";  // par | kakeya | bourgain
  std::string input = "mass-bump"; // zero | bump | mass-bump
  int n = 3;
  double p = 2.0;
  double region_frac = 0.7;
  size_t points = 2000;
  std::vector<double> lambdas;
  std::uint64_t seed = 1;
  double expected_slope = 0.5;
  double tolerance = 0.1;
};

/// Generic norm-versus-lambda driver.
ExperimentReport scaling_sweep(const SweepConfig& cfg);

/// Khintchine-style comparison at one lambda: L^2 of the signed packet sum
/// against the square-function L^2, which should agree within a small factor.
struct KhintchineReport {
  double signed_l2 = 0.0;
  double square_function_l2 = 0.0;
  double ratio = 1.0;
};
KhintchineReport khintchine_check(int n, double lambda, std::uint64_t seed,
                                  size_t points = 400);

}  // namespace oscint
