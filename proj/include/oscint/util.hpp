#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscint {

using complexd = std::complex<double>;

/// Thrown when an operation's stated precondition is violated (CLI exit 2).
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a lattice or grid cannot resolve the requested oscillation
/// (CLI exit 3). Carries the spacing that would have been needed.
struct ResolutionError : std::runtime_error {
  double required_spacing = 0.0;
  ResolutionError(const std::string& msg, double required)
      : std::runtime_error(msg), required_spacing(required) {}
};

/// Thrown when an iterative solver (Newton, projection) fails to converge.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Counter-based deterministic RNG (splitmix64 core). Streams depend only on
/// the seed, never on call order elsewhere, so experiment outputs are
/// bit-reproducible across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (always consumes two uniforms).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform point in the closed ball of radius r in dim dimensions.
  std::vector<double> in_ball(int dim, double r) {
    while (true) {
      std::vector<double> p(dim);
      double s = 0;
      for (auto& c : p) {
        c = uniform(-1.0, 1.0);
        s += c * c;
      }
      if (s <= 1.0) {
        for (auto& c : p) c *= r;
        return p;
      }
    }
  }

 private:
  std::uint64_t state_;
};

/// Deterministic pairwise (cascade) summation; fixed association order.
double pairwise_sum(std::span<const double> v);
complexd pairwise_sum(std::span<const complexd> v);

/// q-th percentile (q in [0,1]) with linear interpolation; copies and sorts.
double percentile(std::vector<double> v, double q);

/// Least-squares fit of log(y) against log(x).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci95 = 0.0;  // 1.96 * slope_stderr
  std::vector<double> residuals;
};
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

inline double sqr(double x) { return x * x; }

inline double norm2(std::span<const double> v) {
  double s = 0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

/// Angle in [0, pi/2] between two nonzero vectors, ignoring orientation.
double line_angle(std::span<const double> a, std::span<const double> b);

/// C^inf transition 1 -> 0 on [0,1] built from exp(-1/t); all derivatives
/// vanish at both ends.
double smooth_step_down(double t);

/// Radial profile: 1 on [0, plateau], smooth fall to 0 at support.
double plateau_bump(double r, double plateau, double support);

}  // namespace oscint
