#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "oscint/util.hpp"

namespace oscint {

/// One-dimensional partition-of-unity profile on the integer lattice:
/// u(t) = T(t + 1/2) - T(t - 1/2) for a C^inf monotone step T with transition
/// width `width`, so that sum_k u(t - k) = 1 identically and
/// supp u = [-(1+width)/2, (1+width)/2]. Narrow widths concentrate cap energy.
struct CapProfile {
  double width = 0.3;

  double step(double s) const;    // 0 -> 1 transition about s = 0
  double eval1d(double t) const;  // the profile u
  double support_half_width() const { return 0.5 * (1.0 + width); }
};

/// Cover of a ball in R^dim (dim = 1 or 2) by caps centred on spacing * Z^dim.
/// psi_k form an exact partition of unity; psi_tilde_k is 1 on a quarter-cap
/// neighbourhood of supp psi_k and still supported in the cap.
class CapCover {
 public:
  using Key = std::array<int, 2>;  // second entry unused when dim == 1

  CapCover(int dim, double spacing, double domain_radius, CapProfile profile = {});

  int dim() const { return dim_; }
  double spacing() const { return spacing_; }
  const std::vector<Key>& caps() const { return caps_; }
  std::vector<double> center(const Key& k) const;
  int index_of(const Key& k) const;  // -1 when the cap is not in the cover

  double psi(const Key& k, std::span<const double> omega) const;
  double psi_tilde(const Key& k, std::span<const double> omega) const;
  /// Caps whose support can contain omega (at most 3^dim candidates).
  std::vector<Key> candidates(std::span<const double> omega) const;
  /// Nominal cap of omega (nearest centre).
  Key cap_of(std::span<const double> omega) const;

  double partition_sum(std::span<const double> omega) const;  // should be 1

 private:
  int dim_;
  double spacing_;
  double domain_radius_;
  CapProfile profile_;
  std::vector<Key> caps_;
  std::map<Key, int> index_;
};

}  // namespace oscint
