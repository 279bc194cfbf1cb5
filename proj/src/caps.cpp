#include "oscint/caps.hpp"

#include <cmath>

namespace oscint {

namespace {
double cinf_ratio(double t) {
  // 0 at t<=0, 1 at t>=1, all derivatives vanish at the ends.
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
}  // namespace

double CapProfile::step(double s) const { return cinf_ratio(s / width + 0.5); }

double CapProfile::eval1d(double t) const { return step(t + 0.5) - step(t - 0.5); }

CapCover::CapCover(int dim, double spacing, double domain_radius, CapProfile profile)
    : dim_(dim), spacing_(spacing), domain_radius_(domain_radius), profile_(profile) {
  if (dim != 1 && dim != 2) throw PreconditionError("CapCover: dim must be 1 or 2");
  if (spacing <= 0) throw PreconditionError("CapCover: spacing must be positive");
  // Keep every cap whose support can meet the domain ball.
  int kmax = static_cast<int>(std::floor(domain_radius / spacing + 1.0));
  double reach = domain_radius + spacing * profile_.support_half_width();
  if (dim == 1) {
    for (int i = -kmax; i <= kmax; ++i)
      if (std::abs(i * spacing) <= reach) caps_.push_back({i, 0});
  } else {
    for (int j = -kmax; j <= kmax; ++j)
      for (int i = -kmax; i <= kmax; ++i)
        if (std::hypot(i * spacing, j * spacing) <= reach) caps_.push_back({i, j});
  }
  for (size_t idx = 0; idx < caps_.size(); ++idx) index_[caps_[idx]] = static_cast<int>(idx);
}

std::vector<double> CapCover::center(const Key& k) const {
  std::vector<double> c(dim_);
  c[0] = k[0] * spacing_;
  if (dim_ == 2) c[1] = k[1] * spacing_;
  return c;
}

int CapCover::index_of(const Key& k) const {
  auto it = index_.find(k);
  return it == index_.end() ? -1 : it->second;
}

double CapCover::psi(const Key& k, std::span<const double> omega) const {
  double v = profile_.eval1d(omega[0] / spacing_ - k[0]);
  if (dim_ == 2) v *= profile_.eval1d(omega[1] / spacing_ - k[1]);
  return v;
}

double CapCover::psi_tilde(const Key& k, std::span<const double> omega) const {
  // 1 on supp psi plus a quarter-cap margin, gone by the full cap radius.
  double plateau = profile_.support_half_width() + 0.25;
  double support = std::max(1.0, plateau + 0.1);
  double v = 1.0;
  for (int d = 0; d < dim_; ++d) {
    double t = std::abs(omega[d] / spacing_ - k[d]);
    v *= plateau_bump(t, plateau, support);
    if (v == 0.0) return 0.0;
  }
  return v;
}

double CapCover::partition_sum(std::span<const double> omega) const {
  double s = 0;
  for (const auto& k : candidates(omega)) s += psi(k, omega);
  return s;
}

std::vector<CapCover::Key> CapCover::candidates(std::span<const double> omega) const {
  std::vector<Key> out;
  int i0 = static_cast<int>(std::lround(omega[0] / spacing_));
  int j0 = dim_ == 2 ? static_cast<int>(std::lround(omega[1] / spacing_)) : 0;
  for (int di = -1; di <= 1; ++di) {
    if (dim_ == 1) {
      out.push_back({i0 + di, 0});
    } else {
      for (int dj = -1; dj <= 1; ++dj) out.push_back({i0 + di, j0 + dj});
    }
  }
  return out;
}

CapCover::Key CapCover::cap_of(std::span<const double> omega) const {
  Key k{static_cast<int>(std::lround(omega[0] / spacing_)), 0};
  if (dim_ == 2) k[1] = static_cast<int>(std::lround(omega[1] / spacing_));
  return k;
}

}  // namespace oscint
