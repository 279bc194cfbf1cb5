#include "oscint/util.hpp"

#include <algorithm>
#include <cmath>

namespace oscint {

namespace {

template <class T>
T pairwise_impl(std::span<const T> v) {
  if (v.size() <= 8) {
    T s{};
    for (const auto& x : v) s += x;
    return s;
  }
  size_t half = v.size() / 2;
  return pairwise_impl(v.first(half)) + pairwise_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_impl(v); }
complexd pairwise_sum(std::span<const complexd> v) { return pairwise_impl(v); }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw PreconditionError("percentile of empty sample");
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw PreconditionError("log-log fit needs >= 3 points");
  size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (x[i] <= 0 || y[i] <= 0)
      throw PreconditionError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  fit.residuals.resize(n);
  for (size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += fit.residuals[i] * fit.residuals[i];
  }
  if (n > 2) fit.slope_stderr = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
  fit.ci95 = 1.96 * fit.slope_stderr;
  return fit;
}

namespace {
double cinf_zeta(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double smooth_step_down(double t) {
  if (t <= 0) return 1.0;
  if (t >= 1) return 0.0;
  double a = cinf_zeta(1.0 - t);
  double b = cinf_zeta(t);
  return a / (a + b);
}

double plateau_bump(double r, double plateau, double support) {
  if (r >= support) return 0.0;
  if (r <= plateau) return 1.0;
  return smooth_step_down((r - plateau) / (support - plateau));
}

double line_angle(std::span<const double> a, std::span<const double> b) {
  double dot = 0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double c = std::abs(dot) / (norm2(a) * norm2(b));
  return std::acos(std::min(1.0, c));
}

}  // namespace oscint
