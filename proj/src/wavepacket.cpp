#include "oscint/wavepacket.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace oscint {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

// One Newton solve of d_omega phi^lambda((x', t); omega_theta) = v; x' is
// updated in place. Returns the final residual norm (lambda-scale).
double newton_slice(const PhaseSpec& phase, std::span<const double> omega_theta,
                    std::span<const double> v, double lambda, double t,
                    std::vector<double>& xp, int max_iter = 40) {
  int n = phase.n();
  std::vector<double> x(n);
  Eigen::VectorXd r(n - 1);
  auto residual = [&](const std::vector<double>& cur) {
    for (int i = 0; i < n - 1; ++i) x[i] = cur[i];
    x[n - 1] = t;
    auto g = phase.grad_omega_lambda(x, omega_theta, lambda);
    for (int i = 0; i < n - 1; ++i) r(i) = g[i] - v[i];
    return r.norm();
  };
  double rn = residual(xp);
  for (int it = 0; it < max_iter && rn > 1e-10 * lambda; ++it) {
    std::vector<double> xu(n);
    for (int i = 0; i < n - 1; ++i) xu[i] = x[i] / lambda;
    xu[n - 1] = t / lambda;
    auto m = phase.hess_omega_x(xu, omega_theta);
    Eigen::MatrixXd jac(n - 1, n - 1);
    for (int j = 0; j < n - 1; ++j)
      for (int k = 0; k < n - 1; ++k) jac(j, k) = m[j * n + k];
    Eigen::VectorXd step = jac.partialPivLu().solve(-r);
    if (!step.allFinite()) break;
    double tstep = 1.0;
    bool accepted = false;
    for (int back = 0; back < 30; ++back) {
      std::vector<double> trial = xp;
      for (int i = 0; i < n - 1; ++i) trial[i] += tstep * step(i);
      double rt = residual(trial);
      if (rt < rn) {
        xp = trial;
        rn = rt;
        accepted = true;
        break;
      }
      tstep *= 0.5;
    }
    if (!accepted) break;
  }
  return residual(xp);
}

bool slice_ok(const PhaseSpec& phase, double lambda, std::span<const double> xp, double t,
              double residual) {
  double s = t * t;
  for (double c : xp) s += c * c;
  bool in_domain = std::sqrt(s) <= lambda * phase.x_radius() * (1.0 + 1e-9);
  return in_domain && residual <= 1e-8 * lambda;
}

}  // namespace

std::vector<double> CoreCurve::interpolate(double s, int n) const {
  if (t.empty()) throw PreconditionError("core curve has no samples");
  if (s <= t.front()) return {gamma.begin(), gamma.begin() + (n - 1)};
  if (s >= t.back()) return {gamma.end() - (n - 1), gamma.end()};
  size_t hi = std::upper_bound(t.begin(), t.end(), s) - t.begin();
  size_t lo = hi - 1;
  double frac = (s - t[lo]) / (t[hi] - t[lo]);
  std::vector<double> out(n - 1);
  for (int d = 0; d < n - 1; ++d)
    out[d] = gamma[lo * (n - 1) + d] * (1 - frac) + gamma[hi * (n - 1) + d] * frac;
  return out;
}

CoreCurve core_curve(const PhaseSpec& phase, std::span<const double> omega_theta,
                     std::span<const double> v, double lambda,
                     std::span<const double> t_grid) {
  int n = phase.n();
  if (t_grid.size() < 2) throw PreconditionError("core_curve: need at least 2 t samples");
  CoreCurve curve;

  // Walk outward from the sample closest to 0, using continuation in t.
  size_t start = 0;
  for (size_t k = 1; k < t_grid.size(); ++k)
    if (std::abs(t_grid[k]) < std::abs(t_grid[start])) start = k;

  std::vector<std::vector<double>> sol(t_grid.size());
  std::vector<double> resid(t_grid.size(), -1.0);
  std::vector<double> seed(v.begin(), v.end());  // reduced phases: gamma ~ v
  auto solve_at = [&](size_t k, std::vector<double> guess) -> bool {
    double r = newton_slice(phase, omega_theta, v, lambda, t_grid[k], guess);
    if (!slice_ok(phase, lambda, guess, t_grid[k], r)) return false;
    sol[k] = std::move(guess);
    resid[k] = r;
    return true;
  };
  if (!solve_at(start, seed))
    throw SolverError("core_curve: no solution near t = " + std::to_string(t_grid[start]));
  size_t lo = start, hi = start;
  while (hi + 1 < t_grid.size() && solve_at(hi + 1, sol[hi])) ++hi;
  while (lo > 0 && solve_at(lo - 1, sol[lo])) --lo;

  curve.t_min = t_grid[lo];
  curve.t_max = t_grid[hi];

  // Endpoint refinement by bisection on solvability when the interval is cut
  // short inside the requested grid.
  auto refine = [&](double t_good, double t_bad, const std::vector<double>& anchor) {
    double a = t_good, b = t_bad;
    std::vector<double> guess = anchor;
    for (int it = 0; it < 25; ++it) {
      double mid = 0.5 * (a + b);
      std::vector<double> trial = guess;
      double r = newton_slice(phase, omega_theta, v, lambda, mid, trial);
      if (slice_ok(phase, lambda, trial, mid, r)) {
        a = mid;
        guess = trial;
      } else {
        b = mid;
      }
    }
    return a;
  };
  if (hi + 1 < t_grid.size()) curve.t_max = refine(t_grid[hi], t_grid[hi + 1], sol[hi]);
  if (lo > 0) curve.t_min = refine(t_grid[lo], t_grid[lo - 1], sol[lo]);

  for (size_t k = lo; k <= hi; ++k) {
    curve.t.push_back(t_grid[k]);
    curve.gamma.insert(curve.gamma.end(), sol[k].begin(), sol[k].end());
    curve.max_residual = std::max(curve.max_residual, resid[k]);
    // Analytic tangent: gamma' = -(d2_{w x'} phi)^{-1} d_w d_{x_n} phi at x/lambda.
    std::vector<double> xu(n);
    for (int i = 0; i < n - 1; ++i) xu[i] = sol[k][i] / lambda;
    xu[n - 1] = t_grid[k] / lambda;
    auto m = phase.hess_omega_x(xu, omega_theta);
    Eigen::MatrixXd jac(n - 1, n - 1);
    Eigen::VectorXd coln(n - 1);
    for (int j = 0; j < n - 1; ++j) {
      for (int kk = 0; kk < n - 1; ++kk) jac(j, kk) = m[j * n + kk];
      coln(j) = m[j * n + n - 1];
    }
    Eigen::VectorXd gp = jac.partialPivLu().solve(-coln);
    double nn = std::sqrt(1.0 + gp.squaredNorm());
    for (int i = 0; i < n - 1; ++i) curve.tangent.push_back(gp(i) / nn);
    curve.tangent.push_back(1.0 / nn);
  }
  return curve;
}

bool Tube::contains(std::span<const double> x) const {
  return core_distance(x) <= radius;
}

double Tube::core_distance(std::span<const double> x) const {
  int n = static_cast<int>(x.size());
  double xn = x[n - 1];
  if (norm2(x) > R * (1 + 1e-12) || xn < core.t_min || xn > core.t_max)
    return std::numeric_limits<double>::infinity();
  auto g = core.interpolate(xn, n);
  double s = 0;
  for (int d = 0; d < n - 1; ++d) s += sqr(x[d] - g[d]);
  return std::sqrt(s);
}

Tube make_tube(const PhaseSpec& phase, std::span<const double> omega_center,
               std::span<const double> v, double R, double delta, double lambda,
               int t_samples) {
  Tube tube;
  tube.omega_center.assign(omega_center.begin(), omega_center.end());
  tube.v.assign(v.begin(), v.end());
  tube.R = R;
  tube.lambda = lambda;
  tube.delta = delta;
  tube.radius = std::pow(R, 0.5 + delta);
  double T = std::min(R, 0.99 * lambda * phase.x_radius());
  std::vector<double> grid(t_samples);
  for (int k = 0; k < t_samples; ++k) grid[k] = -T + 2.0 * T * k / (t_samples - 1.0);
  tube.core = core_curve(phase, omega_center, v, lambda, grid);
  return tube;
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

namespace {

// Fourier transform of the eta profile, evaluated by a dense midpoint rule
// (the profile is C^inf with compact support, so this is spectrally accurate).
double profile_transform(const CapProfile& prof, double xi) {
  const int nodes = 4001;
  double hw = prof.support_half_width();
  double h = 2.0 * hw / nodes;
  double s = 0;
  for (int i = 0; i < nodes; ++i) {
    double t = -hw + (i + 0.5) * h;
    s += prof.eval1d(t) * std::cos(kTwoPi * xi * t);
  }
  return s * h;
}

struct LatticeIndexer {
  const OmegaLattice& lat;
  long j_front;
  explicit LatticeIndexer(const OmegaLattice& l) : lat(l), j_front(l.rows.front().j) {}
  // Index of node (i, j), or npos if outside.
  size_t at(long i, long j) const {
    long rr = j - j_front;
    if (rr < 0 || rr >= static_cast<long>(lat.rows.size())) return static_cast<size_t>(-1);
    const auto& row = lat.rows[rr];
    if (row.j != j || i < row.i_min || i > row.i_max) return static_cast<size_t>(-1);
    return row.offset + static_cast<size_t>(i - row.i_min);
  }
};

}  // namespace

Decomposition decompose(const InputFunction& f, double R, double delta, double lambda,
                        DecomposeOptions opts) {
  if (R < 4 || R > lambda)
    throw PreconditionError("decompose: need 4 <= R <= lambda");
  if (delta <= 0 || delta > 0.25)
    throw PreconditionError("decompose: delta must lie in (0, 1/4]");
  int dim = f.dim_hint();
  if (dim != 1 && dim != 2)
    throw PreconditionError("decompose: input dimension must be 1 or 2");

  Decomposition dec;
  dec.R = R;
  dec.delta = delta;
  dec.lambda = lambda;

  double s_cap = 1.0 / std::sqrt(R);
  double s_v = std::pow(R, (1.0 + delta) / 2.0);
  // Auto window: the cap profile's transform has decayed enough for the
  // 1e-6-level reconstruction residual once |z| s_cap ~ 45.
  int M = opts.v_window > 0
              ? opts.v_window
              : std::max(8, static_cast<int>(std::ceil(45.0 * std::pow(R, -delta / 2.0))));
  double v_max = M * s_v;

  dec.caps = std::make_shared<CapCover>(dim, s_cap, opts.support_radius,
                                        CapProfile{opts.cap_transition});

  double bw = v_max + s_v + f.bandwidth_hint() + 2.6 * opts.eval_max_x;
  double spacing = 1.0 / (opts.oversample * bw);
  double radius = std::min(1.0, opts.support_radius + 2 * s_cap);
  if (const OmegaLattice* own = f.own_lattice()) {
    double required = std::max(spacing, std::pow(R, -(1.0 + delta) / 2.0) / 4.0);
    if (own->spacing > required * (1 + 1e-9))
      throw ResolutionError("decompose: input lattice too coarse to resolve scale "
                            "R^{-(1+delta)/2}",
                            required);
    dec.lattice = *own;
  } else {
    dec.lattice = OmegaLattice::make(dim, spacing, radius);
  }
  const OmegaLattice& lat = dec.lattice;
  const double h = lat.spacing;
  LatticeIndexer indexer(lat);

  // Input samples and norm.
  std::vector<complexd> fvals(lat.size);
  double l2 = 0;
  for (size_t idx = 0; idx < lat.size; ++idx) {
    fvals[idx] = f.value_at_node(lat, idx);
    l2 += std::norm(fvals[idx]);
  }
  dec.f_l2 = std::sqrt(l2 * lat.weight());

  // Separable convolution kernel: K_v(zeta) = eta^(zeta) e^{-2 pi i v zeta}
  // with eta^ = s_v * uhat(s_v zeta) per axis; truncation at 6 / s_v.
  CapProfile eta{opts.eta_transition};
  long Km = static_cast<long>(std::ceil(opts.kernel_radius / (s_v * h)));
  std::vector<double> uhat(Km + 1);
  for (long m = 0; m <= Km; ++m) uhat[m] = profile_transform(eta, s_v * m * h);

  auto kernel_for = [&](double v_axis) {
    std::vector<complexd> k(2 * Km + 1);
    for (long m = -Km; m <= Km; ++m)
      k[m + Km] = h * s_v * uhat[std::abs(m)] * std::polar(1.0, -kTwoPi * v_axis * m * h);
    return k;
  };

  std::vector<complexd> recon(lat.size, complexd{0.0, 0.0});
  double tilde_hw = CapProfile{opts.cap_transition}.support_half_width() + 0.35;

  for (const auto& cap : dec.caps->caps()) {
    auto center = dec.caps->center(cap);
    // Block of nodes covering the psi~ support of this cap.
    long lo1 = static_cast<long>(std::ceil((center[0] - tilde_hw * s_cap) / h));
    long hi1 = static_cast<long>(std::floor((center[0] + tilde_hw * s_cap) / h));
    long lo2 = 0, hi2 = 0;
    if (dim == 2) {
      lo2 = static_cast<long>(std::ceil((center[1] - tilde_hw * s_cap) / h));
      hi2 = static_cast<long>(std::floor((center[1] + tilde_hw * s_cap) / h));
    }
    int ni = static_cast<int>(hi1 - lo1 + 1);
    int nj = static_cast<int>(hi2 - lo2 + 1);
    if (ni <= 0 || nj <= 0) continue;

    // g = psi_theta * f on the block; psi~_theta cached on the block.
    std::vector<complexd> g(static_cast<size_t>(ni) * nj, complexd{0.0, 0.0});
    std::vector<double> tilde(static_cast<size_t>(ni) * nj, 0.0);
    bool any = false;
    std::vector<double> w(dim);
    for (int jj = 0; jj < nj; ++jj)
      for (int ii = 0; ii < ni; ++ii) {
        w[0] = (lo1 + ii) * h;
        if (dim == 2) w[1] = (lo2 + jj) * h;
        size_t idx = indexer.at(lo1 + ii, dim == 2 ? lo2 + jj : 0);
        if (idx == static_cast<size_t>(-1)) continue;
        double psi = dec.caps->psi(cap, w);
        tilde[ii + static_cast<size_t>(ni) * jj] = dec.caps->psi_tilde(cap, w);
        if (psi == 0.0) continue;
        complexd val = psi * fvals[idx];
        g[ii + static_cast<size_t>(ni) * jj] = val;
        any |= (std::abs(val) > 0);
      }
    if (!any) continue;

    // Axis-1 convolutions, cached per v1.
    std::vector<std::vector<complexd>> conv1(2 * M + 1);
    for (int m1 = -M; m1 <= M; ++m1) {
      auto k1 = kernel_for(m1 * s_v);
      auto& out = conv1[m1 + M];
      out.assign(static_cast<size_t>(ni) * nj, complexd{0.0, 0.0});
      for (int jj = 0; jj < nj; ++jj)
        for (int ii = 0; ii < ni; ++ii) {
          complexd s{0.0, 0.0};
          long mlo = std::max<long>(-Km, ii - (ni - 1));
          long mhi = std::min<long>(Km, ii);
          for (long m = mlo; m <= mhi; ++m)
            s += k1[m + Km] * g[(ii - m) + static_cast<size_t>(ni) * jj];
          out[ii + static_cast<size_t>(ni) * jj] = s;
        }
    }

    for (int m1 = -M; m1 <= M; ++m1) {
      const auto& c1 = conv1[m1 + M];
      for (int m2 = (dim == 2 ? -M : 0); m2 <= (dim == 2 ? M : 0); ++m2) {
        WavePacket pk;
        pk.theta = cap;
        pk.omega_center = center;
        pk.v = {m1 * s_v};
        if (dim == 2) pk.v.push_back(m2 * s_v);
        pk.i0 = lo1;
        pk.j0 = lo2;
        pk.ni = ni;
        pk.nj = nj;
        pk.block.assign(static_cast<size_t>(ni) * nj, complexd{0.0, 0.0});
        if (dim == 1) {
          for (int ii = 0; ii < ni; ++ii) pk.block[ii] = tilde[ii] * c1[ii];
        } else {
          auto k2 = kernel_for(m2 * s_v);
          for (int jj = 0; jj < nj; ++jj)
            for (int ii = 0; ii < ni; ++ii) {
              complexd s{0.0, 0.0};
              long mlo = std::max<long>(-Km, jj - (nj - 1));
              long mhi = std::min<long>(Km, jj);
              for (long m = mlo; m <= mhi; ++m)
                s += k2[m + Km] * c1[ii + static_cast<size_t>(ni) * (jj - m)];
              pk.block[ii + static_cast<size_t>(ni) * jj] =
                  tilde[ii + static_cast<size_t>(ni) * jj] * s;
            }
        }
        double e = 0;
        for (const auto& z : pk.block) e += std::norm(z);
        pk.l2 = std::sqrt(e * lat.weight());
        if (pk.l2 <= opts.prune_l2 * std::max(dec.f_l2, 1e-300)) {
          ++dec.pruned_count;
          continue;
        }
        for (int jj = 0; jj < nj; ++jj)
          for (int ii = 0; ii < ni; ++ii) {
            size_t idx = indexer.at(lo1 + ii, dim == 2 ? lo2 + jj : 0);
            if (idx != static_cast<size_t>(-1))
              recon[idx] += pk.block[ii + static_cast<size_t>(ni) * jj];
          }
        dec.packets.push_back(std::move(pk));
      }
    }
  }

  double resid = 0, energy = 0;
  for (size_t idx = 0; idx < lat.size; ++idx)
    resid = std::max(resid, std::abs(fvals[idx] - recon[idx]));
  dec.reconstruction_residual = resid;
  for (const auto& pk : dec.packets) energy += pk.l2 * pk.l2;
  dec.orthogonality_defect = dec.f_l2 > 0 ? energy / (dec.f_l2 * dec.f_l2) : 0.0;
  return dec;
}

std::vector<complexd> Decomposition::sum_packets(std::span<const size_t> indices) const {
  std::vector<complexd> out(lattice.size, complexd{0.0, 0.0});
  LatticeIndexer indexer(lattice);
  for (size_t pi : indices) {
    const auto& pk = packets.at(pi);
    for (int jj = 0; jj < pk.nj; ++jj)
      for (int ii = 0; ii < pk.ni; ++ii) {
        size_t idx = indexer.at(pk.i0 + ii, lattice.dim == 2 ? pk.j0 + jj : 0);
        if (idx != static_cast<size_t>(-1))
          out[idx] += pk.block[ii + static_cast<size_t>(pk.ni) * jj];
      }
  }
  return out;
}

InputFunction Decomposition::as_grid_input(std::span<const size_t> indices) const {
  return InputFunction::grid_sampled(lattice, sum_packets(indices));
}

InputFunction Decomposition::single_packet_input(size_t index) const {
  std::array<size_t, 1> one{index};
  return as_grid_input(one);
}

std::string Decomposition::summary_csv(const PhaseSpec& phase) const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "theta_i,theta_j,v1,v2,l2,t_min,t_max\n";
  for (const auto& pk : packets) {
    Tube tube = make_tube(phase, pk.omega_center, pk.v, R, delta, lambda, 33);
    os << pk.theta[0] << "," << pk.theta[1] << "," << pk.v[0] << ","
       << (pk.v.size() > 1 ? pk.v[1] : 0.0) << "," << pk.l2 << "," << tube.core.t_min << ","
       << tube.core.t_max << "\n";
  }
  return os.str();
}

double concentration_profile(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                             const InputFunction& packet, const Tube& tube,
                             std::span<const double> exterior_points_flat, EvalOptions opts) {
  int n = phase.n();
  size_t count = exterior_points_flat.size() / static_cast<size_t>(n);
  if (count == 0) throw PreconditionError("concentration_profile: empty exterior point set");
  for (size_t k = 0; k < count; ++k) {
    std::span<const double> x(exterior_points_flat.data() + k * n, static_cast<size_t>(n));
    if (tube.core_distance(x) <= 2.0 * tube.radius)
      throw PreconditionError("concentration_profile: point inside the 2-dilated tube");
  }
  // Core samples: points on the curve itself.
  std::vector<double> core_pts;
  size_t nsamp = tube.core.t.size();
  for (size_t k = 0; k < nsamp; k += std::max<size_t>(1, nsamp / 33)) {
    auto g = tube.core.gamma_at(k, n);
    for (int d = 0; d < n - 1; ++d) core_pts.push_back(g[d]);
    core_pts.push_back(tube.core.t[k]);
  }
  auto ext = evaluate(phase, amp, lambda, packet, exterior_points_flat, opts);
  auto core = evaluate(phase, amp, lambda, packet, core_pts, opts);
  double ext_max = 0, core_max = 0;
  for (const auto& v : ext.values) ext_max = std::max(ext_max, std::abs(v));
  for (const auto& v : core.values) core_max = std::max(core_max, std::abs(v));
  if (core_max == 0) throw PreconditionError("concentration_profile: packet vanishes on core");
  return ext_max / core_max;
}

// ---------------------------------------------------------------------------
// Regrouping at a smaller scale
// ---------------------------------------------------------------------------

RegroupResult regroup_at_scale(const PhaseSpec& phase, const Decomposition& dec,
                               std::span<const double> y, double rho) {
  double R = dec.R;
  if (rho < std::sqrt(R) * (1 - 1e-9) || rho > std::pow(R, 1.0 - dec.delta) * (1 + 1e-9))
    throw PreconditionError("regroup_at_scale: need R^{1/2} <= rho <= R^{1-delta}");
  int n = phase.n();
  int dim = n - 1;
  double lambda = dec.lambda;
  double s_rho_cap = 1.0 / std::sqrt(rho);
  double s_rho_v = std::pow(rho, (1.0 + dec.delta) / 2.0);

  CapCover rho_caps(dim, s_rho_cap, 1.0);
  auto translated = translate_phase(phase, y, lambda);

  RegroupResult res;
  for (const auto& pk : dec.packets) {
    PacketWindow win;
    win.theta_tilde = rho_caps.cap_of(pk.omega_center);
    auto vbar = phase.grad_omega_lambda(y, pk.omega_center, lambda);
    win.w_center.resize(dim);
    for (int d = 0; d < dim; ++d)
      win.w_center[d] = std::round((pk.v[d] - vbar[d]) / s_rho_v) * s_rho_v;
    win.cap_dist_bound = 2.0 * s_rho_cap;
    win.v_dist_bound = 2.0 * std::pow(R, (1.0 + dec.delta) / 2.0);
    res.windows.push_back(win);
  }

  for (size_t k = 0; k < dec.packets.size(); ++k) {
    std::vector<long> wkey(dim);
    for (int d = 0; d < dim; ++d)
      wkey[d] = std::lround(res.windows[k].w_center[d] / s_rho_v);
    res.families[{res.windows[k].theta_tilde, wkey}].push_back(k);
  }

  // Curve identity and core-proximity checks on a sampled subset.
  double yn = y[n - 1];
  size_t step = std::max<size_t>(1, dec.packets.size() / 8);
  for (size_t k = 0; k < dec.packets.size(); k += step) {
    const auto& pk = dec.packets[k];
    auto vbar = phase.grad_omega_lambda(y, pk.omega_center, lambda);
    std::vector<double> v_shift(dim), w_snap(dim);
    for (int d = 0; d < dim; ++d) {
      v_shift[d] = pk.v[d] - vbar[d];
      w_snap[d] = res.windows[k].w_center[d];
    }
    std::vector<double> tgrid(21);
    for (int s = 0; s < 21; ++s) tgrid[s] = yn - rho + 2.0 * rho * s / 20.0;
    CoreCurve orig, shifted, family;
    try {
      orig = core_curve(phase, pk.omega_center, pk.v, lambda, tgrid);
      std::vector<double> tgrid2(21);
      for (int s = 0; s < 21; ++s) tgrid2[s] = tgrid[s] - yn;
      shifted = core_curve(translated, pk.omega_center, v_shift, lambda, tgrid2);
      auto theta_center = rho_caps.center(res.windows[k].theta_tilde);
      family = core_curve(translated, theta_center, w_snap, lambda, tgrid2);
    } catch (const SolverError&) {
      continue;  // packet leaves the domain near y; skip the spot check
    }
    for (size_t s = 0; s < orig.t.size(); ++s) {
      double tt = orig.t[s];
      if (tt - yn < shifted.t_min || tt - yn > shifted.t_max) continue;
      auto g = orig.gamma_at(s, n);
      auto gs = shifted.interpolate(tt - yn, n);
      auto gf = family.interpolate(tt - yn, n);
      double d_ident = 0, d_family = 0;
      for (int d = 0; d < dim; ++d) {
        d_ident = std::max(d_ident, std::abs(g[d] - (gs[d] + y[d])));
        d_family = std::max(d_family, std::abs(g[d] - (gf[d] + y[d])));
      }
      res.curve_identity_residual = std::max(res.curve_identity_residual, d_ident);
      res.max_core_mismatch = std::max(res.max_core_mismatch, d_family);
    }
  }
  return res;
}

}  // namespace oscint
