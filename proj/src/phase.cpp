#include "oscint/phase.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace oscint {

namespace {

std::vector<std::string> phase_var_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  for (int j = 1; j < n; ++j) names.push_back("w" + std::to_string(j));
  return names;
}

std::string point_str(std::span<const double> x, std::span<const double> omega) {
  std::ostringstream os;
  os << "x=(";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << "), omega=(";
  for (size_t i = 0; i < omega.size(); ++i) os << (i ? "," : "") << omega[i];
  os << ")";
  return os.str();
}

std::vector<double> join_point(std::span<const double> x, std::span<const double> omega) {
  std::vector<double> p(x.begin(), x.end());
  p.insert(p.end(), omega.begin(), omega.end());
  return p;
}

}  // namespace

double AmplitudeSpec::eval_omega_only(std::span<const double> omega) const {
  double r = norm2(omega);
  switch (kind) {
    case AmplitudeKind::ConstantOneOnOmega:
      return r <= omega_support ? 1.0 : 0.0;
    case AmplitudeKind::IndicatorSmoothed:
      return plateau_bump(r, plateau_frac * omega_support, omega_support);
    case AmplitudeKind::TensorBump: {
      double v = 1.0;
      for (double w : omega)
        v *= plateau_bump(std::abs(w), plateau_frac * omega_support, omega_support);
      return v;
    }
  }
  return 0.0;
}

double AmplitudeSpec::eval(std::span<const double> x_unit, std::span<const double> omega) const {
  double w = eval_omega_only(omega);
  if (w == 0.0 || kind == AmplitudeKind::ConstantOneOnOmega) return w;
  return w * plateau_bump(norm2(x_unit), plateau_frac * x_support, x_support);
}

std::string CurvatureClass::name() const {
  switch (value) {
    case PositiveDefinite: return "positive-definite";
    case Indefinite: return "indefinite";
    case Degenerate: return "degenerate";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

void PhaseSpec::finalize() {
  dw_.clear();
  dx_.clear();
  dwx_.clear();
  dww_.clear();
  for (int j = 0; j < n_ - 1; ++j) dw_.push_back(phi_.derivative(omega_var(j)));
  for (int i = 0; i < n_; ++i) dx_.push_back(phi_.derivative(i));
  dwx_.resize(n_ - 1);
  dww_.resize(n_ - 1);
  for (int j = 0; j < n_ - 1; ++j) {
    for (int i = 0; i < n_; ++i) dwx_[j].push_back(dw_[j].derivative(i));
    for (int k = 0; k < n_ - 1; ++k) dww_[j].push_back(dw_[j].derivative(omega_var(k)));
  }
}

PhaseSpec PhaseSpec::model_blockdiag(const std::vector<std::vector<std::vector<Poly>>>& blocks,
                                     int n, double x_radius, double omega_radius) {
  if (n < 2) throw PreconditionError("model phase: n must be >= 2");
  int total = 0;
  for (const auto& b : blocks) {
    size_t d = b.size();
    if (d == 0 || d > 2) throw PreconditionError("model phase: blocks must be 1x1 or 2x2");
    for (const auto& row : b)
      if (row.size() != d) throw PreconditionError("model phase: block is not square");
    for (size_t r = 0; r < d; ++r)
      for (size_t c = 0; c < d; ++c) {
        if (!(b[r][c] - b[c][r]).is_zero(0.0))
          throw PreconditionError("model phase: non-symmetric block");
        Poly at_zero = b[r][c].eval_partial(std::array{0}, std::array{0.0});
        if (!at_zero.is_zero(0.0)) throw PreconditionError("model phase: A(0) != 0");
      }
    total += static_cast<int>(d);
  }
  if (total != n - 1)
    throw PreconditionError("model phase: blocks tile " + std::to_string(total) +
                            " dims, expected " + std::to_string(n - 1));

  PhaseSpec p;
  p.n_ = n;
  p.kind_ = PhaseKind::ModelBlockDiag;
  p.x_radius_ = x_radius;
  p.omega_radius_ = omega_radius;
  p.blocks_ = blocks;
  Poly phi;
  for (int i = 0; i < n - 1; ++i) phi += Poly::var(i) * Poly::var(p.omega_var(i));
  Poly xn = Poly::var(n - 1);
  int off = 0;
  for (const auto& b : blocks) {
    int d = static_cast<int>(b.size());
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        Poly entry = b[r][c].substitute(0, xn);  // t -> x_n
        phi += 0.5 * entry * Poly::var(p.omega_var(off + r)) * Poly::var(p.omega_var(off + c));
      }
    off += d;
  }
  p.phi_ = phi;
  p.finalize();
  return p;
}

PhaseSpec PhaseSpec::extension_graph(const Poly& h, int n, double x_radius,
                                     double omega_radius) {
  if (n < 2) throw PreconditionError("extension phase: n must be >= 2");
  for (int i = 0; i < n; ++i)
    if (h.degree_in(i) > 0)
      throw PreconditionError("extension phase: h must depend on omega variables only");
  PhaseSpec p;
  p.n_ = n;
  p.kind_ = PhaseKind::ExtensionGraph;
  p.x_radius_ = x_radius;
  p.omega_radius_ = omega_radius;
  p.h_ = h;
  Poly phi;
  for (int i = 0; i < n - 1; ++i) phi += Poly::var(i) * Poly::var(p.omega_var(i));
  phi += Poly::var(n - 1) * h;
  p.phi_ = phi;
  p.finalize();
  return p;
}

PhaseSpec PhaseSpec::reduced(const Poly& h, const Poly& error_term, int n, double x_radius,
                             double omega_radius) {
  PhaseSpec p = extension_graph(h, n, x_radius, omega_radius);
  // Modulation normalisation: every error term must vanish at omega=0 and x=0.
  for (const auto& [e, c] : error_term.terms()) {
    int degx = 0, degw = 0;
    for (int i = 0; i < n; ++i) degx += e[i];
    for (int j = 0; j < n - 1; ++j) degw += e[p.omega_var(j)];
    if (degx == 0 || degw == 0)
      throw PreconditionError("reduced phase: error term must vanish at x=0 and omega=0");
  }
  std::vector<double> zero(n - 1, 0.0);
  if (std::abs(h.eval(join_point(std::vector<double>(n, 0.0), zero))) > 0)
    throw PreconditionError("reduced phase: h(0) != 0");
  p.kind_ = PhaseKind::Reduced;
  p.error_ = error_term;
  p.phi_ += error_term;
  p.finalize();
  return p;
}

PhaseSpec PhaseSpec::paraboloid(int n) {
  Poly h;
  for (int j = 0; j < n - 1; ++j) h += 0.5 * Poly::var(n + j, 1.0, 2);
  return extension_graph(h, n);
}

PhaseSpec PhaseSpec::hyperbolic_paraboloid() {
  Poly h = Poly::var(3) * Poly::var(4);  // w1 * w2 with n=3
  return extension_graph(h, 3);
}

namespace {
std::vector<std::vector<std::vector<Poly>>> parity_blocks(int n, const Poly& a11,
                                                          const Poly& a12, const Poly& a22,
                                                          const Poly& tail) {
  std::vector<std::vector<std::vector<Poly>>> blocks;
  int pairs = (n - 1) / 2;
  for (int i = 0; i < pairs; ++i) blocks.push_back({{a11, a12}, {a12, a22}});
  if ((n - 1) % 2 != 0) blocks.push_back({{tail}});
  return blocks;
}
}  // namespace

PhaseSpec PhaseSpec::kakeya_compression_example(int n) {
  Poly t = Poly::var(0);
  return model_blockdiag(parity_blocks(n, t, t * t, t + t * t * t, t), n);
}

PhaseSpec PhaseSpec::mass_concentration_example(int n) {
  Poly t = Poly::var(0);
  return model_blockdiag(parity_blocks(n, Poly(0.0), t, t * t, t), n);
}

const Poly& PhaseSpec::h_poly() const {
  if (!h_) throw PreconditionError("phase has no graph function h");
  return *h_;
}

// ---------------------------------------------------------------------------
// Evaluators
// ---------------------------------------------------------------------------

double PhaseSpec::phi(std::span<const double> x, std::span<const double> omega) const {
  return phi_.eval(join_point(x, omega));
}

std::vector<double> PhaseSpec::grad_omega(std::span<const double> x,
                                          std::span<const double> omega) const {
  auto p = join_point(x, omega);
  std::vector<double> g(n_ - 1);
  for (int j = 0; j < n_ - 1; ++j) g[j] = dw_[j].eval(p);
  return g;
}

std::vector<double> PhaseSpec::grad_x(std::span<const double> x,
                                      std::span<const double> omega) const {
  auto p = join_point(x, omega);
  std::vector<double> g(n_);
  for (int i = 0; i < n_; ++i) g[i] = dx_[i].eval(p);
  return g;
}

std::vector<double> PhaseSpec::hess_omega_x(std::span<const double> x,
                                            std::span<const double> omega) const {
  auto p = join_point(x, omega);
  std::vector<double> m(static_cast<size_t>(n_ - 1) * n_);
  for (int j = 0; j < n_ - 1; ++j)
    for (int i = 0; i < n_; ++i) m[j * n_ + i] = dwx_[j][i].eval(p);
  return m;
}

std::vector<double> PhaseSpec::hess_omega_omega(std::span<const double> x,
                                                std::span<const double> omega) const {
  auto p = join_point(x, omega);
  std::vector<double> m(static_cast<size_t>(n_ - 1) * (n_ - 1));
  for (int j = 0; j < n_ - 1; ++j)
    for (int k = 0; k < n_ - 1; ++k) m[j * (n_ - 1) + k] = dww_[j][k].eval(p);
  return m;
}

double PhaseSpec::phi_lambda(std::span<const double> x, std::span<const double> omega,
                             double lambda) const {
  std::vector<double> xs(x.begin(), x.end());
  for (auto& c : xs) c /= lambda;
  return lambda * phi(xs, omega);
}

std::vector<double> PhaseSpec::grad_omega_lambda(std::span<const double> x,
                                                 std::span<const double> omega,
                                                 double lambda) const {
  std::vector<double> xs(x.begin(), x.end());
  for (auto& c : xs) c /= lambda;
  auto g = grad_omega(xs, omega);
  for (auto& c : g) c *= lambda;
  return g;
}

Poly PhaseSpec::phi_lambda_in_omega(std::span<const double> x, double lambda) const {
  std::vector<int> vars(n_);
  std::vector<double> vals(n_);
  for (int i = 0; i < n_; ++i) {
    vars[i] = i;
    vals[i] = x[i] / lambda;
  }
  return phi_.eval_partial(vars, vals) * lambda;
}

// ---------------------------------------------------------------------------
// Gauss map and curvature
// ---------------------------------------------------------------------------

std::vector<double> PhaseSpec::gauss_map(std::span<const double> x,
                                         std::span<const double> omega) const {
  auto m = hess_omega_x(x, omega);
  Eigen::MatrixXd M(n_ - 1, n_);
  for (int j = 0; j < n_ - 1; ++j)
    for (int i = 0; i < n_; ++i) M(j, i) = m[j * n_ + i];

  // Generalised cross product of the rows: G0_i = (-1)^{n+i} det(M minus col i)
  // (signs fixed so the paraboloid gives (-omega, 1)).
  std::vector<double> g0(n_);
  double scale = 0.0;
  for (int i = 0; i < n_; ++i) {
    Eigen::MatrixXd minor(n_ - 1, n_ - 1);
    int cc = 0;
    for (int c = 0; c < n_; ++c) {
      if (c == i) continue;
      minor.col(cc++) = M.col(c);
    }
    double s = ((n_ + i + 1) % 2 == 0) ? 1.0 : -1.0;  // (-1)^{n+i+1} with i 0-based
    g0[i] = s * minor.determinant();
  }
  for (int j = 0; j < n_ - 1; ++j) scale = std::max(scale, M.row(j).norm());
  double norm = norm2(g0);
  double floor = 1e-10 * std::max(1.0, std::pow(scale, n_ - 1));
  if (norm <= floor)
    throw SolverError("H1 failure: rank-deficient mixed Hessian at " + point_str(x, omega));
  for (auto& c : g0) c /= norm;
  return g0;
}

std::vector<double> PhaseSpec::gauss_map_lambda(std::span<const double> x,
                                                std::span<const double> omega,
                                                double lambda) const {
  std::vector<double> xs(x.begin(), x.end());
  for (auto& c : xs) c /= lambda;
  return gauss_map(xs, omega);
}

CurvatureReport PhaseSpec::classify_curvature(std::span<const double> x,
                                              std::span<const double> omega0) const {
  auto g = gauss_map(x, omega0);
  auto p = join_point(x, omega0);
  Eigen::MatrixXd H(n_ - 1, n_ - 1);
  for (int j = 0; j < n_ - 1; ++j)
    for (int k = 0; k < n_ - 1; ++k) {
      double v = 0;
      for (int i = 0; i < n_; ++i) v += g[i] * dwx_[j][i].derivative(omega_var(k)).eval(p);
      H(j, k) = v;
    }
  H = 0.5 * (H + H.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  CurvatureReport rep;
  rep.gauss_vector = g;
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_ - 1);
  double maxabs = 0;
  for (double e : rep.eigenvalues) maxabs = std::max(maxabs, std::abs(e));
  double tol = 1e-8 * maxabs;
  bool any_small = false, any_pos = false, any_neg = false;
  for (double e : rep.eigenvalues) {
    if (std::abs(e) <= tol) any_small = true;
    else if (e > 0) any_pos = true;
    else any_neg = true;
  }
  if (maxabs == 0 || any_small)
    rep.classification = {CurvatureClass::Degenerate};
  else if (any_pos && !any_neg)
    rep.classification = {CurvatureClass::PositiveDefinite};
  else
    rep.classification = {CurvatureClass::Indefinite};
  return rep;
}

// ---------------------------------------------------------------------------
// Implicit maps (damped Newton)
// ---------------------------------------------------------------------------

namespace {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

Eigen::VectorXd damped_newton(const ResidualFn& F, const JacobianFn& J, Eigen::VectorXd z,
                              double tol, int max_iter, const char* what) {
  Eigen::VectorXd r = F(z);
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol) return z;
    Eigen::MatrixXd jac = J(z);
    Eigen::VectorXd step = jac.partialPivLu().solve(-r);
    if (!step.allFinite())
      throw SolverError(std::string(what) + ": singular Jacobian in Newton iteration");
    double t = 1.0;
    for (int back = 0; back < 40; ++back) {
      Eigen::VectorXd zn = z + t * step;
      Eigen::VectorXd rn = F(zn);
      if (rn.norm() < r.norm() * (1.0 - 1e-4 * t) || rn.norm() <= tol) {
        z = zn;
        r = rn;
        break;
      }
      t *= 0.5;
      if (back == 39)
        throw SolverError(std::string(what) + ": Newton line search stalled, residual " +
                          std::to_string(r.norm()));
    }
  }
  if (r.norm() <= tol) return z;
  throw SolverError(std::string(what) + ": Newton failed to converge, residual " +
                    std::to_string(r.norm()));
}

}  // namespace

std::vector<double> PhaseSpec::solve_psi(std::span<const double> x, std::span<const double> u,
                                         double tol, int max_iter) const {
  Eigen::VectorXd target(n_ - 1);
  for (int j = 0; j < n_ - 1; ++j) target(j) = u[j];
  auto F = [&](const Eigen::VectorXd& w) {
    std::vector<double> omega(w.data(), w.data() + n_ - 1);
    auto gx = grad_x(x, omega);
    Eigen::VectorXd r(n_ - 1);
    for (int j = 0; j < n_ - 1; ++j) r(j) = gx[j] - target(j);
    return r;
  };
  auto J = [&](const Eigen::VectorXd& w) {
    std::vector<double> omega(w.data(), w.data() + n_ - 1);
    auto m = hess_omega_x(x, omega);
    Eigen::MatrixXd jac(n_ - 1, n_ - 1);
    for (int j = 0; j < n_ - 1; ++j)
      for (int k = 0; k < n_ - 1; ++k) jac(j, k) = m[k * n_ + j];  // d/domega_k of d_{x'_j}phi
    return jac;
  };
  Eigen::VectorXd z = target;
  z = damped_newton(F, J, z, tol, max_iter, "solve_psi");
  return {z.data(), z.data() + n_ - 1};
}

std::vector<double> PhaseSpec::solve_phi_map(std::span<const double> zp, double x_n,
                                             std::span<const double> omega, double tol,
                                             int max_iter) const {
  Eigen::VectorXd target(n_ - 1);
  for (int j = 0; j < n_ - 1; ++j) target(j) = zp[j];
  auto assemble = [&](const Eigen::VectorXd& xp) {
    std::vector<double> x(n_);
    for (int i = 0; i < n_ - 1; ++i) x[i] = xp(i);
    x[n_ - 1] = x_n;
    return x;
  };
  auto F = [&](const Eigen::VectorXd& xp) {
    auto gw = grad_omega(assemble(xp), omega);
    Eigen::VectorXd r(n_ - 1);
    for (int j = 0; j < n_ - 1; ++j) r(j) = gw[j] - target(j);
    return r;
  };
  auto J = [&](const Eigen::VectorXd& xp) {
    auto m = hess_omega_x(assemble(xp), omega);
    Eigen::MatrixXd jac(n_ - 1, n_ - 1);
    for (int j = 0; j < n_ - 1; ++j)
      for (int k = 0; k < n_ - 1; ++k) jac(j, k) = m[j * n_ + k];
    return jac;
  };
  Eigen::VectorXd z = target;
  z = damped_newton(F, J, z, tol, max_iter, "solve_phi_map");
  return {z.data(), z.data() + n_ - 1};
}

double PhaseSpec::graph_height(std::span<const double> x, std::span<const double> u) const {
  auto omega = solve_psi(x, u);
  auto p = join_point(x, omega);
  return dx_[n_ - 1].eval(p);
}

// ---------------------------------------------------------------------------

ReductionReport PhaseSpec::reduction_report(int samples_per_axis) const {
  ReductionReport rep;
  Rng rng(20240321u);
  int total = samples_per_axis * samples_per_axis * 40;
  std::vector<double> zero_w(n_ - 1, 0.0);
  std::vector<double> zero_x(n_, 0.0);
  for (int s = 0; s < total; ++s) {
    auto x = rng.in_ball(n_, x_radius_);
    auto w = rng.in_ball(n_ - 1, omega_radius_);
    auto m = hess_omega_x(x, w);
    Eigen::MatrixXd Mxp(n_ - 1, n_ - 1);
    Eigen::VectorXd col_n(n_ - 1);
    for (int j = 0; j < n_ - 1; ++j) {
      for (int i = 0; i < n_ - 1; ++i) Mxp(j, i) = m[j * n_ + i];
      col_n(j) = m[j * n_ + (n_ - 1)];
    }
    rep.sup_dwx_minus_identity = std::max(
        rep.sup_dwx_minus_identity,
        (Mxp - Eigen::MatrixXd::Identity(n_ - 1, n_ - 1)).operatorNorm());
    rep.sup_domega_dxn = std::max(rep.sup_domega_dxn, col_n.norm());
    auto p = join_point(x, w);
    for (int k = 0; k < n_; ++k) {
      Eigen::MatrixXd H(n_ - 1, n_ - 1);
      for (int j = 0; j < n_ - 1; ++j)
        for (int l = 0; l < n_ - 1; ++l) H(j, l) = dww_[j][l].derivative(k).eval(p);
      if (k == n_ - 1) H -= Eigen::MatrixXd::Identity(n_ - 1, n_ - 1);
      rep.sup_dww_dxk_minus_delta = std::max(rep.sup_dww_dxk_minus_delta, H.operatorNorm());
    }
    rep.phi_x0_residual = std::max(rep.phi_x0_residual, std::abs(phi(x, zero_w)));
    rep.phi_0omega_residual = std::max(rep.phi_0omega_residual, std::abs(phi(zero_x, w)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

PhaseSpec translate_phase(const PhaseSpec& phase, std::span<const double> y, double lambda) {
  int n = phase.n();
  std::vector<double> y_over_lambda(n);
  for (int i = 0; i < n; ++i) y_over_lambda[i] = y[i] / lambda;
  if (norm2(y_over_lambda) > phase.x_radius() * (1.0 + 1e-12))
    throw PreconditionError("translate_phase: y/lambda lies outside the x-domain");

  Poly shifted = phase.phi_;
  for (int i = 0; i < n; ++i)
    shifted = shifted.substitute(i, Poly::var(i) + Poly(y_over_lambda[i]));
  std::vector<int> xvars(n);
  std::vector<double> xvals(n);
  for (int i = 0; i < n; ++i) {
    xvars[i] = i;
    xvals[i] = y_over_lambda[i];
  }
  Poly at_shift = phase.phi_.eval_partial(xvars, xvals);  // phi(y/lambda; omega)

  PhaseSpec out;
  out.n_ = n;
  out.kind_ = PhaseKind::Translated;
  out.x_radius_ = phase.x_radius_;
  out.omega_radius_ = phase.omega_radius_;
  out.phi_ = shifted - at_shift;
  out.finalize();
  return out;
}

PhaseSpec parabolic_rescale(const PhaseSpec& phase, std::span<const double> omega_bar,
                            double rho) {
  if (phase.kind() != PhaseKind::ExtensionGraph && phase.kind() != PhaseKind::Reduced)
    throw PreconditionError("parabolic_rescale: phase kind must be extension-graph or reduced");
  if (rho < 1.0) throw PreconditionError("parabolic_rescale: rho must be >= 1");
  int n = phase.n();
  if (norm2(omega_bar) > 1.0)
    throw PreconditionError("parabolic_rescale: omega_bar must lie in the unit ball");

  auto recenter = [&](const Poly& q) {
    // rho^2 (q(bar + omega/rho) - q(bar) - <dq(bar), omega>/rho)
    Poly shifted = q;
    for (int j = 0; j < n - 1; ++j)
      shifted = shifted.substitute(phase.omega_var(j),
                                   Poly(omega_bar[j]) + Poly::var(phase.omega_var(j), 1.0 / rho));
    std::vector<int> wvars(n - 1);
    std::vector<double> wvals(omega_bar.begin(), omega_bar.end());
    for (int j = 0; j < n - 1; ++j) wvars[j] = phase.omega_var(j);
    Poly at_bar = q.eval_partial(wvars, wvals);
    Poly linear;
    for (int j = 0; j < n - 1; ++j) {
      Poly dj = q.derivative(phase.omega_var(j)).eval_partial(wvars, wvals);
      linear += dj * Poly::var(phase.omega_var(j), 1.0 / rho);
    }
    return (shifted - at_bar - linear) * (rho * rho);
  };

  Poly h_new = recenter(phase.h_poly());
  if (phase.kind() == PhaseKind::ExtensionGraph)
    return PhaseSpec::extension_graph(h_new, n, phase.x_radius(), phase.omega_radius());

  Poly e1 = recenter(*phase.error_);
  // Linearised x-change of variables x' -> x'/rho (the graph map Phi has
  // identity derivative at the origin for reduced phases).
  for (int i = 0; i < n - 1; ++i) e1 = e1.substitute(i, Poly::var(i, 1.0 / rho));
  return PhaseSpec::reduced(h_new, e1, n, phase.x_radius(), phase.omega_radius());
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string PhaseSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["x_radius"] = x_radius_;
  j["omega_radius"] = omega_radius_;
  auto names = phase_var_names(n_);
  std::array<std::string, 1> tname{"t"};
  switch (kind_) {
    case PhaseKind::ModelBlockDiag: {
      j["kind"] = "model";
      nlohmann::json blocks = nlohmann::json::array();
      for (const auto& b : blocks_) {
        nlohmann::json bj = nlohmann::json::array();
        for (const auto& row : b) {
          nlohmann::json rj = nlohmann::json::array();
          for (const auto& e : row) rj.push_back(e.to_string(tname));
          bj.push_back(rj);
        }
        blocks.push_back(bj);
      }
      j["blocks"] = blocks;
      break;
    }
    case PhaseKind::ExtensionGraph:
      j["kind"] = "extension";
      j["h"] = h_->to_string(names);
      break;
    case PhaseKind::Reduced:
      j["kind"] = "reduced";
      j["h"] = h_->to_string(names);
      j["E"] = error_->to_string(names);
      break;
    case PhaseKind::Translated:
      j["kind"] = "translated";
      j["phi"] = phi_.to_string(names);
      break;
  }
  return j.dump(2);
}

PhaseSpec PhaseSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  int n = j.at("n").get<int>();
  double xr = j.value("x_radius", 1.0);
  double wr = j.value("omega_radius", 1.0);
  std::string kind = j.at("kind").get<std::string>();
  auto names = phase_var_names(n);
  if (kind == "model") {
    std::array<std::string, 1> tname{"t"};
    std::vector<std::vector<std::vector<Poly>>> blocks;
    for (const auto& bj : j.at("blocks")) {
      std::vector<std::vector<Poly>> b;
      for (const auto& rj : bj) {
        std::vector<Poly> row;
        for (const auto& e : rj) row.push_back(Poly::parse(e.get<std::string>(), tname));
        b.push_back(row);
      }
      blocks.push_back(b);
    }
    return model_blockdiag(blocks, n, xr, wr);
  }
  if (kind == "extension")
    return extension_graph(Poly::parse(j.at("h").get<std::string>(), names), n, xr, wr);
  if (kind == "reduced")
    return reduced(Poly::parse(j.at("h").get<std::string>(), names),
                   Poly::parse(j.at("E").get<std::string>(), names), n, xr, wr);
  if (kind == "translated") {
    PhaseSpec p;
    p.n_ = n;
    p.kind_ = PhaseKind::Translated;
    p.x_radius_ = xr;
    p.omega_radius_ = wr;
    p.phi_ = Poly::parse(j.at("phi").get<std::string>(), names);
    p.finalize();
    return p;
  }
  throw PreconditionError("unknown phase kind '" + kind + "'");
}

}  // namespace oscint
