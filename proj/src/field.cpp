#include "oscint/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace oscint {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

// Phasor-recurrence rounding compounds like steps^degree between re-anchors,
// so higher-degree rows need shorter anchor intervals.
size_t reanchor_interval(int degree) {
  if (degree <= 2) return 512;
  if (degree == 3) return 48;
  return 16;
}

double unit_ball_volume(int n) {
  // pi^{n/2} / Gamma(n/2 + 1)
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}
}  // namespace

// ---------------------------------------------------------------------------
// OmegaLattice
// ---------------------------------------------------------------------------

OmegaLattice OmegaLattice::make(int dim, double spacing, double radius) {
  if (dim != 1 && dim != 2) throw PreconditionError("OmegaLattice: dim must be 1 or 2");
  if (spacing <= 0 || radius <= 0) throw PreconditionError("OmegaLattice: bad geometry");
  OmegaLattice lat;
  lat.dim = dim;
  lat.spacing = spacing;
  lat.radius = radius;
  long kmax = static_cast<long>(std::floor(radius / spacing));
  if (dim == 1) {
    Row r{0, static_cast<int>(-kmax), static_cast<int>(kmax), 0};
    lat.rows.push_back(r);
    lat.size = static_cast<size_t>(2 * kmax + 1);
  } else {
    size_t off = 0;
    double r2 = (radius / spacing) * (radius / spacing);
    for (long j = -kmax; j <= kmax; ++j) {
      double rem = r2 - static_cast<double>(j) * static_cast<double>(j);
      if (rem < 0) continue;
      long imax = static_cast<long>(std::floor(std::sqrt(rem)));
      Row r{static_cast<int>(j), static_cast<int>(-imax), static_cast<int>(imax), off};
      lat.rows.push_back(r);
      off += static_cast<size_t>(2 * imax + 1);
    }
    lat.size = off;
  }
  return lat;
}

double OmegaLattice::weight() const { return std::pow(spacing, dim); }

std::vector<double> OmegaLattice::node(size_t idx) const {
  for (const auto& r : rows) {
    size_t len = static_cast<size_t>(r.i_max - r.i_min + 1);
    if (idx < r.offset + len) {
      long i = r.i_min + static_cast<long>(idx - r.offset);
      if (dim == 1) return {spacing * static_cast<double>(i)};
      return {spacing * static_cast<double>(i), spacing * static_cast<double>(r.j)};
    }
  }
  throw PreconditionError("OmegaLattice::node: index out of range");
}

size_t OmegaLattice::nearest(std::span<const double> omega) const {
  long i = std::lround(omega[0] / spacing);
  long j = dim == 2 ? std::lround(omega[1] / spacing) : 0;
  for (const auto& r : rows) {
    if (r.j != j) continue;
    if (i < r.i_min || i > r.i_max) return static_cast<size_t>(-1);
    return r.offset + static_cast<size_t>(i - r.i_min);
  }
  return static_cast<size_t>(-1);
}

// ---------------------------------------------------------------------------
// InputFunction
// ---------------------------------------------------------------------------

InputFunction InputFunction::zero(int dim) {
  InputFunction f;
  f.dim_ = dim;
  return f;
}

InputFunction InputFunction::grid_sampled(OmegaLattice lattice, std::vector<complexd> values) {
  if (values.size() != lattice.size)
    throw PreconditionError("grid_sampled: value count does not match the lattice");
  InputFunction f;
  f.kind_ = Kind::GridSampled;
  f.lattice_ = std::move(lattice);
  f.values_ = std::move(values);
  return f;
}

InputFunction InputFunction::modulated_bump(Poly q, double lambda_mod, double psi_support,
                                            double psi_plateau_frac, int dim) {
  InputFunction f;
  f.kind_ = Kind::ModulatedBump;
  f.q_ = std::move(q);
  f.lambda_mod_ = lambda_mod;
  f.psi_support_ = psi_support;
  f.psi_plateau_ = psi_plateau_frac;
  f.dim_ = dim;
  return f;
}

InputFunction InputFunction::packet_superposition(std::shared_ptr<CapCover> caps,
                                                  std::vector<ModelPacket> packets) {
  InputFunction f;
  f.kind_ = Kind::PacketSuperposition;
  f.caps_ = std::move(caps);
  f.packets_ = std::move(packets);
  return f;
}

int InputFunction::dim_hint() const {
  switch (kind_) {
    case Kind::Zero:
      return dim_;
    case Kind::GridSampled:
      return lattice_.dim;
    case Kind::ModulatedBump:
      return dim_;
    case Kind::PacketSuperposition:
      return caps_ ? caps_->dim() : 0;
  }
  return 0;
}

const CapCover& InputFunction::cap_cover() const {
  if (!caps_) throw PreconditionError("input function has no cap cover");
  return *caps_;
}

complexd InputFunction::eval(std::span<const double> omega) const {
  switch (kind_) {
    case Kind::Zero:
      return {0.0, 0.0};
    case Kind::GridSampled:
      throw PreconditionError("grid-sampled inputs have no analytic evaluator");
    case Kind::ModulatedBump: {
      double psi = plateau_bump(norm2(omega), psi_plateau_ * psi_support_, psi_support_);
      if (psi == 0.0) return {0.0, 0.0};
      // Q lives over variables 0..dim-1.
      double qv = q_.eval(omega);
      return std::polar(psi, kTwoPi * lambda_mod_ * qv);
    }
    case Kind::PacketSuperposition: {
      complexd s{0.0, 0.0};
      for (const auto& key : caps_->candidates(omega)) {
        for (const auto& pk : packets_) {
          if (pk.cap != key) continue;
          double psi = caps_->psi(pk.cap, omega);
          if (psi == 0.0) continue;
          auto c = caps_->center(pk.cap);
          double ph = 0;
          for (size_t d = 0; d < c.size(); ++d) ph -= pk.v[d] * (omega[d] - c[d]);
          s += pk.coeff * std::polar(psi, kTwoPi * ph);
        }
      }
      return s;
    }
  }
  return {0.0, 0.0};
}

complexd InputFunction::value_at_node(const OmegaLattice& lat, size_t idx) const {
  if (kind_ == Kind::GridSampled) {
    if (lat.size != lattice_.size)
      throw PreconditionError("grid-sampled input evaluated on a different lattice");
    return values_[idx];
  }
  if (kind_ == Kind::Zero) return {0.0, 0.0};
  auto w = lat.node(idx);
  return eval(w);
}

double InputFunction::bandwidth_hint() const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::GridSampled:
      return 0.0;
    case Kind::ModulatedBump: {
      // max |lambda_mod grad Q| over the support plus the bump's own width.
      int dim = 0;
      for (int v = 0; v < Poly::kMaxVars; ++v)
        if (q_.degree_in(v) > 0) dim = std::max(dim, v + 1);
      dim = std::max(dim, 1);
      double gmax = 0;
      std::vector<Poly> dq;
      for (int v = 0; v < dim; ++v) dq.push_back(q_.derivative(v));
      int steps = 9;
      std::vector<double> w(dim, 0.0);
      std::vector<int> idx(dim, 0);
      for (;;) {
        for (int v = 0; v < dim; ++v)
          w[v] = psi_support_ * (2.0 * idx[v] / (steps - 1.0) - 1.0);
        double g2 = 0;
        for (int v = 0; v < dim; ++v) g2 += sqr(dq[v].eval(w));
        gmax = std::max(gmax, std::sqrt(g2));
        int v = 0;
        while (v < dim && ++idx[v] == steps) idx[v++] = 0;
        if (v == dim) break;
      }
      double bump_width = 6.0 / std::max(1e-9, (1.0 - psi_plateau_) * psi_support_);
      return std::abs(lambda_mod_) * gmax * 1.2 + bump_width;
    }
    case Kind::PacketSuperposition: {
      double vmax = 0;
      for (const auto& pk : packets_) vmax = std::max(vmax, norm2(pk.v));
      double cap_width = 6.0 / std::max(1e-9, caps_->spacing() * 0.3);
      return vmax + cap_width;
    }
  }
  return 0.0;
}

double InputFunction::support_hint() const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::GridSampled:
      return lattice_.radius;
    case Kind::ModulatedBump:
      return psi_support_;
    case Kind::PacketSuperposition: {
      double r = 0;
      for (const auto& pk : packets_) {
        auto c = caps_->center(pk.cap);
        r = std::max(r, norm2(c) + caps_->spacing() * 1.0);
      }
      return r;
    }
  }
  return 0.0;
}

InputFunction InputFunction::filtered(const std::function<bool(const ModelPacket&)>& keep) const {
  if (kind_ != Kind::PacketSuperposition)
    throw PreconditionError("filtered: input is not a packet superposition");
  std::vector<ModelPacket> sub;
  for (const auto& pk : packets_)
    if (keep(pk)) sub.push_back(pk);
  return packet_superposition(caps_, std::move(sub));
}

// ---------------------------------------------------------------------------
// Region / SampledField
// ---------------------------------------------------------------------------

Region Region::ball(std::vector<double> center, double radius) {
  Region r;
  r.kind = RegionKind::Ball;
  r.center = std::move(center);
  r.radius = radius;
  r.description = "ball(r=" + std::to_string(radius) + ")";
  return r;
}

Region Region::ellipse(std::vector<double> center, std::vector<double> semi_axes) {
  Region r;
  r.kind = RegionKind::Ellipse;
  r.center = std::move(center);
  r.semi_axes = std::move(semi_axes);
  r.description = "ellipse";
  return r;
}

Region Region::custom(std::string description, double nominal_volume) {
  Region r;
  r.kind = RegionKind::Custom;
  r.description = std::move(description);
  r.custom_volume = nominal_volume;
  return r;
}

bool Region::contains(std::span<const double> x) const {
  switch (kind) {
    case RegionKind::Ball: {
      double s = 0;
      for (size_t i = 0; i < x.size(); ++i) s += sqr(x[i] - center[i]);
      return s <= radius * radius * (1 + 1e-12);
    }
    case RegionKind::Ellipse: {
      double s = 0;
      for (size_t i = 0; i < x.size(); ++i) s += sqr((x[i] - center[i]) / semi_axes[i]);
      return s <= 1 + 1e-12;
    }
    case RegionKind::Slab:
      return std::abs(x[x.size() - 1] - slab_coord) <= radius;
    case RegionKind::Custom:
      return true;
  }
  return false;
}

double Region::volume(int n) const {
  switch (kind) {
    case RegionKind::Ball:
      return unit_ball_volume(n) * std::pow(radius, n);
    case RegionKind::Ellipse: {
      double v = unit_ball_volume(n);
      for (double a : semi_axes) v *= a;
      return v;
    }
    default:
      return custom_volume;
  }
}

std::string SampledField::csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int i = 0; i < n; ++i) os << "x" << (i + 1) << ",";
  os << "re,im\n";
  for (size_t k = 0; k < count(); ++k) {
    auto p = point(k);
    for (int i = 0; i < n; ++i) os << p[i] << ",";
    os << values[k].real() << "," << values[k].imag() << "\n";
  }
  return os.str();
}

std::string SampledField::header_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["lambda"] = lambda;
  j["seed"] = seed;
  j["count"] = count();
  j["region"] = region.description;
  j["scheme"] = scheme == SamplingScheme::Grid ? "grid"
               : scheme == SamplingScheme::StratifiedRandom ? "stratified-random"
                                                            : "explicit";
  return j.dump();
}

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

Evaluator::Evaluator(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                     const InputFunction& f, double max_point_norm, EvalOptions opts)
    : phase_(phase), amp_(amp), lambda_(lambda), opts_(opts) {
  if (lambda < 1) throw PreconditionError("Evaluator: lambda must be >= 1");
  int n = phase.n();
  int dim = n - 1;
  if (dim > 2) throw PreconditionError("Evaluator: only n <= 3 evaluation is supported");

  // Split phi into omega-monomials with x-dependent coefficients.
  deg1_ = 0;
  deg2_ = 0;
  std::map<std::pair<int, int>, Poly> groups;
  for (const auto& [e, c] : phase.phi_poly().terms()) {
    int e1 = e[phase.omega_var(0)];
    int e2 = dim == 2 ? e[phase.omega_var(1)] : 0;
    Poly::Expo xe = e;
    xe[phase.omega_var(0)] = 0;
    if (dim == 2) xe[phase.omega_var(1)] = 0;
    Poly mono;
    {
      // Rebuild the x-part as a polynomial term.
      std::map<Poly::Expo, double> t{{xe, c}};
      Poly q;
      for (const auto& [ee, cc] : t) {
        Poly term(cc);
        for (int vv = 0; vv < Poly::kMaxVars; ++vv)
          if (ee[vv] > 0) term = term * Poly::var(vv, 1.0, ee[vv]);
        q += term;
      }
      mono = q;
    }
    groups[{e1, e2}] += mono;
    deg1_ = std::max(deg1_, e1);
    deg2_ = std::max(deg2_, e2);
  }
  for (auto& [key, poly] : groups)
    omega_form_.push_back(OmegaTerm{key.first, key.second, poly});

  // Resolution rule: the lattice must oversample the fastest oscillation of
  // the full integrand (phase at the farthest requested point, the input's
  // own modulation, amplitude roll-off).
  double radius = std::min(1.0, amp.omega_support);
  if (double fs = f.support_hint(); fs > 0) radius = std::min(radius, fs);
  double fmax = 0;
  {
    Rng rng(0xfeedULL);
    std::vector<std::vector<double>> xs;
    xs.push_back(std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      auto e = std::vector<double>(n, 0.0);
      e[i] = max_point_norm;
      xs.push_back(e);
      e[i] = -max_point_norm;
      xs.push_back(e);
    }
    for (int t = 0; t < 32; ++t) {
      auto d = rng.in_ball(n, 1.0);
      double nn = norm2(d);
      for (auto& c : d) c *= (nn > 0 ? max_point_norm / nn : 0.0);
      xs.push_back(d);
    }
    int steps = 9;
    for (const auto& x : xs) {
      std::vector<int> idx(dim, 0);
      std::vector<double> w(dim, 0.0);
      for (;;) {
        for (int v = 0; v < dim; ++v) w[v] = radius * (2.0 * idx[v] / (steps - 1.0) - 1.0);
        if (norm2(w) <= radius * 1.05) {
          auto g = phase.grad_omega_lambda(x, w, lambda);
          fmax = std::max(fmax, norm2(g));
        }
        int v = 0;
        while (v < dim && ++idx[v] == steps) idx[v++] = 0;
        if (v == dim) break;
      }
    }
    fmax *= 1.25;
  }
  double amp_bw = amp.kind == AmplitudeKind::ConstantOneOnOmega
                      ? 0.0
                      : 6.0 / std::max(1e-9, (1.0 - amp.plateau_frac) * amp.omega_support);
  double total_bw = fmax + amp_bw + f.bandwidth_hint() + opts.extra_bandwidth;
  double required = std::min(1.0 / lambda, 1.0 / (opts.oversample * std::max(1.0, total_bw)));
  if (opts.forced_spacing) required = *opts.forced_spacing;

  if (const OmegaLattice* own = f.own_lattice()) {
    if (own->spacing > required * (1 + 1e-9))
      throw ResolutionError(
          "omega lattice too coarse for lambda=" + std::to_string(lambda) +
              ": spacing " + std::to_string(own->spacing) + " exceeds required " +
              std::to_string(required),
          required);
    lattice_ = *own;
  } else {
    lattice_ = OmegaLattice::make(dim, required, radius);
  }

  // Per-node weights: f * a(omega-part) * cell volume.
  weights_.resize(lattice_.size);
  double cell = lattice_.weight();
  double l2 = 0;
  complexd total{0.0, 0.0};
  for (size_t idx = 0; idx < lattice_.size; ++idx) {
    complexd fv = f.value_at_node(lattice_, idx);
    auto w = lattice_.node(idx);
    double aw = amp_.eval_omega_only(w);
    weights_[idx] = fv * aw * cell;
    l2 += std::norm(fv) * cell;
    total += fv * cell;
  }
  f_l2_ = std::sqrt(l2);
  f_integral_ = total;
  f_mass_ = std::abs(total);

  // Rows iterate only their nonzero span; packet superpositions often touch a
  // thin strip of the lattice.
  row_support_.reserve(lattice_.rows.size());
  for (const auto& row : lattice_.rows) {
    long len = row.i_max - row.i_min + 1;
    long lo = 0, hi = len - 1;
    const complexd* wrow = weights_.data() + row.offset;
    while (lo <= hi && wrow[lo] == complexd{0.0, 0.0}) ++lo;
    while (hi >= lo && wrow[hi] == complexd{0.0, 0.0}) --hi;
    row_support_.emplace_back(row.i_min + lo, row.i_min + hi);
  }
}

complexd Evaluator::eval_one(std::span<const double> x, bool fast) const {
  int n = phase_.n();
  int dim = n - 1;
  // Amplitude x-factor (separable by construction).
  double ax = 1.0;
  if (amp_.kind != AmplitudeKind::ConstantOneOnOmega) {
    std::vector<double> xu(x.begin(), x.end());
    for (auto& c : xu) c /= lambda_;
    ax = plateau_bump(norm2(xu), amp_.plateau_frac * amp_.x_support, amp_.x_support);
    if (ax == 0.0) return {0.0, 0.0};
  }

  // Collapse phi^lambda(x; .) to dense omega coefficients.
  std::vector<double> xs(x.begin(), x.end());
  for (auto& c : xs) c /= lambda_;
  std::vector<double> coeff(static_cast<size_t>(deg1_ + 1) * (deg2_ + 1), 0.0);
  for (const auto& term : omega_form_)
    coeff[term.e1 + static_cast<size_t>(deg1_ + 1) * term.e2] +=
        lambda_ * term.coeff_in_x.eval(xs);

  const double h = lattice_.spacing;
  complexd total{0.0, 0.0};
  std::vector<double> cu(deg1_ + 1);
  std::vector<double> diff(deg1_ + 1);
  std::vector<complexd> z(deg1_ + 1);
  for (const auto& row : lattice_.rows) {
    double w2 = row.j * h;
    // Coefficients in omega_1 at this row.
    for (int i = 0; i <= deg1_; ++i) {
      double s = 0;
      for (int j = deg2_; j >= 0; --j)
        s = s * w2 + coeff[i + static_cast<size_t>(deg1_ + 1) * j];
      cu[i] = s;
    }
    auto peval = [&](long i) {
      double u = i * h;
      double s = 0;
      for (int k = deg1_; k >= 0; --k) s = s * u + cu[k];
      return s;
    };
    const auto& sup = row_support_[&row - lattice_.rows.data()];
    if (sup.first > sup.second) continue;
    long len = sup.second - sup.first + 1;
    complexd rowsum{0.0, 0.0};
    const complexd* wrow = weights_.data() + row.offset + (sup.first - row.i_min);
    if (!fast || len <= deg1_ + 2) {
      for (long l = 0; l < len; ++l)
        rowsum += wrow[l] * std::polar(1.0, kTwoPi * peval(sup.first + l));
    } else {
      auto anchor = [&](long i0) {
        for (int k = 0; k <= deg1_; ++k) diff[k] = peval(i0 + k);
        for (int k = 1; k <= deg1_; ++k)
          for (int l = deg1_; l >= k; --l) diff[l] -= diff[l - 1];
        for (int k = 0; k <= deg1_; ++k) z[k] = std::polar(1.0, kTwoPi * diff[k]);
      };
      anchor(sup.first);
      const size_t reanchor = reanchor_interval(deg1_);
      size_t since = 0;
      for (long l = 0; l < len; ++l) {
        rowsum += wrow[l] * z[0];
        if (++since >= reanchor && l + 1 < len) {
          anchor(sup.first + l + 1);
          since = 0;
        } else {
          for (int k = 0; k < deg1_; ++k) z[k] *= z[k + 1];
        }
      }
    }
    total += rowsum;
  }
  return ax * total;
}

complexd Evaluator::operator()(std::span<const double> x) const {
  return eval_one(x, opts_.fast != FastMode::Off);
}

void Evaluator::evaluate_block(std::span<const double> points_flat,
                               std::span<complexd> out) const {
  int n = phase_.n();
  size_t count = out.size();
  bool fast = opts_.fast != FastMode::Off;
  for (size_t k = 0; k < count; ++k) {
    std::span<const double> x(points_flat.data() + k * static_cast<size_t>(n),
                              static_cast<size_t>(n));
    out[k] = eval_one(x, fast);
  }
  if (opts_.fast == FastMode::Audit) {
    size_t audit = std::min<size_t>(10, count);
    for (size_t k = 0; k < audit; ++k) {
      std::span<const double> x(points_flat.data() + k * static_cast<size_t>(n),
                                static_cast<size_t>(n));
      complexd direct = eval_one(x, false);
      double scale = std::max(std::abs(direct), 1e-3);
      if (std::abs(out[k] - direct) > 1e-8 * scale)
        throw SolverError("fast-transform audit failed: |fast - direct| = " +
                          std::to_string(std::abs(out[k] - direct)));
    }
  }
}

// ---------------------------------------------------------------------------

namespace {
double max_norm_of(std::span<const double> flat, int n) {
  double m = 0;
  for (size_t k = 0; k + n <= flat.size(); k += n)
    m = std::max(m, norm2(flat.subspan(k, n)));
  return m;
}
}  // namespace

SampledField evaluate(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                      const InputFunction& f, std::span<const double> points_flat,
                      EvalOptions opts) {
  int n = phase.n();
  if (points_flat.size() % static_cast<size_t>(n) != 0)
    throw PreconditionError("evaluate: point buffer is not a multiple of n");
  SampledField out;
  out.n = n;
  out.lambda = lambda;
  out.points.assign(points_flat.begin(), points_flat.end());
  out.values.resize(points_flat.size() / static_cast<size_t>(n));
  out.region = Region::custom("explicit point list", 0.0);
  out.scheme = SamplingScheme::Explicit;
  Evaluator ev(phase, amp, lambda, f, max_norm_of(points_flat, n), opts);
  ev.evaluate_block(out.points, out.values);
  return out;
}

SampledField evaluate_on_ball_grid(const PhaseSpec& phase, const AmplitudeSpec& amp,
                                   double lambda, const InputFunction& f, const Region& ball,
                                   double grid_spacing, EvalOptions opts) {
  int n = phase.n();
  if (ball.kind != RegionKind::Ball)
    throw PreconditionError("evaluate_on_ball_grid: region must be a ball");
  if (n != 2)
    throw PreconditionError("evaluate_on_ball_grid: grids are the n=2 path; use "
                            "stratified sampling in higher dimensions");
  SampledField out;
  out.n = n;
  out.lambda = lambda;
  out.region = ball;
  out.scheme = SamplingScheme::Grid;
  out.grid_cell_volume = std::pow(grid_spacing, n);
  long k = static_cast<long>(std::floor(ball.radius / grid_spacing));
  for (long j = -k; j <= k; ++j)
    for (long i = -k; i <= k; ++i) {
      double x = ball.center[0] + i * grid_spacing;
      double y = ball.center[1] + j * grid_spacing;
      if (sqr(x - ball.center[0]) + sqr(y - ball.center[1]) > sqr(ball.radius)) continue;
      out.points.push_back(x);
      out.points.push_back(y);
    }
  out.values.resize(out.points.size() / 2);
  Evaluator ev(phase, amp, lambda, f, max_norm_of(out.points, n), opts);
  ev.evaluate_block(out.points, out.values);
  return out;
}

SampledField evaluate_stratified(const PhaseSpec& phase, const AmplitudeSpec& amp,
                                 double lambda, const InputFunction& f, const Region& region,
                                 size_t count, std::uint64_t seed, EvalOptions opts) {
  int n = phase.n();
  if (region.kind != RegionKind::Ball && region.kind != RegionKind::Ellipse)
    throw PreconditionError("evaluate_stratified: region must be a ball or ellipse");
  SampledField out;
  out.n = n;
  out.lambda = lambda;
  out.region = region;
  out.scheme = SamplingScheme::StratifiedRandom;
  out.seed = seed;

  std::vector<double> half(n);
  for (int i = 0; i < n; ++i)
    half[i] = region.kind == RegionKind::Ball ? region.radius : region.semi_axes[i];
  int m = std::max<int>(1, static_cast<int>(std::ceil(std::pow(
                               static_cast<double>(count) * 2.0, 1.0 / n))));
  Rng rng(seed);
  std::vector<int> idx(n, 0);
  while (out.values.size() < count) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
      double lo = -half[i] + 2.0 * half[i] * idx[i] / m;
      double hi = -half[i] + 2.0 * half[i] * (idx[i] + 1) / m;
      x[i] = region.center[i] + rng.uniform(lo, hi);
    }
    int v = 0;
    while (v < n && ++idx[v] == m) idx[v++] = 0;
    if (region.contains(x)) {
      for (double c : x) out.points.push_back(c);
      out.values.emplace_back(0.0, 0.0);
    }
  }
  Evaluator ev(phase, amp, lambda, f, max_norm_of(out.points, n), opts);
  ev.evaluate_block(out.points, out.values);
  return out;
}

LpEstimate lp_norm(const SampledField& field, double p) {
  if (field.count() == 0) throw PreconditionError("lp_norm: empty field");
  if (p < 1) throw PreconditionError("lp_norm: p must be >= 1");
  LpEstimate est;
  if (std::isinf(p)) {
    for (const auto& v : field.values) est.value = std::max(est.value, std::abs(v));
    return est;
  }
  size_t cnt = field.count();
  std::vector<double> powed(cnt);
  for (size_t i = 0; i < cnt; ++i) powed[i] = std::pow(std::abs(field.values[i]), p);
  double mean = pairwise_sum(powed) / static_cast<double>(cnt);
  double integral = 0;
  double se_integral = 0;
  if (field.scheme == SamplingScheme::Grid) {
    integral = pairwise_sum(powed) * field.grid_cell_volume;
  } else {
    double vol = field.region.volume(field.n);
    integral = vol * mean;
    double var = 0;
    for (double v : powed) var += sqr(v - mean);
    var /= std::max<double>(1.0, static_cast<double>(cnt) - 1.0);
    se_integral = vol * std::sqrt(var / static_cast<double>(cnt));
  }
  est.value = std::pow(integral, 1.0 / p);
  if (se_integral > 0 && integral > 0)
    est.standard_error = se_integral / p * std::pow(integral, 1.0 / p - 1.0);
  return est;
}

std::vector<std::pair<double, double>> hormander_ratio(const PhaseSpec& phase,
                                                       const AmplitudeSpec& amp, double lambda,
                                                       const InputFunction& f,
                                                       std::span<const double> r_list,
                                                       double grid_spacing) {
  double rmax = 0;
  for (double r : r_list) {
    if (r > lambda) throw PreconditionError("hormander_ratio: R must satisfy R <= lambda");
    if (r < 1) throw PreconditionError("hormander_ratio: R must be >= 1");
    rmax = std::max(rmax, r);
  }
  int n = phase.n();
  if (n != 2) throw PreconditionError("hormander_ratio: implemented for n = 2 grids");
  auto field = evaluate_on_ball_grid(phase, amp, lambda, f,
                                     Region::ball(std::vector<double>(n, 0.0), rmax),
                                     grid_spacing);
  Evaluator norm_probe(phase, amp, lambda, f, rmax);
  double fl2 = norm_probe.f_l2();
  std::vector<std::pair<double, double>> out;
  for (double r : r_list) {
    double s = 0;
    for (size_t k = 0; k < field.count(); ++k)
      if (norm2(field.point(k)) <= r) s += std::norm(field.values[k]);
    double l2 = std::sqrt(s * field.grid_cell_volume);
    out.emplace_back(r, fl2 > 0 ? l2 / (std::sqrt(r) * fl2) : 0.0);
  }
  return out;
}

std::vector<std::pair<double, double>> slab_ratio(const PhaseSpec& phase,
                                                  const AmplitudeSpec& amp, double lambda,
                                                  const InputFunction& f,
                                                  std::span<const double> xn_list,
                                                  double grid_spacing) {
  int n = phase.n();
  if (n != 2) throw PreconditionError("slab_ratio: implemented for n = 2");
  std::vector<std::pair<double, double>> out;
  double extent = lambda * phase.x_radius();
  std::vector<double> pts;
  long k = static_cast<long>(std::floor(extent / grid_spacing));
  Evaluator ev(phase, amp, lambda, f, std::hypot(extent, lambda), EvalOptions{});
  double fl2 = ev.f_l2();
  for (double xn : xn_list) {
    pts.clear();
    for (long i = -k; i <= k; ++i) {
      pts.push_back(i * grid_spacing);
      pts.push_back(xn);
    }
    std::vector<complexd> vals(pts.size() / 2);
    ev.evaluate_block(pts, vals);
    double s = 0;
    for (const auto& v : vals) s += std::norm(v);
    out.emplace_back(xn, fl2 > 0 ? std::sqrt(s * grid_spacing) / fl2 : 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Non-stationary decay
// ---------------------------------------------------------------------------

DecayReport nonstationary_decay(const Oscillatory1D& spec, std::span<const double> lambdas,
                                int decay_order) {
  if (lambdas.size() < 3)
    throw PreconditionError("nonstationary_decay: need at least 3 lambda values");
  Poly gp = spec.g.derivative(0);
  double plateau = spec.plateau_frac * spec.support;
  auto amp_at = [&](double z) { return plateau_bump(std::abs(z), plateau, spec.support); };

  // Hypothesis audit on a sample grid (Lemma-style conditions i)-iii)).
  double min_g1 = 1e300, max_g1 = 0, m_phase = 0, m_amp = 1.0;
  std::vector<Poly> gders{gp};
  for (int k = 2; k <= decay_order; ++k) gders.push_back(gders.back().derivative(0));
  const int samples = 4001;
  for (int s = 0; s < samples; ++s) {
    double z = spec.support * (2.0 * s / (samples - 1.0) - 1.0);
    if (amp_at(z) == 0.0) continue;
    double g1 = std::abs(gp.eval(std::array{z}));
    min_g1 = std::min(min_g1, g1);
    max_g1 = std::max(max_g1, g1);
    for (int k = 2; k <= decay_order; ++k)
      m_phase = std::max(m_phase, std::abs(gders[k - 1].eval(std::array{z})) / g1);
    // Amplitude derivatives by central differences of the C^inf profile.
    double hh = 1e-3 * spec.support;
    for (int k = 1; k <= decay_order; ++k) {
      double d = 0;
      for (int j = 0; j <= k; ++j) {
        double binom = std::tgamma(k + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(k - j + 1.0));
        d += ((k - j) % 2 == 0 ? 1.0 : -1.0) * binom * amp_at(z + (j - k / 2.0) * hh);
      }
      d /= std::pow(hh, k);
      m_amp = std::max(m_amp, std::pow(std::abs(d), 1.0 / k));
    }
  }
  // Scale-invariant form of hypothesis i): |d phi| >= lambda min|g'| with
  // min|g'| bounded below; a stationary point inside the support fails here.
  if (!(min_g1 >= 0.2))
    throw PreconditionError("nonstationary_decay: hypothesis i) fails, min |g'| = " +
                            std::to_string(min_g1) + " has no positive lower bound");
  double M = std::max({1.0, m_phase, m_amp});

  DecayReport rep;
  rep.hypothesis_M = M;
  for (double lambda : lambdas) {
    // Oscillation here is e^{i lambda g}, i.e. lambda |g'| / (2 pi) cycles/unit.
    double bw = lambda * max_g1 / kTwoPi + 6.0 / std::max(1e-9, spec.support - plateau);
    double h = 1.0 / (6.0 * bw);
    long k = static_cast<long>(std::ceil(spec.support / h));
    std::complex<long double> sum{0.0L, 0.0L};
    for (long i = -k; i <= k; ++i) {
      double z = i * h;
      double a = amp_at(z);
      if (a == 0.0) continue;
      long double ph = static_cast<long double>(lambda) * spec.g.eval(std::array{z});
      sum += static_cast<long double>(a) *
             std::complex<long double>(std::cos(ph), std::sin(ph));
    }
    double mag = static_cast<double>(std::abs(sum)) * h;
    rep.lambdas.push_back(lambda);
    rep.magnitudes.push_back(mag);
    rep.constant_C = std::max(
        rep.constant_C, mag * std::pow(lambda, decay_order) / std::pow(M, decay_order));
  }
  double peak = *std::max_element(rep.magnitudes.begin(), rep.magnitudes.end());
  if (peak > 0) {
    std::vector<double> clamped = rep.magnitudes;
    for (double& m : clamped) m = std::max(m, 1e-300);
    auto fit = fit_loglog(rep.lambdas, clamped);
    rep.fitted_slope = fit.slope;
    rep.slope_ci95 = fit.ci95;
  }
  return rep;
}

}  // namespace oscint
