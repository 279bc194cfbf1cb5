#include "oscint/variety.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace oscint {

namespace {

Eigen::MatrixXd gradient_matrix(const std::vector<std::vector<Poly>>& grads,
                                std::span<const double> z, int n) {
  Eigen::MatrixXd J(grads.size(), n);
  for (size_t j = 0; j < grads.size(); ++j)
    for (int i = 0; i < n; ++i) J(j, i) = grads[j][i].eval(z);
  return J;
}

}  // namespace

int Variety::max_degree() const {
  int d = 0;
  for (const auto& p : polys_) d = std::max(d, p.degree());
  return d;
}

double Variety::residual(std::span<const double> x) const {
  double r = 0;
  for (const auto& p : polys_) r = std::max(r, std::abs(p.eval(x)));
  return r;
}

Variety::Projection Variety::project(std::span<const double> x, int max_iter) const {
  Projection out;
  out.point.assign(x.begin(), x.end());
  if (polys_.empty()) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXd z(n_);
  for (int i = 0; i < n_; ++i) z(i) = x[i];
  int k = static_cast<int>(polys_.size());
  Eigen::VectorXd P(k);
  double scale = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    std::span<const double> zs(z.data(), static_cast<size_t>(n_));
    for (int j = 0; j < k; ++j) P(j) = polys_[j].eval(zs);
    Eigen::MatrixXd J = gradient_matrix(grads_, zs, n_);
    scale = std::max(1.0, J.norm());
    if (P.norm() <= 1e-11 * scale) break;
    Eigen::MatrixXd JJt = J * J.transpose();
    Eigen::VectorXd step = J.transpose() * JJt.ldlt().solve(P);
    if (!step.allFinite()) break;
    z -= step;
  }
  std::span<const double> zs(z.data(), static_cast<size_t>(n_));
  out.converged = residual(zs) <= 1e-9 * scale;
  out.point.assign(z.data(), z.data() + n_);
  double d = 0;
  for (int i = 0; i < n_; ++i) d += sqr(z(i) - x[i]);
  out.distance = std::sqrt(d);
  return out;
}

double Variety::distance(std::span<const double> x) const {
  auto proj = project(x);
  return proj.converged ? proj.distance : std::numeric_limits<double>::infinity();
}

std::vector<double> Variety::tangent_basis(std::span<const double> z) const {
  int mm = m();
  std::vector<double> basis(static_cast<size_t>(n_) * mm, 0.0);
  if (polys_.empty()) {
    for (int i = 0; i < n_; ++i) basis[i * static_cast<size_t>(mm) + i] = 1.0;
    return basis;
  }
  Eigen::MatrixXd J = gradient_matrix(grads_, z, n_);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  // Null space = last m right singular vectors.
  for (int c = 0; c < mm; ++c)
    for (int i = 0; i < n_; ++i)
      basis[static_cast<size_t>(i) * mm + c] = svd.matrixV()(i, n_ - mm + c);
  return basis;
}

double Variety::tangent_angle(std::span<const double> z, std::span<const double> dir) const {
  if (polys_.empty()) return 0.0;
  auto basis = tangent_basis(z);
  int mm = m();
  double proj2 = 0;
  for (int c = 0; c < mm; ++c) {
    double dot = 0;
    for (int i = 0; i < n_; ++i) dot += basis[static_cast<size_t>(i) * mm + c] * dir[i];
    proj2 += dot * dot;
  }
  double nd = norm2(dir);
  double c = std::sqrt(proj2) / (nd > 0 ? nd : 1.0);
  return std::acos(std::min(1.0, c));
}

double Variety::rank_margin(std::span<const double> z) const {
  if (polys_.empty()) return 1.0;
  Eigen::MatrixXd J = gradient_matrix(grads_, z, n_);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return smax > 0 ? smin / smax : 0.0;
}

std::string Variety::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  std::vector<std::string> names;
  for (int i = 1; i <= n_; ++i) names.push_back("x" + std::to_string(i));
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : polys_) arr.push_back(p.to_string(names));
  j["polys"] = arr;
  return j.dump();
}

Variety Variety::from_json(const std::string& text,
                           const std::map<std::string, double>& params) {
  nlohmann::json j = nlohmann::json::parse(text);
  int n = j.at("n").get<int>();
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  std::vector<Poly> polys;
  for (const auto& s : j.at("polys")) polys.push_back(Poly::parse(s.get<std::string>(), names, params));
  return make_tci(std::move(polys), n);
}

Variety make_tci(std::vector<Poly> polys, int n, double box_radius, std::uint64_t seed,
                 int zero_samples) {
  if (static_cast<int>(polys.size()) > n)
    throw PreconditionError("make_tci: more polynomials than ambient dimensions");
  Variety z;
  z.n_ = n;
  z.polys_ = std::move(polys);
  for (const auto& p : z.polys_) {
    std::vector<Poly> g;
    for (int i = 0; i < n; ++i) g.push_back(p.derivative(i));
    z.grads_.push_back(std::move(g));
  }
  if (z.polys_.empty()) return z;

  Rng rng(seed);
  int found = 0;
  for (int s = 0; s < zero_samples; ++s) {
    auto x = rng.in_ball(n, box_radius);
    auto proj = z.project(x);
    if (!proj.converged) continue;
    ++found;
    double margin = z.rank_margin(proj.point);
    if (margin < 1e-6) {
      std::ostringstream os;
      os << "make_tci: gradient rank deficiency (margin " << margin << ") at zero (";
      for (int i = 0; i < n; ++i) os << (i ? "," : "") << proj.point[i];
      os << ")";
      throw PreconditionError(os.str());
    }
  }
  (void)found;  // an empty sampled zero set is legitimate (e.g. no real points)
  return z;
}

// ---------------------------------------------------------------------------
// Neighbourhood cover
// ---------------------------------------------------------------------------

NeighborhoodCover neighborhood_cover(const Variety& z, double rho, double R, size_t samples,
                                     std::uint64_t seed) {
  if (rho <= 0 || rho > R) throw PreconditionError("neighborhood_cover: need 0 < rho <= R");
  int n = z.n();
  Rng rng(seed);
  std::vector<double> kept;
  size_t in_count = 0;
  for (size_t s = 0; s < samples; ++s) {
    auto x = rng.in_ball(n, R);
    if (z.distance(x) <= rho) {
      ++in_count;
      kept.insert(kept.end(), x.begin(), x.end());
    }
  }
  NeighborhoodCover out;
  double frac = static_cast<double>(in_count) / static_cast<double>(samples);
  double ball_vol = std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(R, n);
  out.covered_volume = frac * ball_vol;
  out.volume_stderr =
      ball_vol * std::sqrt(frac * (1 - frac) / static_cast<double>(samples));
  if (in_count == 0) {
    out.empty_intersection = true;
    return out;
  }
  // Greedy cover; the origin is offered first so rho = R gives one ball.
  std::vector<char> covered(in_count, 0);
  std::vector<std::vector<double>> centers;
  std::vector<double> origin(n, 0.0);
  auto try_center = [&](std::span<const double> c) {
    size_t newly = 0;
    for (size_t k = 0; k < in_count; ++k) {
      if (covered[k]) continue;
      double d = 0;
      for (int i = 0; i < n; ++i) d += sqr(kept[k * n + i] - c[i]);
      if (d <= rho * rho) {
        covered[k] = 1;
        ++newly;
      }
    }
    if (newly > 0) centers.emplace_back(c.begin(), c.end());
  };
  try_center(origin);
  for (size_t k = 0; k < in_count; ++k) {
    if (covered[k]) continue;
    try_center(std::span<const double>(kept.data() + k * n, static_cast<size_t>(n)));
  }
  out.ball_count = centers.size();
  out.count_constant = static_cast<double>(out.ball_count) / std::pow(R / rho, z.m());
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial partitioning
// ---------------------------------------------------------------------------

namespace {

// Monomial exponents of total degree 1..d in n variables.
std::vector<Poly::Expo> monomials_up_to(int n, int d) {
  std::vector<Poly::Expo> out;
  Poly::Expo e{};
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == n) {
      int total = 0;
      for (int i = 0; i < n; ++i) total += e[i];
      if (total >= 1) out.push_back(e);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      e[var] = static_cast<std::uint8_t>(k);
      rec(var + 1, remaining - k);
      e[var] = 0;
    }
  };
  rec(0, d);
  return out;
}

int bisection_degree(int n, int parts) {
  // Some slack beyond the Stone-Tukey dimension count makes the annealed
  // search reliable.
  long target = parts < 4 ? parts : parts + std::max(2L, parts / 6L);
  for (int d = 1;; ++d) {
    long dim = 1;
    for (int i = 1; i <= n; ++i) dim = dim * (d + i) / i;  // binom(n+d, n)
    if (dim - 1 >= target) return d;
  }
}

struct BisectionOutcome {
  Poly q;
  double worst = 1.0;  // max |pos_frac - 1/2| over required parts
};

// One simultaneous bisection of the given parts by a polynomial of degree d:
// annealed soft-sign balancing over the Veronese lift, Levenberg-damped
// Gauss-Newton steps, restarts on failure.
BisectionOutcome simultaneous_bisect(const WeightedPoints& pts,
                                     const std::vector<std::vector<std::uint32_t>>& parts,
                                     int d, Rng& rng) {
  int n = pts.n;
  auto monos = monomials_up_to(n, d);
  int K = static_cast<int>(monos.size()) + 1;  // + constant

  // Lifted coordinates per point.
  size_t npts = pts.count();
  Eigen::MatrixXd lift(npts, K);
  for (size_t p = 0; p < npts; ++p) {
    lift(p, 0) = 1.0;
    auto x = pts.point(p);
    for (size_t mi = 0; mi < monos.size(); ++mi) {
      double v = 1.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < monos[mi][i]; ++k) v *= x[i];
      lift(p, static_cast<int>(mi) + 1) = v;
    }
  }
  // Column scaling keeps the Gauss-Newton system well conditioned; the
  // assembled polynomial divides the scale back out.
  Eigen::VectorXd col_scale(K);
  for (int c = 0; c < K; ++c) {
    col_scale(c) = std::max(1e-12, lift.col(c).cwiseAbs().maxCoeff());
    lift.col(c) /= col_scale(c);
  }

  std::vector<const std::vector<std::uint32_t>*> required;
  for (const auto& part : parts)
    if (part.size() >= 16) required.push_back(&part);
  int M = static_cast<int>(required.size());

  auto part_weight = [&](const std::vector<std::uint32_t>& part) {
    double w = 0;
    for (auto p : part) w += pts.weights[p];
    return w;
  };

  BisectionOutcome best;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::VectorXd c(K);
    for (int i = 0; i < K; ++i) c(i) = rng.normal();
    c.normalize();
    Eigen::VectorXd q = lift * c;
    std::vector<double> absq;
    absq.reserve(npts);
    for (size_t p = 0; p < npts; ++p) absq.push_back(std::abs(q(p)));
    std::nth_element(absq.begin(), absq.begin() + absq.size() / 2, absq.end());
    double tau = std::max(1e-12, absq[absq.size() / 2]);

    auto hard_worst = [&]() {
      Eigen::VectorXd qq = lift * c;
      double worst = 0;
      for (int i = 0; i < M; ++i) {
        double pos = 0, tot = part_weight(*required[i]);
        for (auto p : *required[i])
          if (qq(p) >= 0) pos += pts.weights[p];
        worst = std::max(worst, std::abs(pos / tot - 0.5));
      }
      return worst;
    };
    double part_tol = 0.015;
    for (int i = 0; i < M; ++i)
      part_tol = std::max(part_tol, 1.0 / std::sqrt(static_cast<double>(required[i]->size())));
    for (int stage = 0; stage < 18; ++stage) {
      if (stage >= 8 && hard_worst() <= 0.6 * part_tol) break;
      for (int iter = 0; iter < 20; ++iter) {
        q = lift * c;
        Eigen::VectorXd E(M);
        Eigen::MatrixXd Jr(M, K);
        Jr.setZero();
        for (int i = 0; i < M; ++i) {
          double e = 0;
          for (auto p : *required[i]) {
            double th = std::tanh(q(p) / tau);
            e += pts.weights[p] * th;
            double sech2 = (1.0 - th * th) / tau;
            Jr.row(i) += pts.weights[p] * sech2 * lift.row(p);
          }
          E(i) = e;
        }
        if (E.norm() < 1e-6) break;
        Eigen::MatrixXd JJt = Jr * Jr.transpose();
        double mu = 1e-8 * JJt.trace() / M + 1e-300;
        JJt.diagonal().array() += mu;
        Eigen::VectorXd step = Jr.transpose() * JJt.ldlt().solve(-E);
        if (!step.allFinite()) break;
        double limit = 0.5 * c.norm() / std::max(1e-14, step.norm());
        c += step * std::min(1.0, limit);
        c.normalize();
      }
      tau *= 0.5;
    }

    // Hard balance audit.
    double worst = hard_worst();
    if (attempt == 0 || worst < best.worst) {
      Poly poly;
      poly += Poly(c(0) / col_scale(0));
      for (size_t mi = 0; mi < monos.size(); ++mi) {
        Poly term(c(static_cast<int>(mi) + 1) / col_scale(static_cast<int>(mi) + 1));
        for (int i = 0; i < n; ++i)
          if (monos[mi][i] > 0) term = term * Poly::var(i, 1.0, monos[mi][i]);
        poly += term;
      }
      best.q = poly;
      best.worst = worst;
    }
    if (best.worst <= part_tol) break;
  }
  return best;
}

}  // namespace

void Partition::build_dense() {
  dense_factors.clear();
  dense_grads.clear();
  for (const auto& q : factors) {
    dense_factors.push_back(DensePoly2::from(q, 0, 1));
    dense_grads.push_back({DensePoly2::from(q.derivative(0), 0, 1),
                           DensePoly2::from(q.derivative(1), 0, 1)});
  }
}

bool Partition::in_wall(std::span<const double> x, double wall) const {
  for (size_t k = 0; k < dense_factors.size(); ++k) {
    double val = std::abs(dense_factors[k].eval(x[0], x[1]));
    double g2 = sqr(dense_grads[k][0].eval(x[0], x[1])) +
                sqr(dense_grads[k][1].eval(x[0], x[1]));
    if (val <= wall * std::sqrt(g2)) return true;
  }
  return false;
}

int Partition::cell_index(std::span<const double> x, double wall) const {
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] < box_lo[i] || x[i] > box_hi[i]) return -1;
  if (in_wall(x, wall)) return -1;
  double gx = (x[0] - box_lo[0]) / (box_hi[0] - box_lo[0]) * grid_nx;
  double gy = (x[1] - box_lo[1]) / (box_hi[1] - box_lo[1]) * grid_ny;
  int ix = std::clamp(static_cast<int>(gx), 0, grid_nx - 1);
  int iy = std::clamp(static_cast<int>(gy), 0, grid_ny - 1);
  int id = grid_component[ix + static_cast<size_t>(grid_nx) * iy];
  if (id >= 0) return id;
  // Wall grid cell: look for a neighbouring component with matching signs.
  std::vector<int> signs(factors.size());
  for (size_t k = 0; k < factors.size(); ++k)
    signs[k] = dense_factors[k].eval(x[0], x[1]) >= 0 ? 1 : -1;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      int jx = ix + dx, jy = iy + dy;
      if (jx < 0 || jy < 0 || jx >= grid_nx || jy >= grid_ny) continue;
      int cid = grid_component[jx + static_cast<size_t>(grid_nx) * jy];
      if (cid >= 0 && cells[cid].signs == signs) return cid;
    }
  return -1;
}

std::string Partition::cells_csv() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "cell,weight,count,sample_x,sample_y,signs\n";
  for (size_t i = 0; i < cells.size(); ++i) {
    os << i << "," << cells[i].weight << "," << cells[i].point_count << ","
       << cells[i].sample_point[0] << "," << cells[i].sample_point[1] << ",";
    for (int s : cells[i].signs) os << (s > 0 ? "+" : "-");
    os << "\n";
  }
  return os.str();
}

namespace {
Partition partition_once(const WeightedPoints& pts, int D, int n, double wall_width,
                         std::uint64_t seed) {
  if (D < 1) throw PreconditionError("partition: D must be >= 1");
  if (n != 2) throw PreconditionError("partition: implemented for n = 2");
  size_t npts = pts.count();
  if (npts == 0) throw PreconditionError("partition: empty point set");
  int steps = std::max(1, static_cast<int>(std::ceil(n * std::log2(std::max(1, D)))));
  if (npts < (1ull << steps))
    throw PreconditionError("partition: D too large for the point count");

  Partition part;
  part.box_lo.assign(n, 1e300);
  part.box_hi.assign(n, -1e300);
  for (size_t p = 0; p < npts; ++p) {
    auto x = pts.point(p);
    for (int i = 0; i < n; ++i) {
      part.box_lo[i] = std::min(part.box_lo[i], x[i]);
      part.box_hi[i] = std::max(part.box_hi[i], x[i]);
    }
  }
  double diam = 0;
  for (int i = 0; i < n; ++i) diam = std::max(diam, part.box_hi[i] - part.box_lo[i]);
  part.wall_width = wall_width > 0 ? wall_width : 0.004 * diam;
  part.total_weight = pairwise_sum(pts.weights);

  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> parts(1);
  for (std::uint32_t p = 0; p < npts; ++p) parts[0].push_back(p);

  for (int step = 0; step < steps; ++step) {
    int active = 0;
    for (const auto& s : parts)
      if (!s.empty()) ++active;
    int d = bisection_degree(n, std::max(1, active));
    auto outcome = simultaneous_bisect(pts, parts, d, rng);
    part.factors.push_back(outcome.q);
    part.degree += outcome.q.degree();
    part.worst_imbalance = std::max(part.worst_imbalance, outcome.worst);
    std::vector<std::vector<std::uint32_t>> next;
    for (const auto& s : parts) {
      std::vector<std::uint32_t> plus, minus;
      for (auto p : s)
        (outcome.q.eval(pts.point(p)) >= 0 ? plus : minus).push_back(p);
      next.push_back(std::move(plus));
      next.push_back(std::move(minus));
    }
    parts = std::move(next);
  }

  part.build_dense();

  // Flood-fill grid at wall/4 resolution for the connected components.
  double res = part.wall_width / 4.0;
  part.grid_nx = std::min(1600, std::max(8, static_cast<int>(
                                            std::ceil((part.box_hi[0] - part.box_lo[0]) / res))));
  part.grid_ny = std::min(1600, std::max(8, static_cast<int>(
                                            std::ceil((part.box_hi[1] - part.box_lo[1]) / res))));
  size_t gsz = static_cast<size_t>(part.grid_nx) * part.grid_ny;
  std::vector<std::vector<int>> gsigns(gsz);
  part.grid_component.assign(gsz, -1);
  std::vector<char> wall(gsz, 0);
  auto cell_center = [&](int ix, int iy) {
    std::array<double, 2> c;
    c[0] = part.box_lo[0] + (ix + 0.5) * (part.box_hi[0] - part.box_lo[0]) / part.grid_nx;
    c[1] = part.box_lo[1] + (iy + 0.5) * (part.box_hi[1] - part.box_lo[1]) / part.grid_ny;
    return c;
  };
  for (int iy = 0; iy < part.grid_ny; ++iy)
    for (int ix = 0; ix < part.grid_nx; ++ix) {
      auto c = cell_center(ix, iy);
      size_t g = ix + static_cast<size_t>(part.grid_nx) * iy;
      if (part.in_wall(c, part.wall_width)) {
        wall[g] = 1;
        continue;
      }
      std::vector<int> s(part.factors.size());
      for (size_t k = 0; k < part.factors.size(); ++k)
        s[k] = part.dense_factors[k].eval(c[0], c[1]) >= 0 ? 1 : -1;
      gsigns[g] = std::move(s);
    }
  for (int iy = 0; iy < part.grid_ny; ++iy)
    for (int ix = 0; ix < part.grid_nx; ++ix) {
      size_t g = ix + static_cast<size_t>(part.grid_nx) * iy;
      if (wall[g] || part.grid_component[g] >= 0) continue;
      int id = static_cast<int>(part.cells.size());
      PartitionCell cell;
      cell.signs = gsigns[g];
      cell.component = id;
      auto c0 = cell_center(ix, iy);
      cell.sample_point = {c0[0], c0[1]};
      part.cells.push_back(cell);
      std::deque<std::pair<int, int>> queue{{ix, iy}};
      part.grid_component[g] = id;
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int dir = 0; dir < 4; ++dir) {
          int jx = cx + dx[dir], jy = cy + dy[dir];
          if (jx < 0 || jy < 0 || jx >= part.grid_nx || jy >= part.grid_ny) continue;
          size_t gg = jx + static_cast<size_t>(part.grid_nx) * jy;
          if (wall[gg] || part.grid_component[gg] >= 0) continue;
          if (gsigns[gg] != part.cells[id].signs) continue;
          part.grid_component[gg] = id;
          queue.emplace_back(jx, jy);
        }
      }
    }

  // Sliver components that hug Z(P) throughout belong to a slightly
  // thickened wall, not to the cell list; absorb them before accounting.
  {
    std::vector<size_t> area(part.cells.size(), 0);
    for (size_t g = 0; g < gsz; ++g)
      if (part.grid_component[g] >= 0) ++area[part.grid_component[g]];
    auto cell_dist = [&](std::span<const double> x) {
      double dmin = 1e300;
      for (size_t k = 0; k < part.factors.size(); ++k) {
        double val = std::abs(part.dense_factors[k].eval(x[0], x[1]));
        double g2 = sqr(part.dense_grads[k][0].eval(x[0], x[1])) +
                    sqr(part.dense_grads[k][1].eval(x[0], x[1]));
        dmin = std::min(dmin, val / std::max(1e-12, std::sqrt(g2)));
      }
      return dmin;
    };
    std::vector<double> max_dist(part.cells.size(), 0.0);
    size_t area_cap = gsz / 32;
    for (int iy = 0; iy < part.grid_ny; ++iy)
      for (int ix = 0; ix < part.grid_nx; ++ix) {
        size_t g = ix + static_cast<size_t>(part.grid_nx) * iy;
        int id = part.grid_component[g];
        if (id < 0 || area[id] > area_cap) continue;
        auto c = cell_center(ix, iy);
        max_dist[id] = std::max(max_dist[id], cell_dist(c));
      }
    std::vector<int> remap(part.cells.size(), -1);
    std::vector<PartitionCell> kept;
    for (size_t id = 0; id < part.cells.size(); ++id) {
      bool sliver = area[id] <= area_cap && max_dist[id] <= 6.0 * part.wall_width;
      if (sliver) continue;
      remap[id] = static_cast<int>(kept.size());
      kept.push_back(part.cells[id]);
    }
    for (auto& g : part.grid_component)
      if (g >= 0) g = remap[g];
    part.cells = std::move(kept);
  }

  // Assign point weights to cells (or the wall).
  for (size_t p = 0; p < npts; ++p) {
    int id = part.cell_index(pts.point(p), part.wall_width);
    if (id < 0) {
      part.wall_weight += pts.weights[p];
    } else {
      part.cells[id].weight += pts.weights[p];
      part.cells[id].point_count += 1;
    }
  }
  return part;
}

double nonempty_ratio(const Partition& part) {
  double wmax = 0, wmin = 1e300;
  for (const auto& c : part.cells)
    if (c.point_count > 0) {
      wmax = std::max(wmax, c.weight);
      wmin = std::min(wmin, c.weight);
    }
  return wmin < 1e300 && wmin > 0 ? wmax / wmin : 1e300;
}
}  // namespace

Partition partition(const WeightedPoints& pts, int D, int n, double wall_width,
                    std::uint64_t seed) {
  // Randomized construction with restarts: generic cut crossings occasionally
  // spawn small lens components; retry with derived seeds until the cell
  // weights are balanced, keeping the best attempt.
  Partition best;
  double best_score = 1e300;
  Rng seeder(seed);
  for (int attempt = 0; attempt < 12; ++attempt) {
    auto cand = partition_once(pts, D, n, wall_width, seeder.next_u64());
    double score = nonempty_ratio(cand) + 100.0 * cand.worst_imbalance;
    if (std::getenv("OSCINT_PARTITION_DEBUG"))
      std::fprintf(stderr, "partition attempt %d: ratio %.2f imbalance %.3f\n", attempt,
                   nonempty_ratio(cand), cand.worst_imbalance);
    if (score < best_score) {
      best_score = score;
      best = std::move(cand);
    }
    if (nonempty_ratio(best) <= 12.0 && best.worst_imbalance <= 0.04) break;
  }
  return best;
}

size_t segment_cell_incidence(std::span<const double> a, std::span<const double> b,
                              const Partition& part, double shrink) {
  double len = 0;
  for (size_t i = 0; i < a.size(); ++i) len += sqr(b[i] - a[i]);
  len = std::sqrt(len);
  size_t samples = std::max<size_t>(2, static_cast<size_t>(std::ceil(len / (shrink / 4))));
  std::vector<char> seen(part.cells.size(), 0);
  size_t distinct = 0;
  std::vector<double> x(a.size());
  for (size_t s = 0; s <= samples; ++s) {
    double t = static_cast<double>(s) / samples;
    for (size_t i = 0; i < a.size(); ++i) x[i] = a[i] * (1 - t) + b[i] * t;
    int id = part.cell_index(x, shrink);
    if (id >= 0 && !seen[id]) {
      seen[id] = 1;
      ++distinct;
    }
  }
  return distinct;
}

size_t tube_cell_incidence(const PolyCurve& curve, const Partition& part, double shrink) {
  std::vector<char> seen(part.cells.size(), 0);
  size_t distinct = 0;
  double t = curve.t_lo;
  while (t <= curve.t_hi) {
    auto x = curve.eval(t);
    int id = part.cell_index(x, shrink);
    if (id >= 0 && !seen[id]) {
      seen[id] = 1;
      ++distinct;
    }
    double speed = std::max(1e-9, norm2(curve.velocity(t)));
    t += (shrink / 4.0) / speed;
  }
  return distinct;
}

// ---------------------------------------------------------------------------
// Polynomial curves
// ---------------------------------------------------------------------------

int PolyCurve::degree() const {
  int d = 0;
  for (const auto& c : components) d = std::max(d, c.degree());
  return d;
}

std::vector<double> PolyCurve::eval(double t) const {
  std::vector<double> out(components.size());
  std::array<double, 1> tv{t};
  for (size_t i = 0; i < components.size(); ++i) out[i] = components[i].eval(tv);
  return out;
}

std::vector<double> PolyCurve::velocity(double t) const {
  std::vector<double> out(components.size());
  std::array<double, 1> tv{t};
  for (size_t i = 0; i < components.size(); ++i)
    out[i] = components[i].derivative(0).eval(tv);
  return out;
}

double PolyCurve::sup_second_derivative(int samples) const {
  double sup = 0;
  for (int s = 0; s <= samples; ++s) {
    double t = t_lo + (t_hi - t_lo) * s / samples;
    std::array<double, 1> tv{t};
    double a2 = 0;
    for (const auto& c : components) a2 += sqr(c.derivative(0).derivative(0).eval(tv));
    sup = std::max(sup, std::sqrt(a2));
  }
  return sup;
}

PolyCurve taylor_curve(const PhaseSpec& phase, std::span<const double> omega_theta,
                       std::span<const double> v, double lambda, double eps) {
  if (eps <= 0 || eps >= 1) throw PreconditionError("taylor_curve: eps must lie in (0,1)");
  int n = phase.n();
  int N = static_cast<int>(std::ceil(1.0 / (2.0 * eps)));
  if (N > 12) throw PreconditionError("taylor_curve: requested Taylor order too high");

  // Sample the solved core curve around 0 and interpolate; this reproduces
  // polynomial core curves exactly whenever 2N reaches their degree.
  int stencil = 2 * N + 1;
  double h = lambda / 24.0;
  std::vector<double> tgrid(stencil);
  for (int k = 0; k < stencil; ++k) tgrid[k] = (k - N) * h;
  auto core = core_curve(phase, omega_theta, v, lambda, tgrid);
  if (core.t.size() != static_cast<size_t>(stencil))
    throw PreconditionError("taylor_curve: curve leaves the domain inside the stencil");

  Eigen::MatrixXd V(stencil, stencil);
  for (int r = 0; r < stencil; ++r) {
    double s = tgrid[r] / h;  // scaled for conditioning
    double pw = 1.0;
    for (int c = 0; c < stencil; ++c) {
      V(r, c) = pw;
      pw *= s;
    }
  }
  auto lu = V.partialPivLu();

  PolyCurve out;
  double validity = std::pow(lambda, 1.0 - eps);
  out.t_lo = std::max(-validity, core.t_min);
  out.t_hi = std::min(validity, core.t_max);
  for (int d = 0; d < n - 1; ++d) {
    Eigen::VectorXd y(stencil);
    for (int r = 0; r < stencil; ++r) y(r) = core.gamma[r * (n - 1) + d];
    Eigen::VectorXd coef = lu.solve(y);
    Poly comp;
    for (int k = 0; k <= N; ++k)
      comp += Poly::var(0, coef(k) / std::pow(h, k), k);
    out.components.push_back(comp);
  }

  // Measured sup error and tangent-angle constant over the validity window.
  const int check = 1000;
  std::vector<double> tsamp(check);
  for (int s = 0; s < check; ++s)
    tsamp[s] = out.t_lo + (out.t_hi - out.t_lo) * s / (check - 1.0);
  auto truth = core_curve(phase, omega_theta, v, lambda, tsamp);
  double sup_err = 0, sup_angle_const = 0;
  for (size_t s = 0; s < truth.t.size(); ++s) {
    double t = truth.t[s];
    auto approx = out.eval(t);
    double e2 = 0;
    for (int d = 0; d < n - 1; ++d) e2 += sqr(truth.gamma[s * (n - 1) + d] - approx[d]);
    sup_err = std::max(sup_err, std::sqrt(e2));
    if (s % 10 == 0) {
      auto vel = out.velocity(t);
      std::vector<double> tan_true(n), tan_approx(n);
      for (int d = 0; d < n - 1; ++d) {
        tan_true[d] = truth.tangent[s * n + d];
        tan_approx[d] = vel[d];
      }
      tan_true[n - 1] = truth.tangent[s * n + n - 1];
      tan_approx[n - 1] = 1.0;
      sup_angle_const = std::max(sup_angle_const,
                                 line_angle(tan_true, tan_approx) * std::sqrt(lambda));
    }
  }
  out.error_bound = sup_err;
  out.tangent_angle_constant = sup_angle_const;
  return out;
}

TransverseZone transverse_zone(const Variety& z, const PolyCurve& curve, double alpha,
                               double r, double lambda, std::uint64_t seed) {
  if (r <= 0 || r >= lambda)
    throw PreconditionError("transverse_zone: need 0 < r < lambda");
  double dd = curve.sup_second_derivative();
  const double c_bar = 2.0;
  if (alpha < c_bar * dd * r)
    throw PreconditionError("transverse_zone: hypothesis alpha >= C delta r fails (delta = " +
                            std::to_string(dd) + ")");
  int n = z.n();
  Rng rng(seed);
  std::vector<double> zone;  // candidate zone points, n per entry
  int tsamples = 400;
  for (int s = 0; s <= tsamples; ++s) {
    double t = curve.t_lo + (curve.t_hi - curve.t_lo) * s / tsamples;
    auto x = curve.eval(t);
    x.resize(n);
    x[n - 1] = t;  // polynomial graph convention
    if (norm2(x) > lambda) continue;
    auto vel = curve.velocity(t);
    std::vector<double> tangent(n);
    for (int d = 0; d < n - 1; ++d) tangent[d] = vel[d];
    tangent[n - 1] = 1.0;
    for (int probe = 0; probe < 3; ++probe) {
      std::vector<double> start = x;
      if (probe > 0) {
        auto off = rng.in_ball(n, 0.8 * r);
        for (int i = 0; i < n; ++i) start[i] += off[i];
      }
      auto proj = z.project(start);
      if (!proj.converged) continue;
      double dist = 0;
      for (int i = 0; i < n; ++i) dist += sqr(proj.point[i] - x[i]);
      if (std::sqrt(dist) >= r) continue;
      if (z.tangent_angle(proj.point, tangent) > alpha)
        zone.insert(zone.end(), proj.point.begin(), proj.point.end());
    }
  }
  TransverseZone out;
  size_t count = zone.size() / n;
  std::vector<char> covered(count, 0);
  double rad = r / alpha;
  for (size_t k = 0; k < count; ++k) {
    if (covered[k]) continue;
    out.centers.insert(out.centers.end(), zone.begin() + k * n, zone.begin() + (k + 1) * n);
    for (size_t l = k; l < count; ++l) {
      if (covered[l]) continue;
      double d = 0;
      for (int i = 0; i < n; ++i) d += sqr(zone[k * n + i] - zone[l * n + i]);
      if (d <= rad * rad) covered[l] = 1;
    }
  }
  out.ball_count = out.centers.size() / n;
  double denom = std::pow(std::max(1, z.max_degree()) * std::max(1, curve.degree()), n);
  out.count_constant = static_cast<double>(out.ball_count) / denom;
  return out;
}

// ---------------------------------------------------------------------------
// Tangency
// ---------------------------------------------------------------------------

TangencyResult tangency_classify(const PhaseSpec& phase, const Tube& tube, const Variety& z,
                                 double R, double delta_m, TangencyOptions opts) {
  TangencyResult res;
  if (z.is_whole_space()) {
    res.tangent = true;
    res.reason = "whole-space variety: conditions hold vacuously";
    return res;
  }
  int n = z.n();
  double dist_bound = std::pow(R, 0.5 + delta_m);
  double angle_bound = opts.c_tang * std::pow(R, -0.5 + delta_m);
  double interact = opts.C_tang * dist_bound;

  size_t nsamp = tube.core.t.size();
  size_t stride = std::max<size_t>(1, nsamp / opts.core_samples);
  for (size_t k = 0; k < nsamp; k += stride) {
    std::vector<double> x(tube.core.gamma_at(k, n).begin(), tube.core.gamma_at(k, n).end());
    x.push_back(tube.core.t[k]);
    // Containment is tested on the tube, i.e. core point plus radius offsets.
    std::vector<std::vector<double>> probes{x};
    for (int c = 0; c < opts.cross_samples; ++c) {
      double ang = 2 * M_PI * c / opts.cross_samples;
      auto off = x;
      off[0] += tube.radius * std::cos(ang);
      if (n >= 3)
        off[1] += tube.radius * std::sin(ang);
      else if (std::sin(ang) != 0)
        continue;
      probes.push_back(off);
    }
    for (const auto& p : probes) {
      if (norm2(p) > tube.R) continue;
      auto proj = z.project(p);
      double dist = proj.converged ? proj.distance : std::numeric_limits<double>::infinity();
      res.max_distance = std::max(res.max_distance, dist);
      if (dist > dist_bound) {
        res.tangent = false;
        res.reason = "containment fails: dist " + std::to_string(dist) + " > R^{1/2+dm} " +
                     std::to_string(dist_bound);
        res.witness = p;
        return res;
      }
    }
    // Angle condition against nearby variety points.
    auto proj = z.project(x);
    if (proj.converged && proj.distance <= interact) {
      auto g = phase.gauss_map_lambda(x, tube.omega_center, tube.lambda);
      double ang = z.tangent_angle(proj.point, g);
      res.max_angle = std::max(res.max_angle, ang);
      if (ang > angle_bound) {
        res.tangent = false;
        res.reason = "direction fails: angle " + std::to_string(ang) + " > " +
                     std::to_string(angle_bound);
        res.witness = x;
        return res;
      }
    }
  }
  res.tangent = true;
  res.reason = "containment and angle conditions hold on all samples";
  return res;
}

}  // namespace oscint
