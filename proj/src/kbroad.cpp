#include "oscint/kbroad.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "oscint/caps.hpp"

namespace oscint {

namespace {

using Frame = Eigen::MatrixXd;  // n x (k-1), orthonormal columns

double frame_angle(const Frame& f, std::span<const double> dir) {
  Eigen::VectorXd g(f.rows());
  for (int i = 0; i < f.rows(); ++i) g(i) = dir[i];
  double c = (f.transpose() * g).norm() / g.norm();
  return std::acos(std::min(1.0, c));
}

std::vector<Frame> random_frames(int n, int k1, size_t count, std::uint64_t seed) {
  std::vector<Frame> out;
  Rng rng(seed);
  for (size_t s = 0; s < count; ++s) {
    Eigen::MatrixXd g(n, k1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k1; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Frame q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k1);
    out.push_back(q);
  }
  return out;
}

// Frames spanned by (k-1)-subsets of the cap directions at this ball.
void append_cap_frames(std::vector<Frame>& net, const CapField& field, size_t ball, int k1) {
  int n = field.n;
  size_t caps = field.caps.size();
  std::vector<size_t> subset(k1);
  std::function<void(size_t, int)> rec = [&](size_t start, int depth) {
    if (depth == k1) {
      Eigen::MatrixXd g(n, k1);
      for (int j = 0; j < k1; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = field.caps[subset[j]].directions[ball][i];
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      Eigen::MatrixXd r = qr.matrixQR().topRows(k1).triangularView<Eigen::Upper>();
      if (std::abs(r.diagonal().prod()) < 1e-10) return;  // degenerate subset
      net.push_back(qr.householderQ() * Eigen::MatrixXd::Identity(n, k1));
      return;
    }
    for (size_t c = start; c < caps; ++c) {
      subset[depth] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

double CapField::cap_mass(size_t cap, size_t ball, double p) const {
  double s = 0;
  for (const auto& v : caps[cap].samples[ball]) s += std::pow(std::abs(v), p);
  return s * sample_weight;
}

CapField CapField::add(const CapField& a, const CapField& b) {
  if (a.caps.size() != b.caps.size() || a.ball_count() != b.ball_count())
    throw PreconditionError("CapField::add: geometry mismatch");
  CapField out = a;
  for (size_t c = 0; c < out.caps.size(); ++c)
    for (size_t bl = 0; bl < out.ball_count(); ++bl) {
      if (out.caps[c].samples[bl].size() != b.caps[c].samples[bl].size())
        throw PreconditionError("CapField::add: sample count mismatch");
      for (size_t s = 0; s < out.caps[c].samples[bl].size(); ++s)
        out.caps[c].samples[bl][s] += b.caps[c].samples[bl][s];
    }
  return out;
}

CapField CapField::without_cap(size_t cap) const {
  CapField out = *this;
  out.caps.erase(out.caps.begin() + static_cast<long>(cap));
  return out;
}

MuResult mu_ball(const CapField& field, size_t ball, const KBroadConfig& cfg) {
  MuResult res;
  size_t ncaps = field.caps.size();
  if (ncaps == 0) return res;
  if (cfg.A < 1) throw PreconditionError("mu_ball: A must be >= 1");
  int k1 = cfg.k - 1;
  if (k1 < 1 || cfg.k > field.n) throw PreconditionError("mu_ball: need 2 <= k <= n");
  double threshold = cfg.angle_threshold > 0 ? cfg.angle_threshold : 1.0 / cfg.K;

  std::vector<double> mass(ncaps);
  for (size_t c = 0; c < ncaps; ++c) mass[c] = field.cap_mass(c, ball, cfg.p);

  auto net = random_frames(field.n, k1, cfg.frames, cfg.seed);
  append_cap_frames(net, field, ball, k1);

  // Each frame reduces to the set of caps it hides; distinct hide-sets are
  // what the exhaustive tuple search actually ranges over.
  std::vector<std::uint64_t> masks;
  if (ncaps <= 63) {
    std::map<std::uint64_t, bool> seen;
    for (const auto& fr : net) {
      std::uint64_t m = 0;
      for (size_t c = 0; c < ncaps; ++c)
        if (frame_angle(fr, field.caps[c].directions[ball]) <= threshold)
          m |= (1ull << c);
      if (!seen.count(m)) {
        seen[m] = true;
        masks.push_back(m);
      }
    }
  }

  auto max_unhidden = [&](std::uint64_t hidden) {
    double worst = 0;
    for (size_t c = 0; c < ncaps; ++c)
      if (!(hidden & (1ull << c))) worst = std::max(worst, mass[c]);
    return worst;
  };

  double tuples = masks.empty() ? 1e300 : std::pow(static_cast<double>(masks.size()), cfg.A);
  if (!masks.empty() && tuples <= static_cast<double>(cfg.exhaustive_limit)) {
    // Exhaustive over A-combinations (with repetition) of distinct hide-sets.
    double best = 1e300;
    std::vector<size_t> pick(cfg.A, 0);
    std::function<void(int, size_t, std::uint64_t)> rec = [&](int depth, size_t start,
                                                              std::uint64_t hidden) {
      if (depth == cfg.A) {
        best = std::min(best, max_unhidden(hidden));
        return;
      }
      for (size_t i = start; i < masks.size(); ++i) rec(depth + 1, i, hidden | masks[i]);
    };
    rec(0, 0, 0);
    res.mu = best;
    res.exhaustive = true;
    return res;
  }

  // Greedy: pick subspaces one at a time to kill the largest remaining caps.
  std::vector<char> hidden(ncaps, 0);
  for (int a = 0; a < cfg.A; ++a) {
    double best_after = 1e300;
    size_t best_frame = 0;
    for (size_t fi = 0; fi < net.size(); ++fi) {
      double worst = 0;
      for (size_t c = 0; c < ncaps; ++c) {
        if (hidden[c]) continue;
        if (frame_angle(net[fi], field.caps[c].directions[ball]) <= threshold) continue;
        worst = std::max(worst, mass[c]);
      }
      if (worst < best_after) {
        best_after = worst;
        best_frame = fi;
      }
    }
    for (size_t c = 0; c < ncaps; ++c)
      if (!hidden[c] &&
          frame_angle(net[best_frame], field.caps[c].directions[ball]) <= threshold)
        hidden[c] = 1;
  }
  double greedy = 0;
  for (size_t c = 0; c < ncaps; ++c)
    if (!hidden[c]) greedy = std::max(greedy, mass[c]);
  res.greedy_value = greedy;
  res.exhaustive = false;

  // Optimality gap versus random tuples.
  Rng rng(cfg.seed ^ 0x9e37u);
  double rand_best = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<char> h(ncaps, 0);
    for (int a = 0; a < cfg.A; ++a) {
      const auto& fr = net[static_cast<size_t>(rng.uniform() * net.size()) % net.size()];
      for (size_t c = 0; c < ncaps; ++c)
        if (frame_angle(fr, field.caps[c].directions[ball]) <= threshold) h[c] = 1;
    }
    double worst = 0;
    for (size_t c = 0; c < ncaps; ++c)
      if (!h[c]) worst = std::max(worst, mass[c]);
    rand_best = std::min(rand_best, worst);
  }
  res.random_best = rand_best;
  res.mu = std::min(greedy, rand_best);
  res.optimality_gap = greedy - rand_best;
  return res;
}

BlResult bl_norm(const CapField& field, const std::optional<Region>& region,
                 const KBroadConfig& cfg) {
  BlResult out;
  double sum = 0;
  for (size_t b = 0; b < field.ball_count(); ++b) {
    if (region && !region->contains(field.ball_centers[b])) {
      out.per_ball_mu.push_back(0.0);
      continue;
    }
    double mu = mu_ball(field, b, cfg).mu;
    out.per_ball_mu.push_back(mu);
    sum += mu;
  }
  out.value = std::pow(sum, 1.0 / cfg.p);
  return out;
}

TriangleReport check_triangle(const CapField& f1, const CapField& f2, const KBroadConfig& cfg,
                              int A1, int A2) {
  if (A1 + A2 != cfg.A)
    throw PreconditionError("check_triangle: A must equal A1 + A2");
  TriangleReport rep;
  auto sum = CapField::add(f1, f2);
  rep.lhs = bl_norm(sum, std::nullopt, cfg).value;
  KBroadConfig c1 = cfg;
  c1.A = A1;
  KBroadConfig c2 = cfg;
  c2.A = A2;
  rep.rhs1 = bl_norm(f1, std::nullopt, c1).value;
  rep.rhs2 = bl_norm(f2, std::nullopt, c2).value;
  double denom = rep.rhs1 + rep.rhs2;
  rep.constant = denom > 0 ? rep.lhs / denom : (rep.lhs > 0 ? 1e300 : 1.0);
  rep.ok = rep.constant <= 8.0;
  return rep;
}

ConvexityReport check_logconvexity(const CapField& field, const KBroadConfig& cfg, double p,
                                   double p1, double p2, double alpha1, double alpha2, int A1,
                                   int A2) {
  if (std::abs(alpha1 + alpha2 - 1.0) > 1e-12)
    throw PreconditionError("check_logconvexity: alpha1 + alpha2 must equal 1");
  if (std::abs(1.0 / p - (alpha1 / p1 + alpha2 / p2)) > 1e-12)
    throw PreconditionError("check_logconvexity: exponent identity 1/p = a1/p1 + a2/p2 fails");
  if (A1 + A2 != cfg.A)
    throw PreconditionError("check_logconvexity: A must equal A1 + A2");
  ConvexityReport rep;
  KBroadConfig c = cfg;
  c.p = p;
  rep.lhs = bl_norm(field, std::nullopt, c).value;
  KBroadConfig c1 = cfg;
  c1.p = p1;
  c1.A = A1;
  KBroadConfig c2 = cfg;
  c2.p = p2;
  c2.A = A2;
  double b1 = bl_norm(field, std::nullopt, c1).value;
  double b2 = bl_norm(field, std::nullopt, c2).value;
  rep.rhs = std::pow(b1, alpha1) * std::pow(b2, alpha2);
  rep.constant = rep.rhs > 0 ? rep.lhs / rep.rhs : (rep.lhs > 0 ? 1e300 : 1.0);
  rep.ok = rep.constant <= 8.0;
  return rep;
}

CapField make_capfield(const PhaseSpec& phase, const AmplitudeSpec& amp, double lambda,
                       const InputFunction& f, double K, double region_radius,
                       size_t max_balls, size_t samples_per_ball, std::uint64_t seed) {
  int n = phase.n();
  int dim = n - 1;
  CapField out;
  out.n = n;
  out.K = K;

  // Ball centres on a K^2-grid covering the region.
  double spacing = K * K;
  long kmax = static_cast<long>(std::floor(region_radius / spacing));
  std::vector<std::vector<double>> centers;
  auto push_center = [&](double x, double y, double z) {
    std::vector<double> c{x, y};
    if (n == 3) c.push_back(z);
    if (norm2(c) <= region_radius) centers.push_back(c);
  };
  for (long i = -kmax; i <= kmax; ++i)
    for (long j = -kmax; j <= kmax; ++j) {
      if (n == 2)
        push_center(i * spacing, j * spacing, 0);
      else
        for (long l = -kmax; l <= kmax; ++l) push_center(i * spacing, j * spacing, l * spacing);
    }
  if (centers.size() > max_balls) centers.resize(max_balls);
  out.ball_centers = centers;
  double ball_vol = std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0) * std::pow(K * K, n);
  out.sample_weight = ball_vol / static_cast<double>(samples_per_ball);

  // Cap pieces of f on the shared lattice.
  double support = std::min(1.0, amp.omega_support);
  CapCover caps(dim, 1.0 / K, support);
  Evaluator probe(phase, amp, lambda, f, region_radius + K * K);
  const OmegaLattice& lat = probe.lattice();
  std::vector<complexd> base(lat.size);
  for (size_t idx = 0; idx < lat.size; ++idx) base[idx] = f.value_at_node(lat, idx);

  Rng rng(seed);
  std::vector<std::vector<double>> sample_offsets;
  for (size_t s = 0; s < samples_per_ball; ++s) sample_offsets.push_back(rng.in_ball(n, K * K));

  for (const auto& key : caps.caps()) {
    std::vector<complexd> piece(lat.size);
    bool nonzero = false;
    for (size_t idx = 0; idx < lat.size; ++idx) {
      auto w = lat.node(idx);
      double psi = caps.psi(key, w);
      piece[idx] = base[idx] * psi;
      nonzero |= (std::abs(piece[idx]) > 0);
    }
    if (!nonzero) continue;
    CapField::Cap cap;
    cap.omega_center = caps.center(key);
    auto f_tau = InputFunction::grid_sampled(lat, std::move(piece));
    Evaluator ev(phase, amp, lambda, f_tau, region_radius + K * K);
    for (size_t b = 0; b < centers.size(); ++b) {
      cap.directions.push_back(phase.gauss_map_lambda(centers[b], cap.omega_center, lambda));
      std::vector<complexd> vals(samples_per_ball);
      std::vector<double> pts;
      for (size_t s = 0; s < samples_per_ball; ++s)
        for (int i = 0; i < n; ++i) pts.push_back(centers[b][i] + sample_offsets[s][i]);
      ev.evaluate_block(pts, vals);
      cap.samples.push_back(std::move(vals));
    }
    out.caps.push_back(std::move(cap));
  }
  return out;
}

}  // namespace oscint
