#include "oscint/exponents.hpp"

#include <sstream>

namespace oscint {

std::string RationalExponent::str() const {
  std::ostringstream os;
  os << boost::multiprecision::numerator(value);
  if (boost::multiprecision::denominator(value) != 1)
    os << "/" << boost::multiprecision::denominator(value);
  return os.str();
}

RationalExponent theorem_endpoint(int n, Hypothesis hyp) {
  if (n < 2) throw PreconditionError("theorem_endpoint: n must be >= 2");
  bool odd = (n % 2 != 0);
  BigRat v;
  if (hyp == Hypothesis::H2)
    v = odd ? BigRat(2 * (n + 1), n - 1) : BigRat(2 * (n + 2), n);
  else
    v = odd ? BigRat(2 * (3 * n + 1), 3 * n - 3) : BigRat(2 * (3 * n + 2), 3 * n - 2);
  std::string tag = std::string("endpoint(") + (hyp == Hypothesis::H2 ? "H2" : "H2+") +
                    ", n=" + std::to_string(n) + ")";
  return {v, tag};
}

RationalExponent pbar(int k, int n) {
  if (k < 1 || k > n) throw PreconditionError("pbar: need 1 <= k <= n");
  return {BigRat(2 * (n + k), n + k - 2),
          "pbar(k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")"};
}

RationalExponent necessary_exponent(int m, const BigRat& sigma, int n) {
  if (m < 1 || m > n) throw PreconditionError("necessary_exponent: need 1 <= m <= n");
  if (sigma < 0 || sigma > 1)
    throw PreconditionError("necessary_exponent: need 0 <= sigma <= 1");
  BigRat s = sigma * (n - m) + m;
  if (s <= 1) throw PreconditionError("necessary_exponent: sigma(n-m)+m must exceed 1");
  std::ostringstream tag;
  tag << "necessary(m=" << m << ", sigma=" << sigma << ", n=" << n << ")";
  return {2 * s / (s - 1), tag.str()};
}

RationalExponent e_kn(int k, int n, const BigRat& p) {
  if (p <= 0) throw PreconditionError("e_kn: p must be positive");
  BigRat v = BigRat(1, 2) * (BigRat(1, 2) - 1 / p) * (n + k);
  std::ostringstream tag;
  tag << "e_{" << k << "," << n << "}(p=" << p << ")";
  return {v, tag.str()};
}

BroadToLinearResult broad_to_linear(int n, const std::function<BigRat(int)>& broad_exponent,
                                    ConversionMode mode) {
  if (n < 2) throw PreconditionError("broad_to_linear: n must be >= 2");
  BroadToLinearResult res;
  for (int k = 2; k <= n; ++k) {
    LinearWindow w;
    w.k = k;
    w.broad = broad_exponent(k);
    if (mode == ConversionMode::PositiveDefinite) {
      w.lower = BigRat(2 * (2 * n - k + 2), 2 * n - k);
      if (k > 2) w.upper = BigRat(2 * (k - 1), k - 2);
    } else {
      w.lower = BigRat(2 * (n - k + 2), n - k + 1);
    }
    w.broad_in_window = (w.lower <= w.broad) && (!w.upper || w.broad <= *w.upper);
    res.windows.push_back(w);
  }
  // Largest admissible k wins; its broad exponent is the linear endpoint.
  for (auto it = res.windows.rbegin(); it != res.windows.rend(); ++it) {
    if (it->broad_in_window) {
      res.k_star = it->k;
      res.p_linear = {it->broad, "broad_to_linear(n=" + std::to_string(n) +
                                     ", k*=" + std::to_string(it->k) + ")"};
      return res;
    }
  }
  throw PreconditionError("broad_to_linear: no level k admits a linear range");
}

MassConcentrationEntry optimal_m_sigma(int n, Hypothesis hyp) {
  if (n < 2) throw PreconditionError("optimal_m_sigma: n must be >= 2");
  int m = (n % 2 != 0) ? (n + 1) / 2 : n / 2 + 1;
  BigRat sigma = (hyp == Hypothesis::H2) ? BigRat(0) : BigRat(1, 2);
  return {m, sigma};
}

std::string endpoint_table_markdown(int n_max) {
  std::ostringstream os;
  os << "| n | H2 endpoint | H2+ endpoint | H2 (m,sigma) | H2+ (m,sigma) |\n";
  os << "|---|-------------|--------------|--------------|---------------|\n";
  for (int n = 2; n <= n_max; ++n) {
    auto h2 = theorem_endpoint(n, Hypothesis::H2);
    auto h2p = theorem_endpoint(n, Hypothesis::H2plus);
    auto ms2 = optimal_m_sigma(n, Hypothesis::H2);
    auto ms2p = optimal_m_sigma(n, Hypothesis::H2plus);
    os << "| " << n << " | " << h2.str() << " | " << h2p.str() << " | (" << ms2.m << ", "
       << ms2.sigma << ") | (" << ms2p.m << ", " << ms2p.sigma << ") |\n";
  }
  return os.str();
}

std::string endpoint_table_csv(int n_max) {
  std::ostringstream os;
  os << "n,h2,h2plus,h2_m,h2_sigma,h2plus_m,h2plus_sigma\n";
  for (int n = 2; n <= n_max; ++n) {
    auto h2 = theorem_endpoint(n, Hypothesis::H2);
    auto h2p = theorem_endpoint(n, Hypothesis::H2plus);
    auto ms2 = optimal_m_sigma(n, Hypothesis::H2);
    auto ms2p = optimal_m_sigma(n, Hypothesis::H2plus);
    os << n << "," << h2.str() << "," << h2p.str() << "," << ms2.m << "," << ms2.sigma
       << "," << ms2p.m << "," << ms2p.sigma << "\n";
  }
  return os.str();
}

}  // namespace oscint
