#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oscint/util.hpp"

namespace oscint {

using BigRat = boost::multiprecision::cpp_rational;

/// Exact rational exponent with a provenance tag naming the formula and
/// parameters it came from. All arithmetic in this module is exact; no
/// floating point enters any table entry.
struct RationalExponent {
  BigRat value;
  std::string provenance;

  bool operator==(const RationalExponent& o) const { return value == o.value; }
  std::string str() const;  // "10/3" or "4"
  double to_double() const { return static_cast<double>(value); }
};

enum class Hypothesis { H2, H2plus };
enum class ConversionMode { PositiveDefinite, General };

/// Sharp linear endpoint for dimension n under the given curvature hypothesis
/// (parity-dependent closed forms).
RationalExponent theorem_endpoint(int n, Hypothesis hyp);

/// k-linear / k-broad endpoint 2(n+k)/(n+k-2).
RationalExponent pbar(int k, int n);

/// Exponent forced by mass concentrating on the lambda^sigma-neighbourhood of
/// an m-dimensional variety: 2(sigma(n-m)+m)/(sigma(n-m)+m-1).
RationalExponent necessary_exponent(int m, const BigRat& sigma, int n);

/// e_{k,n}(p) = (1/2)(1/2 - 1/p)(n+k).
RationalExponent e_kn(int k, int n, const BigRat& p);

/// Admissible linear range obtained from a k-broad estimate at level k.
struct LinearWindow {
  int k;
  BigRat broad;                  // k-broad exponent fed in
  BigRat lower;                  // conversion lower bound at this k
  std::optional<BigRat> upper;   // absent means unbounded above
  bool broad_in_window = false;  // lower <= broad (<= upper)
};

struct BroadToLinearResult {
  int k_star = 0;
  RationalExponent p_linear;
  std::vector<LinearWindow> windows;
};

/// Combine per-k broad exponents with the broad-to-linear conversion
/// constraints; picks the largest k whose own broad exponent sits inside the
/// admissible window and returns that exponent as the linear endpoint.
BroadToLinearResult broad_to_linear(int n, const std::function<BigRat(int)>& broad_exponent,
                                    ConversionMode mode);

/// Optimal (m, sigma) pair behind the sharp example in dimension n.
struct MassConcentrationEntry {
  int m;
  BigRat sigma;
};
MassConcentrationEntry optimal_m_sigma(int n, Hypothesis hyp);

/// Markdown/CSV renderings of the endpoint and (m, sigma) tables.
std::string endpoint_table_markdown(int n_max);
std::string endpoint_table_csv(int n_max);

}  // namespace oscint
