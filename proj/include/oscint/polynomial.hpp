#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "oscint/util.hpp"

namespace oscint {

/// Sparse multivariate polynomial with double coefficients over at most
/// kMaxVars variables. Used for phase functions, defining polynomials of
/// varieties, and polynomial curve components; differentiation and
/// substitution are symbolic so derivative evaluations are exact.
class Poly {
 public:
  static constexpr int kMaxVars = 8;
  using Expo = std::array<std::uint8_t, kMaxVars>;

  Poly() = default;
  explicit Poly(double c);
  static Poly var(int index, double coeff = 1.0, int power = 1);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly operator*(double s) const;
  friend Poly operator*(double s, const Poly& p) { return p * s; }

  Poly pow(int k) const;
  Poly derivative(int var) const;

  /// Substitute variable `var` by polynomial `repl` everywhere.
  Poly substitute(int var, const Poly& repl) const;

  double eval(std::span<const double> x) const;

  /// Partial evaluation: fixes the listed variables to numeric values and
  /// returns the polynomial in the remaining ones.
  Poly eval_partial(std::span<const int> vars, std::span<const double> vals) const;

  int degree() const;
  int degree_in(int var) const;
  bool is_zero(double tol = 0.0) const;
  size_t term_count() const { return terms_.size(); }
  double max_abs_coeff() const;

  /// Terms as (exponent vector, coefficient) pairs, sorted.
  const std::map<Expo, double>& terms() const { return terms_; }

  std::string to_string(std::span<const std::string> var_names) const;

  /// Parse an expression over named variables; `params` are substituted as
  /// numeric constants (e.g. "l*x2 - x1*x3" with l bound to lambda).
  /// Grammar: + - * / ^ with parentheses; '/' only by numeric literals.
  static Poly parse(const std::string& text, std::span<const std::string> var_names,
                    const std::map<std::string, double>& params = {});

 private:
  std::map<Expo, double> terms_;
  void prune();
};

/// Dense coefficients of a polynomial in at most two variables; fast repeated
/// evaluation path for the ω-side of phase functions.
struct DensePoly2 {
  int d1 = 0, d2 = 0;
  std::vector<double> c;  // c[i + (d1+1)*j] multiplies u^i v^j

  static DensePoly2 from(const Poly& p, int var_u, int var_v);
  double eval(double u, double v) const;
  /// Coefficients in u of p(u, v) for fixed v.
  void coeffs_in_u(double v, std::span<double> out) const;
};

}  // namespace oscint
