#include "oscint/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace oscint {

namespace {
constexpr double kPruneTol = 0.0;  // exact zero terms only
}

Poly::Poly(double c) {
  if (c != 0.0) terms_[Expo{}] = c;
}

Poly Poly::var(int index, double coeff, int power) {
  Poly p;
  if (coeff == 0.0) return p;
  Expo e{};
  e[index] = static_cast<std::uint8_t>(power);
  p.terms_[e] = coeff;
  return p;
}

void Poly::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= kPruneTol)
      it = terms_.erase(it);
    else
      ++it;
  }
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  r += o;
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] += c;
  prune();
  return *this;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  r -= o;
  return r;
}

Poly& Poly::operator-=(const Poly& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] -= c;
  prune();
  return *this;
}

Poly Poly::operator-() const { return *this * -1.0; }

Poly Poly::operator*(double s) const {
  Poly r;
  if (s == 0.0) return r;
  for (const auto& [e, c] : terms_) r.terms_[e] = c * s;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      Expo e;
      for (int i = 0; i < kMaxVars; ++i) e[i] = static_cast<std::uint8_t>(ea[i] + eb[i]);
      r.terms_[e] += ca * cb;
    }
  r.prune();
  return r;
}

Poly Poly::pow(int k) const {
  Poly r(1.0);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

Poly Poly::derivative(int var) const {
  Poly r;
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Expo d = e;
    d[var] -= 1;
    r.terms_[d] += c * static_cast<double>(e[var]);
  }
  r.prune();
  return r;
}

Poly Poly::substitute(int var, const Poly& repl) const {
  Poly r;
  for (const auto& [e, c] : terms_) {
    Expo rest = e;
    int k = rest[var];
    rest[var] = 0;
    Poly mono;
    mono.terms_[rest] = c;
    r += mono * repl.pow(k);
  }
  return r;
}

double Poly::eval(std::span<const double> x) const {
  double s = 0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < kMaxVars; ++i) {
      double b = (static_cast<size_t>(i) < x.size()) ? x[i] : 0.0;
      for (int k = 0; k < e[i]; ++k) t *= b;
    }
    s += t;
  }
  return s;
}

Poly Poly::eval_partial(std::span<const int> vars, std::span<const double> vals) const {
  Poly r = *this;
  for (size_t i = 0; i < vars.size(); ++i) r = r.substitute(vars[i], Poly(vals[i]));
  return r;
}

int Poly::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int i = 0; i < kMaxVars; ++i) s += e[i];
    d = std::max(d, s);
  }
  return d;
}

int Poly::degree_in(int var) const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[var]));
  return d;
}

bool Poly::is_zero(double tol) const {
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > tol) return false;
  return true;
}

double Poly::max_abs_coeff() const {
  double m = 0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string Poly::to_string(std::span<const std::string> var_names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    double a = c;
    if (!first) {
      os << (a < 0 ? " - " : " + ");
      a = std::abs(a);
    }
    first = false;
    bool has_var = false;
    for (int i = 0; i < kMaxVars; ++i) has_var |= (e[i] > 0);
    if (!has_var || a != 1.0) {
      os << a;
      if (has_var) os << "*";
    }
    bool started = false;
    for (int i = 0; i < kMaxVars; ++i) {
      if (e[i] == 0) continue;
      if (started) os << "*";
      started = true;
      os << (static_cast<size_t>(i) < var_names.size() ? var_names[i]
                                                       : "v" + std::to_string(i));
      if (e[i] > 1) os << "^" << static_cast<int>(e[i]);
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;
  std::span<const std::string> names;
  const std::map<std::string, double>& params;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw PreconditionError("polynomial parse error at position " +
                            std::to_string(pos) + ": " + what + " in '" + s + "'");
  }

  Poly expr() {
    Poly r = eat('-') ? -term() : term();
    while (true) {
      skip();
      if (eat('+'))
        r += term();
      else if (eat('-'))
        r -= term();
      else
        return r;
    }
  }

  Poly term() {
    Poly r = factor();
    while (true) {
      skip();
      if (eat('*')) {
        r = r * factor();
      } else if (eat('/')) {
        Poly d = factor();
        if (d.degree() != 0) fail("division only by constants");
        double dv = d.eval({});
        if (dv == 0.0) fail("division by zero");
        r = r * (1.0 / dv);
      } else {
        return r;
      }
    }
  }

  Poly factor() {
    Poly b = base();
    skip();
    if (eat('^')) {
      skip();
      size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) fail("expected integer exponent");
      int k = std::stoi(s.substr(start, pos - start));
      return b.pow(k);
    }
    return b;
  }

  Poly base() {
    skip();
    if (pos >= s.size()) fail("unexpected end");
    if (eat('(')) {
      Poly r = expr();
      if (!eat(')')) fail("expected ')'");
      return r;
    }
    if (eat('-')) return -base();
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos;
      while (pos < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
              s[pos] == 'e' || s[pos] == 'E' ||
              ((s[pos] == '+' || s[pos] == '-') && (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
        ++pos;
      return Poly(std::stod(s.substr(start, pos - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      std::string name = s.substr(start, pos - start);
      for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return Poly::var(static_cast<int>(i));
      auto it = params.find(name);
      if (it != params.end()) return Poly(it->second);
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character");
  }
};

}  // namespace

Poly Poly::parse(const std::string& text, std::span<const std::string> var_names,
                 const std::map<std::string, double>& params) {
  Parser p{text, 0, var_names, params};
  Poly r = p.expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return r;
}

// ---------------------------------------------------------------------------

DensePoly2 DensePoly2::from(const Poly& p, int var_u, int var_v) {
  DensePoly2 d;
  d.d1 = p.degree_in(var_u);
  d.d2 = p.degree_in(var_v);
  d.c.assign(static_cast<size_t>(d.d1 + 1) * (d.d2 + 1), 0.0);
  for (const auto& [e, coeff] : p.terms()) {
    for (int i = 0; i < Poly::kMaxVars; ++i)
      if (i != var_u && i != var_v && e[i] != 0)
        throw PreconditionError("DensePoly2: polynomial has extra variables");
    d.c[e[var_u] + static_cast<size_t>(d.d1 + 1) * e[var_v]] += coeff;
  }
  return d;
}

double DensePoly2::eval(double u, double v) const {
  double s = 0;
  for (int j = d2; j >= 0; --j) {
    double row = 0;
    for (int i = d1; i >= 0; --i) row = row * u + c[i + static_cast<size_t>(d1 + 1) * j];
    s = s * v + row;
  }
  return s;
}

void DensePoly2::coeffs_in_u(double v, std::span<double> out) const {
  for (int i = 0; i <= d1; ++i) {
    double s = 0;
    for (int j = d2; j >= 0; --j) s = s * v + c[i + static_cast<size_t>(d1 + 1) * j];
    out[i] = s;
  }
}

}  // namespace oscint
