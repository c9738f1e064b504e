#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracsos/errors.hpp"

namespace fracsos {

/// Exponent vector alpha of the monomial x^alpha.
class MultiIndex {
 public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
      if (e < 0) throw ValidationError("multi-index exponents must be nonnegative");
    }
  }

  MultiIndex(std::initializer_list<int> exponents)
      : MultiIndex(std::vector<int>(exponents)) {}

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

  static MultiIndex unit(int n, int k) {
    std::vector<int> e(n, 0);
    e.at(k) = 1;
    return MultiIndex(std::move(e));
  }

  int size() const { return static_cast<int>(exps_.size()); }
  int degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }
  int operator[](int k) const { return exps_[k]; }
  const std::vector<int>& exponents() const { return exps_; }

  MultiIndex operator+(const MultiIndex& other) const {
    if (other.size() != size()) throw ValidationError("multi-index length mismatch");
    std::vector<int> e(exps_);
    for (int k = 0; k < size(); ++k) e[k] += other.exps_[k];
    return MultiIndex(std::move(e));
  }

  bool operator==(const MultiIndex&) const = default;

  std::string to_string() const {
    std::ostringstream os;
    os << '(';
    for (int k = 0; k < size(); ++k) os << (k ? "," : "") << exps_[k];
    os << ')';
    return os.str();
  }

 private:
  std::vector<int> exps_;
};

/// Graded lexicographic order: lower total degree first; inside a degree
/// x1 dominates x2 dominates ... so x1^2 < x1*x2 < x2^2.
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    const int da = a.degree();
    const int db = b.degree();
    if (da != db) return da < db;
    return a.exponents() > b.exponents();
  }
};

inline double monomial_value(const MultiIndex& alpha, std::span<const double> x) {
  double v = 1.0;
  for (int k = 0; k < alpha.size(); ++k) {
    for (int e = 0; e < alpha[k]; ++e) v *= x[k];
  }
  return v;
}

/// Real polynomial stored as a sparse multi-index -> coefficient map.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLex>;

  explicit Polynomial(int n = 1) : n_(n) {
    if (n < 1) throw ValidationError("polynomial dimension must be >= 1");
  }

  static Polynomial constant(int n, double c) {
    Polynomial p(n);
    p.add_term(MultiIndex::zero(n), c);
    return p;
  }

  static Polynomial variable(int n, int k) {
    if (k < 0 || k >= n) throw ValidationError("variable index out of range");
    Polynomial p(n);
    p.add_term(MultiIndex::unit(n, k), 1.0);
    return p;
  }

  static Polynomial monomial(const MultiIndex& alpha, double coef = 1.0) {
    Polynomial p(alpha.size());
    p.add_term(alpha, coef);
    return p;
  }

  int num_vars() const { return n_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.degree());
    return d;
  }

  double coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
  }

  void add_term(const MultiIndex& alpha, double coef) {
    if (alpha.size() != n_) {
      throw ValidationError("monomial " + alpha.to_string() + " has wrong length for n=" +
                            std::to_string(n_));
    }
    if (coef == 0.0) return;
    auto [it, inserted] = terms_.emplace(alpha, coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same_ring(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_same_ring(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, -c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [alpha, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same_ring(b);
    Polynomial r(a.n_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) r.add_term(ea + eb, ca * cb);
    }
    return r;
  }

  /// Unchecked evaluation; use eval_poly for the dimension-checked form.
  double operator()(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& [alpha, c] : terms_) v += c * monomial_value(alpha, x);
    return v;
  }

  /// Partial derivative with respect to x_k.
  Polynomial derivative(int k) const {
    if (k < 0 || k >= n_) throw ValidationError("derivative index out of range");
    Polynomial r(n_);
    for (const auto& [alpha, c] : terms_) {
      if (alpha[k] == 0) continue;
      std::vector<int> e = alpha.exponents();
      const int power = e[k]--;
      r.add_term(MultiIndex(std::move(e)), c * power);
    }
    return r;
  }

  /// Re-embeds the polynomial into a ring with more variables; the old
  /// variables map to indices [offset, offset + n).
  Polynomial embed(int new_n, int offset = 0) const {
    if (offset < 0 || offset + n_ > new_n) throw ValidationError("embedding out of range");
    Polynomial r(new_n);
    for (const auto& [alpha, c] : terms_) {
      std::vector<int> e(new_n, 0);
      for (int k = 0; k < n_; ++k) e[offset + k] = alpha[k];
      r.add_term(MultiIndex(std::move(e)), c);
    }
    return r;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [alpha, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  bool operator==(const Polynomial& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [alpha, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << '-';
      first = false;
      const double a = std::abs(c);
      const bool is_const = alpha.degree() == 0;
      if (a != 1.0 || is_const) os << a;
      for (int k = 0; k < n_; ++k) {
        if (alpha[k] == 0) continue;
        os << (a != 1.0 || is_const ? "*" : "") << 'x' << (k + 1);
        if (alpha[k] > 1) os << '^' << alpha[k];
      }
    }
    return os.str();
  }

 private:
  void check_same_ring(const Polynomial& o) const {
    if (o.n_ != n_) throw ValidationError("polynomials live in different dimensions");
  }

  int n_;
  TermMap terms_;
};

inline double eval_poly(const Polynomial& f, std::span<const double> x) {
  if (static_cast<int>(x.size()) != f.num_vars()) {
    throw ValidationError("point has dimension " + std::to_string(x.size()) +
                          ", polynomial expects " + std::to_string(f.num_vars()));
  }
  return f(x);
}

using PolynomialMatrix = std::vector<std::vector<Polynomial>>;

/// Symbolic Hessian; symmetric by construction.
inline PolynomialMatrix hessian(const Polynomial& f) {
  const int n = f.num_vars();
  PolynomialMatrix h(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (int i = 0; i < n; ++i) {
    const Polynomial di = f.derivative(i);
    for (int j = i; j < n; ++j) {
      h[i][j] = di.derivative(j);
      if (j != i) h[j][i] = h[i][j];
    }
  }
  return h;
}

}  // namespace fracsos
