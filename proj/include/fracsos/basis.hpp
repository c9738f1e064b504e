#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fracsos/polynomial.hpp"
#include "fracsos/symmatrix.hpp"

namespace fracsos {

/// All multi-indices of length n and degree <= d, in graded-lex order.
inline std::vector<MultiIndex> graded_monomials(int n, int d) {
  if (n < 1) throw ValidationError("dimension n must be >= 1");
  if (d < 0) throw ValidationError("degree d must be >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> e(n, 0);
  // Lex-descending compositions of `deg` into n parts.
  auto rec = [&](auto&& self, int k, int remaining) -> void {
    if (k == n - 1) {
      e[k] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      e[k] = v;
      self(self, k + 1, remaining - v);
    }
  };
  for (int deg = 0; deg <= d; ++deg) rec(rec, 0, deg);
  return out;
}

inline long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Canonical basis v_d(x) of polynomials of degree <= d.
class MonomialBasis {
 public:
  MonomialBasis(int n, int d) : n_(n), d_(d), order_(graded_monomials(n, d)) {
    for (int i = 0; i < size(); ++i) index_.emplace(order_[i], i);
  }

  int num_vars() const { return n_; }
  int half_degree() const { return d_; }
  int size() const { return static_cast<int>(order_.size()); }
  const std::vector<MultiIndex>& order() const { return order_; }
  const MultiIndex& operator[](int i) const { return order_[i]; }

  std::optional<int> index_of(const MultiIndex& alpha) const {
    auto it = index_.find(alpha);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Eigen::VectorXd evaluate(std::span<const double> x) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v(i) = monomial_value(order_[i], x);
    return v;
  }

 private:
  int n_;
  int d_;
  std::vector<MultiIndex> order_;
  std::map<MultiIndex, int, GradedLex> index_;
};

inline MonomialBasis monomial_basis(int n, int d) { return MonomialBasis(n, d); }

/// Matrices B_alpha with v(x) v(x)^T = sum_alpha x^alpha B_alpha for an
/// arbitrary list of monomials v (the canonical basis or a reduced one).
class BasisMatrixTable {
 public:
  using Entry = std::pair<int, int>;  // (i, j) with i <= j

  explicit BasisMatrixTable(std::vector<MultiIndex> basis) : basis_(std::move(basis)) {
    if (basis_.empty()) throw ValidationError("empty monomial basis");
    const int n = basis_.front().size();
    for (const auto& b : basis_) {
      if (b.size() != n) throw ValidationError("basis monomials differ in length");
    }
    const int s = static_cast<int>(basis_.size());
    for (int i = 0; i < s; ++i) {
      for (int j = i; j < s; ++j) entries_[basis_[i] + basis_[j]].emplace_back(i, j);
    }
    for (const auto& [alpha, e] : entries_) support_.push_back(alpha);
  }

  int num_vars() const { return basis_.front().size(); }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<MultiIndex>& basis() const { return basis_; }

  /// Distinct alpha = b_i + b_j, graded-lex sorted.
  const std::vector<MultiIndex>& support() const { return support_; }

  bool contains(const MultiIndex& alpha) const { return entries_.count(alpha) != 0; }

  /// Upper-triangle positions where B_alpha has a one; empty if alpha is not covered.
  const std::vector<Entry>& entries(const MultiIndex& alpha) const {
    static const std::vector<Entry> kNone;
    auto it = entries_.find(alpha);
    return it == entries_.end() ? kNone : it->second;
  }

  SymMatrix matrix(const MultiIndex& alpha) const {
    SymMatrix b(dim());
    for (auto [i, j] : entries(alpha)) b.set(i, j, 1.0);
    return b;
  }

  SymMatrix operator[](const MultiIndex& alpha) const { return matrix(alpha); }

  /// svec(B_alpha), the coefficient row of <B_alpha, X> in svec coordinates.
  Eigen::VectorXd svec_row(const MultiIndex& alpha) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(svec_size(dim()));
    for (auto [i, j] : entries(alpha)) r(svec_index(i, j, dim())) = (i == j) ? 1.0 : M_SQRT2;
    return r;
  }

  /// sum_alpha w(alpha) B_alpha for any weight lookup.
  template <typename Weight>
  SymMatrix combine(Weight&& w) const {
    SymMatrix m(dim());
    for (const auto& [alpha, e] : entries_) {
      const double v = w(alpha);
      if (v == 0.0) continue;
      for (auto [i, j] : e) m.set(i, j, v);
    }
    return m;
  }

 private:
  std::vector<MultiIndex> basis_;
  std::map<MultiIndex, std::vector<Entry>, GradedLex> entries_;
  std::vector<MultiIndex> support_;
};

inline BasisMatrixTable basis_matrices(int n, int d) {
  return BasisMatrixTable(graded_monomials(n, d));
}

}  // namespace fracsos
