#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fracsos/basis.hpp"

namespace fracsos {

/// Moment vector y = (y_alpha) over a support set of multi-indices.
/// The canonical case is the full support N^n_{2d}; a reduced relaxation
/// carries a smaller support together with its reduced half-degree basis.
class MomentVector {
 public:
  MomentVector(int d, std::vector<MultiIndex> support, std::vector<double> values)
      : d_(d), support_(std::move(support)), values_(std::move(values)) {
    if (support_.empty()) throw ValidationError("moment vector needs a nonempty support");
    if (support_.size() != values_.size()) {
      throw ValidationError("moment vector: support and values differ in length");
    }
    n_ = support_.front().size();
    for (int k = 0; k < static_cast<int>(support_.size()); ++k) {
      if (support_[k].size() != n_) throw ValidationError("moment support lengths differ");
      if (support_[k].degree() > 2 * d_) {
        throw ValidationError("moment index " + support_[k].to_string() + " exceeds degree 2d");
      }
      if (!index_.emplace(support_[k], k).second) {
        throw ValidationError("duplicate moment index " + support_[k].to_string());
      }
    }
  }

  /// Values listed in graded-lex order over N^n_{2d}; all s(2d) entries required.
  static MomentVector full(int n, int d, std::vector<double> values) {
    auto support = graded_monomials(n, 2 * d);
    if (values.size() != support.size()) {
      throw ValidationError("incomplete moment vector: expected " +
                            std::to_string(support.size()) + " entries, got " +
                            std::to_string(values.size()));
    }
    return MomentVector(d, std::move(support), std::move(values));
  }

  /// y_alpha = weight * x^alpha over N^n_{2d}.
  static MomentVector point_mass(int d, std::span<const double> x, double weight = 1.0) {
    const int n = static_cast<int>(x.size());
    auto support = graded_monomials(n, 2 * d);
    std::vector<double> values;
    values.reserve(support.size());
    for (const auto& a : support) values.push_back(weight * monomial_value(a, x));
    return MomentVector(d, std::move(support), std::move(values));
  }

  int num_vars() const { return n_; }
  int half_degree() const { return d_; }
  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<MultiIndex>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }

  bool contains(const MultiIndex& alpha) const { return index_.count(alpha) != 0; }

  double operator[](const MultiIndex& alpha) const {
    auto it = index_.find(alpha);
    if (it == index_.end()) {
      throw ValidationError("moment vector has no entry for " + alpha.to_string());
    }
    return values_[it->second];
  }

  double y0() const { return (*this)[MultiIndex::zero(n_)]; }

  /// (L_y(x_1), ..., L_y(x_n)).
  std::vector<double> first_moments() const {
    std::vector<double> m(n_);
    for (int k = 0; k < n_; ++k) m[k] = (*this)[MultiIndex::unit(n_, k)];
    return m;
  }

 private:
  int n_ = 0;
  int d_;
  std::vector<MultiIndex> support_;
  std::vector<double> values_;
  std::map<MultiIndex, int, GradedLex> index_;
};

/// M(y) = sum_alpha y_alpha B_alpha over the given (possibly reduced) basis.
inline SymMatrix moment_matrix(const MomentVector& y, const BasisMatrixTable& table) {
  for (const auto& alpha : table.support()) {
    if (!y.contains(alpha)) {
      throw ValidationError("incomplete moment vector: missing " + alpha.to_string());
    }
  }
  return table.combine([&](const MultiIndex& a) { return y[a]; });
}

/// M_d(y) over the canonical basis v_d.
inline SymMatrix moment_matrix(const MomentVector& y) {
  return moment_matrix(y, basis_matrices(y.num_vars(), y.half_degree()));
}

/// L_y(f) = sum_alpha f_alpha y_alpha.
inline double apply_Ly(const MomentVector& y, const Polynomial& f) {
  if (f.num_vars() != y.num_vars()) throw ValidationError("L_y: dimension mismatch");
  if (f.degree() > 2 * y.half_degree()) {
    throw ValidationError("L_y: polynomial degree " + std::to_string(f.degree()) +
                          " exceeds 2d = " + std::to_string(2 * y.half_degree()));
  }
  double v = 0.0;
  for (const auto& [alpha, c] : f.terms()) v += c * y[alpha];
  return v;
}

}  // namespace fracsos
