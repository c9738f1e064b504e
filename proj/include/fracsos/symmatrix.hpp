#pragma once

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "fracsos/errors.hpp"

namespace fracsos {

/// Dense real symmetric matrix. Writes go through set() so both triangles
/// always agree exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim) : m_(Eigen::MatrixXd::Zero(dim, dim)) {}

  /// Rejects any matrix that is not exactly symmetric.
  static SymMatrix from_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ValidationError("matrix not square");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
        if (m(i, j) != m(j, i)) throw ValidationError("matrix not symmetric");
      }
    }
    SymMatrix s;
    s.m_ = m;
    return s;
  }

  static SymMatrix symmetrized(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ValidationError("matrix not square");
    SymMatrix s;
    s.m_ = 0.5 * (m + m.transpose());
    return s;
  }

  static SymMatrix identity(int dim) {
    SymMatrix s(dim);
    s.m_.setIdentity();
    return s;
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  void add(int i, int j, double v) {
    m_(i, j) += v;
    if (i != j) m_(j, i) += v;
  }

  const Eigen::MatrixXd& dense() const { return m_; }

  double min_eigenvalue() const {
    if (dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  Eigen::VectorXd eigenvalues() const {
    if (dim() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    m_ += o.m_;
    return *this;
  }

  SymMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  Eigen::MatrixXd m_;
};

/// Frobenius inner product <A, B> = tr(AB).
inline double inner(const SymMatrix& a, const SymMatrix& b) {
  return a.dense().cwiseProduct(b.dense()).sum();
}

inline int svec_size(int dim) { return dim * (dim + 1) / 2; }

/// Position of entry (i, j), i <= j, inside svec: upper triangle, row by row.
inline int svec_index(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  return i * dim - i * (i - 1) / 2 + (j - i);
}

/// Inverse of svec_size; -1 if len is not a triangular number.
inline int svec_dim(int len) {
  const int t = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  return svec_size(t) == len ? t : -1;
}

/// Symmetric vectorization with off-diagonals scaled by sqrt(2), so that
/// svec(A).dot(svec(B)) == <A, B>.
inline Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int t = static_cast<int>(m.rows());
  Eigen::VectorXd v(svec_size(t));
  int k = 0;
  for (int i = 0; i < t; ++i) {
    v(k++) = m(i, i);
    for (int j = i + 1; j < t; ++j) v(k++) = M_SQRT2 * m(i, j);
  }
  return v;
}

inline Eigen::VectorXd svec(const SymMatrix& m) { return svec(m.dense()); }

inline Eigen::MatrixXd smat_dense(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int t = svec_dim(static_cast<int>(v.size()));
  if (t < 0) {
    throw ValidationError("svec length " + std::to_string(v.size()) +
                          " is not a triangular number");
  }
  Eigen::MatrixXd m(t, t);
  int k = 0;
  for (int i = 0; i < t; ++i) {
    m(i, i) = v(k++);
    for (int j = i + 1; j < t; ++j) {
      m(i, j) = m(j, i) = v(k++) / M_SQRT2;  // closer inverse of the svec scaling than * M_SQRT1_2
    }
  }
  return m;
}

inline SymMatrix smat(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return SymMatrix::from_dense(smat_dense(v));
}

}  // namespace fracsos
