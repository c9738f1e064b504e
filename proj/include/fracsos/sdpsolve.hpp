#pragma once

// Primal-dual interior-point solver for
//
//   min c^T x  s.t.  A x = b,  x in R^f x R^l_+ x S^{k_1}_+ x ... x S^{k_q}_+
//
// based on the homogeneous self-dual embedding with Nesterov-Todd scaling
// and Mehrotra predictor-corrector steps. Free variables stay free. Each
// Newton system is solved through the augmented form in NT-scaled
// coordinates (dx~ = W^{-T} dx_c, A~ = A_c W^T),
//
//   [ -I    0    A~^T  ] [dx~ ]
//   [  0    0    A_f^T ] [dx_f] = rhs,
//   [  A~   A_f  0     ] [dy  ]
//
// which avoids forming A_c W^T W A_c^T and keeps its condition number
// unsquared, followed by iterative refinement against the unreduced Newton
// equations. Maximization problems are solved as min of -c^T x; the returned
// dual (y, s) always refers to that minimization form.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracsos/conic.hpp"

namespace fracsos {

struct SolveOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iter = 200;
  int verbosity = 0;

  void validate() const {
    if (!(tol_gap > 0.0) || !(tol_feas > 0.0)) {
      throw ValidationError("solver tolerances must be positive");
    }
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  }
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter, numerical_failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

struct Residuals {
  double primal_feas = 0.0;  // ||A x - b|| / (1 + ||b||)
  double dual_feas = 0.0;    // ||A^T y + s - c_min|| / (1 + ||c||)
  double gap = 0.0;          // |c_min^T x - b^T y| / (1 + |c_min^T x| + |b^T y|)
};

/// status == infeasible: (dual, dual_slack) is a unit-norm ray with
/// A^T y + s ~ 0, s in K*, b^T y = certificate_margin > 0.
/// status == unbounded: primal is a unit-norm ray with A x ~ 0, x in K,
/// c_min^T x = -certificate_margin < 0.
struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;
  Eigen::VectorXd dual_slack;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  double certificate_margin = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::optimal; }
};

/// Objective vector of the minimization form.
inline Eigen::VectorXd min_form_objective(const ConicProgram& cp) {
  return cp.sense == Sense::minimize ? Eigen::VectorXd(cp.c) : Eigen::VectorXd(-cp.c);
}

/// Residuals of a candidate (x, y, s), exactly as reported by solve().
inline Residuals compute_residuals(const ConicProgram& cp, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
  const Eigen::VectorXd c = min_form_objective(cp);
  Residuals r;
  r.primal_feas = (cp.A * x - cp.b).norm() / (1.0 + cp.b.norm());
  r.dual_feas = (cp.A.transpose() * y + s - c).norm() / (1.0 + c.norm());
  const double p = c.dot(x);
  const double d = cp.b.dot(y);
  r.gap = std::abs(p - d) / (1.0 + std::abs(p) + std::abs(d));
  return r;
}

namespace detail {

struct PsdScaling {
  int offset = 0;  // into the full variable vector
  int dim = 0;
  Eigen::MatrixXd R;     // R^{-1} X R^{-T} = R^T S R = diag(lambda)
  Eigen::MatrixXd Rinv;  // equals R^{-1}; computed without inversion
  Eigen::VectorXd lambda;
};

class HsdSolver {
 public:
  HsdSolver(const ConicProgram& cp, const SolveOptions& opt) : cp_(cp), opt_(opt) {
    cp.check_well_formed();
    opt.validate();
    A_ = cp.A;
    b_ = cp.b;
    c_ = min_form_objective(cp);
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
    nf_ = cp.cones.num_free;
    nl_ = cp.cones.num_nonneg;
    int off = nf_ + nl_;
    for (int k : cp.cones.psd_dims) {
      psd_.push_back({off, k, {}, {}, {}});
      off += svec_size(k);
    }
    nc_ = n_ - nf_;
    degree_ = cp.cones.degree();
  }

  ConicSolution run() {
    init_point();
    ConicSolution sol;
    int stalls = 0;
    for (int iter = 0;; ++iter) {
      sol.iterations = iter;
      const Eigen::VectorXd rp = A_ * x_ - b_ * tau_;
      const Eigen::VectorXd rd = A_.transpose() * y_ + s_ - c_ * tau_;
      const double rg = b_.dot(y_) - c_.dot(x_) - kappa_;

      if (!x_.allFinite() || !y_.allFinite() || !s_.allFinite() || !std::isfinite(tau_)) {
        return finish(sol, SolveStatus::numerical_failure);
      }
      const Residuals res = compute_residuals(cp_, x_ / tau_, y_ / tau_, s_ / tau_);
      if (opt_.verbosity > 0) {
        std::fprintf(stderr, "%3d pobj %+.9e dobj %+.9e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n",
                     iter, c_.dot(x_) / tau_, b_.dot(y_) / tau_, res.primal_feas, res.dual_feas,
                     res.gap, tau_, kappa_);
      }
      if (res.primal_feas <= opt_.tol_feas && res.dual_feas <= opt_.tol_feas &&
          res.gap <= opt_.tol_gap) {
        return finish(sol, SolveStatus::optimal);
      }
      if (detect_infeasibility(sol)) return sol;
      if (iter >= opt_.max_iter) return finish(sol, SolveStatus::max_iter);

      if (!compute_scaling()) return finish(sol, SolveStatus::numerical_failure);
      if (!factor()) return finish(sol, SolveStatus::numerical_failure);

      const double mu = (x_.tail(nc_).dot(s_.tail(nc_)) + tau_ * kappa_) / (degree_ + 1.0);
      const Eigen::VectorXd lam = lambda_vec();

      // Predictor.
      const Direction aff = solve_newton({-rp, -rd, -rg, -lam, -tau_ * kappa_});
      const double alpha_aff = std::min(1.0, max_step(aff));
      const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

      // Corrector.
      const double eta = 1.0 - sigma;
      const Eigen::VectorXd corr = jordan(scale_x(aff.dx), scale_s(aff.ds));
      const Eigen::VectorXd target = sigma * mu * identity_vec() - jordan(lam, lam) - corr;
      const double xi_tau = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
      const Direction dir =
          solve_newton({-eta * rp, -eta * rd, -eta * rg, jordan_div(lam, target), xi_tau});
      const double alpha = std::min(1.0, 0.99 * max_step(dir));
      if (!(alpha > 1e-12)) {
        if (++stalls >= 3) return finish(sol, SolveStatus::numerical_failure);
      } else {
        stalls = 0;
      }
      x_ += alpha * dir.dx;
      y_ += alpha * dir.dy;
      s_ += alpha * dir.ds;
      tau_ += alpha * dir.dtau;
      kappa_ += alpha * dir.dkappa;
    }
  }

 private:
  struct Direction {
    Eigen::VectorXd dx, dy, ds;
    double dtau = 0.0, dkappa = 0.0;
  };

  void init_point() {
    x_ = Eigen::VectorXd::Zero(n_);
    s_ = Eigen::VectorXd::Zero(n_);
    x_.segment(nf_, nl_).setOnes();
    s_.segment(nf_, nl_).setOnes();
    for (const auto& p : psd_) {
      const Eigen::VectorXd e = svec(Eigen::MatrixXd::Identity(p.dim, p.dim));
      x_.segment(p.offset, e.size()) = e;
      s_.segment(p.offset, e.size()) = e;
    }
    y_ = Eigen::VectorXd::Zero(m_);
    tau_ = 1.0;
    kappa_ = 1.0;
  }

  ConicSolution& finish(ConicSolution& sol, SolveStatus status) {
    sol.status = status;
    sol.primal = x_ / tau_;
    sol.dual = y_ / tau_;
    sol.dual_slack = s_ / tau_;
    sol.residuals = compute_residuals(cp_, sol.primal, sol.dual, sol.dual_slack);
    const double sign = cp_.sense == Sense::minimize ? 1.0 : -1.0;
    sol.primal_objective = cp_.c.dot(sol.primal);
    sol.dual_objective = sign * b_.dot(sol.dual);
    return sol;
  }

  bool detect_infeasibility(ConicSolution& sol) {
    const double by = b_.dot(y_);
    if (by > 0.0) {
      const double r = (A_.transpose() * y_ + s_).norm();
      const double scale = std::sqrt(y_.squaredNorm() + s_.squaredNorm());
      const double margin = by / scale;
      if (r / by <= opt_.tol_feas && margin > opt_.tol_feas) {
        finish(sol, SolveStatus::infeasible);
        sol.dual = y_ / scale;
        sol.dual_slack = s_ / scale;
        sol.certificate_margin = margin;
        return true;
      }
    }
    const double cx = c_.dot(x_);
    if (cx < 0.0) {
      const double r = (A_ * x_).norm();
      const double scale = x_.norm();
      const double margin = -cx / scale;
      if (r / -cx <= opt_.tol_feas && margin > opt_.tol_feas) {
        finish(sol, SolveStatus::unbounded);
        sol.primal = x_ / scale;
        sol.certificate_margin = margin;
        return true;
      }
    }
    return false;
  }

  bool compute_scaling() {
    xs_ratio_ = x_.segment(nf_, nl_).cwiseQuotient(s_.segment(nf_, nl_));
    lam_l_ = x_.segment(nf_, nl_).cwiseProduct(s_.segment(nf_, nl_)).cwiseSqrt();
    if (nl_ > 0 && (!(x_.segment(nf_, nl_).minCoeff() > 0.0) ||
                    !(s_.segment(nf_, nl_).minCoeff() > 0.0))) {
      return false;
    }
    for (auto& p : psd_) {
      const int len = svec_size(p.dim);
      const Eigen::MatrixXd X = smat_dense(x_.segment(p.offset, len));
      const Eigen::MatrixXd S = smat_dense(s_.segment(p.offset, len));
      Eigen::LLT<Eigen::MatrixXd> lx(X), ls(S);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
      const Eigen::MatrixXd Lx = lx.matrixL();
      const Eigen::MatrixXd Ls = ls.matrixL();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ls.transpose() * Lx,
                                            Eigen::ComputeFullU | Eigen::ComputeFullV);
      p.lambda = svd.singularValues();
      if (!(p.lambda.minCoeff() > 0.0)) return false;
      const Eigen::VectorXd isq = p.lambda.cwiseSqrt().cwiseInverse();
      p.R = Lx * svd.matrixV() * isq.asDiagonal();
      p.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
    }
    return true;
  }

  /// W^T applied to a scaled vector.
  Eigen::VectorXd apply_Wt(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = xs_ratio_.cwiseSqrt().cwiseProduct(v.head(nl_));
    for (const auto& p : psd_) {
      const int o = p.offset - nf_, len = svec_size(p.dim);
      out.segment(o, len) = svec(p.R * smat_dense(v.segment(o, len)) * p.R.transpose());
    }
    return out;
  }

  /// W^{-T} dx (cone part of a full-length vector).
  Eigen::VectorXd scale_x(const Eigen::VectorXd& dx) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = dx.segment(nf_, nl_).cwiseQuotient(xs_ratio_.cwiseSqrt());
    for (const auto& p : psd_) {
      const int len = svec_size(p.dim);
      out.segment(p.offset - nf_, len) =
          svec(p.Rinv * smat_dense(dx.segment(p.offset, len)) * p.Rinv.transpose());
    }
    return out;
  }

  /// W ds (cone part of a full-length vector).
  Eigen::VectorXd scale_s(const Eigen::VectorXd& ds) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = ds.segment(nf_, nl_).cwiseProduct(xs_ratio_.cwiseSqrt());
    for (const auto& p : psd_) {
      const int len = svec_size(p.dim);
      out.segment(p.offset - nf_, len) =
          svec(p.R.transpose() * smat_dense(ds.segment(p.offset, len)) * p.R);
    }
    return out;
  }

  Eigen::VectorXd lambda_vec() const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = lam_l_;
    for (const auto& p : psd_) {
      out.segment(p.offset - nf_, svec_size(p.dim)) = svec(Eigen::MatrixXd(p.lambda.asDiagonal()));
    }
    return out;
  }

  Eigen::VectorXd identity_vec() const {
    Eigen::VectorXd out(nc_);
    out.head(nl_).setOnes();
    for (const auto& p : psd_) {
      out.segment(p.offset - nf_, svec_size(p.dim)) =
          svec(Eigen::MatrixXd::Identity(p.dim, p.dim));
    }
    return out;
  }

  /// Jordan product u o v; (UV + VU)/2 on PSD blocks.
  Eigen::VectorXd jordan(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = u.head(nl_).cwiseProduct(v.head(nl_));
    for (const auto& p : psd_) {
      const int o = p.offset - nf_, len = svec_size(p.dim);
      const Eigen::MatrixXd U = smat_dense(u.segment(o, len));
      const Eigen::MatrixXd V = smat_dense(v.segment(o, len));
      out.segment(o, len) = svec(0.5 * (U * V + V * U));
    }
    return out;
  }

  /// Solves lambda o u = v for u, with lambda diagonal on PSD blocks.
  Eigen::VectorXd jordan_div(const Eigen::VectorXd& lam, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(nc_);
    out.head(nl_) = v.head(nl_).cwiseQuotient(lam.head(nl_));
    for (const auto& p : psd_) {
      const int o = p.offset - nf_, len = svec_size(p.dim);
      Eigen::MatrixXd V = smat_dense(v.segment(o, len));
      for (int i = 0; i < p.dim; ++i) {
        for (int j = 0; j < p.dim; ++j) V(i, j) *= 2.0 / (p.lambda(i) + p.lambda(j));
      }
      out.segment(o, len) = svec(V);
    }
    return out;
  }

  /// Largest alpha with lambda + alpha * d in the cone (scaled space).
  double max_step_scaled(const Eigen::VectorXd& d) const {
    double a = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nl_; ++k) {
      if (d(k) < 0.0) a = std::min(a, -lam_l_(k) / d(k));
    }
    for (const auto& p : psd_) {
      const int o = p.offset - nf_, len = svec_size(p.dim);
      const Eigen::VectorXd isq = p.lambda.cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd D = isq.asDiagonal() * smat_dense(d.segment(o, len)) * isq.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
      const double mn = es.eigenvalues()(0);
      if (mn < 0.0) a = std::min(a, -1.0 / mn);
    }
    return a;
  }

  double max_step(const Direction& dir) const {
    double a = std::min(max_step_scaled(scale_x(dir.dx)), max_step_scaled(scale_s(dir.ds)));
    if (dir.dtau < 0.0) a = std::min(a, -tau_ / dir.dtau);
    if (dir.dkappa < 0.0) a = std::min(a, -kappa_ / dir.dkappa);
    return a;
  }

  /// Right-hand side of the Newton system
  ///   A dx - b dtau = r1,   A^T dy + ds - c dtau = r2,   b^T dy - c^T dx - dkappa = r3,
  ///   W^{-T} dx_c + W ds_c = r4 (scaled space),   kappa dtau + tau dkappa = r5.
  struct NewtonRhs {
    Eigen::VectorXd r1, r2;
    double r3 = 0.0;
    Eigen::VectorXd r4;
    double r5 = 0.0;
  };

  /// Assembles and factors the augmented matrix for the current scaling and
  /// solves the dtau column once.
  bool factor() {
    const int dim = nc_ + nf_ + m_;
    At_ = Eigen::MatrixXd::Zero(m_, nc_);
    for (int i = 0; i < m_; ++i) {
      const Eigen::VectorXd row = A_.row(i).transpose();
      if (row.tail(nc_).isZero(0.0)) continue;
      At_.row(i) = scale_s(row).transpose();
    }
    K_ = Eigen::MatrixXd::Zero(dim, dim);
    K_.topLeftCorner(nc_, nc_).diagonal().setConstant(-1.0);
    K_.block(0, nc_ + nf_, nc_, m_) = At_.transpose();
    K_.block(nc_, nc_ + nf_, nf_, m_) = A_.leftCols(nf_).transpose();
    K_.block(nc_ + nf_, 0, m_, nc_) = At_;
    K_.block(nc_ + nf_, nc_, m_, nf_) = A_.leftCols(nf_);
    if (!K_.allFinite()) return false;
    if (dim == 0) return true;
    // Quasi-definite regularization; refinement removes its effect.
    const double reg = 1e-13 * std::max(1.0, K_.cwiseAbs().maxCoeff());
    Eigen::MatrixXd Kreg = K_;
    Kreg.block(nc_, nc_, nf_, nf_).diagonal().array() -= reg;
    Kreg.bottomRightCorner(m_, m_).diagonal().array() += reg;
    lu_.compute(Kreg);

    ct_ = scale_s(c_);
    Eigen::VectorXd rhs(dim);
    rhs << ct_, c_.head(nf_), b_;
    u1_ = solve_aug(rhs);
    return u1_.allFinite();
  }

  Eigen::VectorXd solve_aug(const Eigen::VectorXd& rhs) const {
    if (rhs.size() == 0) return rhs;
    Eigen::VectorXd z = lu_.solve(rhs);
    for (int k = 0; k < 2; ++k) z += lu_.solve(rhs - K_ * z);
    return z;
  }

  Direction solve_once(const NewtonRhs& r) const {
    Eigen::VectorXd rhs(nc_ + nf_ + m_);
    rhs << scale_s(r.r2) - r.r4, r.r2.head(nf_), r.r1;
    const Eigen::VectorXd u0 = solve_aug(rhs);
    auto dot_tau = [&](const Eigen::VectorXd& u) {
      return b_.dot(u.tail(m_)) - c_.head(nf_).dot(u.segment(nc_, nf_)) - ct_.dot(u.head(nc_));
    };
    Direction d;
    d.dtau = (r.r3 + r.r5 / tau_ - dot_tau(u0)) / (dot_tau(u1_) + kappa_ / tau_);
    const Eigen::VectorXd u = u0 + d.dtau * u1_;
    d.dy = u.tail(m_);
    d.dx.resize(n_);
    d.dx.head(nf_) = u.segment(nc_, nf_);
    d.dx.tail(nc_) = apply_Wt(u.head(nc_));
    d.ds = Eigen::VectorXd::Zero(n_);
    d.ds.tail(nc_) = r.r2.tail(nc_) + c_.tail(nc_) * d.dtau - A_.rightCols(nc_).transpose() * d.dy;
    d.dkappa = (r.r5 - kappa_ * d.dtau) / tau_;
    return d;
  }

  NewtonRhs newton_residual(const Direction& d, const NewtonRhs& r) const {
    NewtonRhs e;
    e.r1 = r.r1 - (A_ * d.dx - b_ * d.dtau);
    e.r2 = r.r2 - (A_.transpose() * d.dy + d.ds - c_ * d.dtau);
    e.r3 = r.r3 - (b_.dot(d.dy) - c_.dot(d.dx) - d.dkappa);
    e.r4 = r.r4 - (scale_x(d.dx) + scale_s(d.ds));
    e.r5 = r.r5 - (kappa_ * d.dtau + tau_ * d.dkappa);
    return e;
  }

  static double norm(const NewtonRhs& e) {
    return std::sqrt(e.r1.squaredNorm() + e.r2.squaredNorm() + e.r3 * e.r3 +
                     e.r4.squaredNorm() + e.r5 * e.r5);
  }

  /// Newton direction with iterative refinement on the unreduced equations.
  Direction solve_newton(const NewtonRhs& r) const {
    Direction d = solve_once(r);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const NewtonRhs e = newton_residual(d, r);
      const double err = norm(e);
      if (!(err < 0.5 * prev) || err == 0.0) break;
      prev = err;
      const Direction c = solve_once(e);
      d.dx += c.dx;
      d.dy += c.dy;
      d.ds += c.ds;
      d.dtau += c.dtau;
      d.dkappa += c.dkappa;
    }
    return d;
  }

  const ConicProgram& cp_;
  SolveOptions opt_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, c_;
  int m_ = 0, n_ = 0, nf_ = 0, nl_ = 0, nc_ = 0;
  double degree_ = 0.0;
  std::vector<PsdScaling> psd_;

  Eigen::VectorXd x_, y_, s_;
  double tau_ = 1.0, kappa_ = 1.0;

  Eigen::VectorXd xs_ratio_, lam_l_;
  Eigen::MatrixXd At_, K_;
  Eigen::VectorXd ct_, u1_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace detail

inline ConicSolution solve(const ConicProgram& cp, const SolveOptions& opts = {}) {
  return detail::HsdSolver(cp, opts).run();
}

}  // namespace fracsos
