#pragma once

// Sum-of-squares certification through the Gram feasibility SDP
//
//   find Q >= 0  with  <B_alpha, Q> = f_alpha  for every alpha,
//
// solved as min tr(Q) so the dual side is strictly feasible. A primal
// infeasibility ray (a moment functional L with M(L) >= 0 and L(f) < 0)
// proves f is not SOS. A returned Gram matrix is always verified: it is
// projected onto the PSD cone and must reproduce the coefficients of f.
// This also rescues solves that stall on Gram sets without interior points
// (e.g. f a sum of few squares), where the last iterate is still accurate.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fracsos/basis.hpp"
#include "fracsos/newton.hpp"
#include "fracsos/sdpsolve.hpp"

namespace fracsos {

enum class SosVerdict { sos, not_sos, undetermined };

inline const char* to_string(SosVerdict v) {
  switch (v) {
    case SosVerdict::sos: return "sos";
    case SosVerdict::not_sos: return "not_sos";
    case SosVerdict::undetermined: return "undetermined";
  }
  return "?";
}

struct GramCertificate {
  std::vector<MultiIndex> basis;
  SymMatrix gram;
};

struct SosOptions {
  SolveOptions solver{1e-10, 1e-10, 200, 0};
  double infeasibility_margin = 1e-7;
  /// Accept a Gram matrix if max_alpha |<B_alpha, Q> - f_alpha| <= tol * max(1, max |f_alpha|).
  double reconstruction_tol = 1e-8;
  bool newton_reduction = false;
};

struct SosResult {
  SosVerdict verdict = SosVerdict::undetermined;
  std::optional<GramCertificate> certificate;
  std::optional<SolveStatus> solver_status;
  double certificate_margin = 0.0;
  double reconstruction_error = 0.0;  // of the PSD-projected Gram matrix
  std::string note;

  bool is_sos() const { return verdict == SosVerdict::sos; }
};

/// sum_alpha <B_alpha, Q> x^alpha.
inline Polynomial gram_polynomial(const GramCertificate& cert, int num_vars) {
  Polynomial p(num_vars);
  const int s = static_cast<int>(cert.basis.size());
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) p.add_term(cert.basis[i] + cert.basis[j], cert.gram(i, j));
  }
  return p;
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline SymMatrix project_psd(const SymMatrix& m) {
  if (m.dim() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense());
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return SymMatrix::symmetrized(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

/// Gram feasibility over an explicit monomial basis.
inline SosResult check_sos_with_basis(const Polynomial& f, const std::vector<MultiIndex>& basis,
                                      const SosOptions& opts = {}) {
  SosResult out;
  if (basis.empty()) {
    if (f.is_zero()) {
      out.verdict = SosVerdict::sos;
      out.certificate = GramCertificate{{}, SymMatrix(0)};
    } else {
      out.verdict = SosVerdict::not_sos;
      out.note = "empty basis for a nonzero polynomial";
    }
    return out;
  }
  const BasisMatrixTable table(basis);
  for (const auto& [alpha, c] : f.terms()) {
    if (!table.contains(alpha)) {
      out.verdict = SosVerdict::not_sos;
      out.note = "term " + alpha.to_string() + " lies outside the square of the basis";
      return out;
    }
  }
  const int dim = table.dim();
  ConicBuilder b;
  b.add_psd("Q", dim);
  for (const auto& alpha : table.support()) {
    const int r = b.begin_row("coef" + alpha.to_string(), f.coefficient(alpha));
    b.add_inner(r, "Q", table.matrix(alpha));
  }
  const Eigen::VectorXd trace = svec(SymMatrix::identity(dim));
  for (int k = 0; k < trace.size(); ++k) b.set_objective(b.coord("Q", k), trace(k));
  const ConicProgram cp = b.build();
  const ConicSolution sol = solve(cp, opts.solver);
  out.solver_status = sol.status;
  out.certificate_margin = sol.certificate_margin;
  const bool has_iterate = sol.optimal() || sol.status == SolveStatus::max_iter ||
                           sol.status == SolveStatus::numerical_failure;
  if (has_iterate && sol.primal.allFinite()) {
    const SymMatrix Q = project_psd(cp.layout.unpack_matrix(sol.primal, "Q"));
    double err = 0.0;
    for (const auto& alpha : table.support()) {
      err = std::max(err, std::abs(inner(table.matrix(alpha), Q) - f.coefficient(alpha)));
    }
    out.reconstruction_error = err;
    if (err <= opts.reconstruction_tol * std::max(1.0, f.max_abs_coefficient())) {
      out.verdict = SosVerdict::sos;
      out.certificate = GramCertificate{basis, Q};
      if (!sol.optimal()) {
        out.note = std::string("verified last iterate (solver status ") + to_string(sol.status) + ")";
      }
      return out;
    }
  }
  if (sol.optimal()) {
    out.verdict = SosVerdict::undetermined;
    out.note = "Gram matrix failed verification, error " + std::to_string(out.reconstruction_error);
  } else if (sol.status == SolveStatus::infeasible &&
             sol.certificate_margin > opts.infeasibility_margin) {
    out.verdict = SosVerdict::not_sos;
    out.note = "separating moment functional found";
  } else {
    out.verdict = SosVerdict::undetermined;
    out.note = std::string("solver status ") + to_string(sol.status);
  }
  return out;
}

inline SosResult check_sos(const Polynomial& f, const SosOptions& opts = {}) {
  const int deg = f.degree();
  if (deg % 2 != 0) {
    SosResult out;
    out.verdict = SosVerdict::not_sos;
    out.note = "odd degree";
    return out;
  }
  if (f.is_zero()) return check_sos_with_basis(f, {}, opts);
  std::vector<MultiIndex> basis;
  if (opts.newton_reduction) {
    std::vector<MultiIndex> support;
    for (const auto& [alpha, c] : f.terms()) support.push_back(alpha);
    basis = newton_half_basis(support, deg / 2);
  } else {
    basis = graded_monomials(f.num_vars(), deg / 2);
  }
  return check_sos_with_basis(f, basis, opts);
}

/// w^T Hess f(x) w as a polynomial in (x_1..x_n, w_1..w_n).
inline Polynomial hessian_form(const Polynomial& f) {
  const int n = f.num_vars();
  const PolynomialMatrix h = hessian(f);
  Polynomial g(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Polynomial wij = Polynomial::monomial(MultiIndex::unit(2 * n, n + i)) *
                             Polynomial::monomial(MultiIndex::unit(2 * n, n + j));
      g += h[i][j].embed(2 * n) * wij;
    }
  }
  return g;
}

/// SOS-convexity: the Hessian form w^T Hess f(x) w is SOS in (x, w). Any SOS
/// decomposition of this form uses squares linear in w, so the Gram basis is
/// { w_i x^beta : |beta| <= k } with 2k the x-degree of the Hessian.
inline SosResult check_sos_convex(const Polynomial& f, const SosOptions& opts = {}) {
  const int n = f.num_vars();
  const Polynomial g = hessian_form(f);
  if (g.is_zero()) return check_sos_with_basis(g, {}, opts);
  int xdeg = 0;
  for (const auto& [alpha, c] : g.terms()) xdeg = std::max(xdeg, alpha.degree() - 2);
  if (xdeg % 2 != 0) {
    SosResult out;
    out.verdict = SosVerdict::not_sos;
    out.note = "Hessian has odd degree";
    return out;
  }
  std::vector<MultiIndex> basis;
  for (const auto& beta : graded_monomials(n, xdeg / 2)) {
    for (int i = 0; i < n; ++i) {
      std::vector<int> e(2 * n, 0);
      for (int k = 0; k < n; ++k) e[k] = beta[k];
      e[n + i] = 1;
      basis.emplace_back(std::move(e));
    }
  }
  std::sort(basis.begin(), basis.end(), GradedLex{});
  return check_sos_with_basis(g, basis, opts);
}

}  // namespace fracsos
