#pragma once

// Assembly of the two single-level relaxations of a fractional program:
//
//  * the moment program (minimize over y and multipliers Z_i), whose
//    optimal y yields the minimizer, and
//  * the sums-of-squares program (maximize the ratio bound gamma such that
//    numerator - gamma * denominator + sum lambda_i f_i is SOS-representable),
//
// plus the parametric SOS program used for the Dinkelbach zero check and the
// Charnes-Cooper map sending a feasible point to a feasible moment vector.

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fracsos/basis.hpp"
#include "fracsos/conic.hpp"
#include "fracsos/model.hpp"
#include "fracsos/newton.hpp"

namespace fracsos {

struct RelaxOptions {
  /// Restrict the monomial basis to the Newton polytope of the program's
  /// polynomials instead of all monomials of degree <= d.
  bool basis_reduction = false;
};

/// Monomials indexing the moment/Gram matrix, and the moments carried by the relaxation.
struct RelaxationSupport {
  std::vector<MultiIndex> basis;
  std::vector<MultiIndex> support;
};

inline RelaxationSupport relaxation_support(const FractionalProgram& prog,
                                            const RelaxOptions& opts = {}) {
  RelaxationSupport rs;
  if (!opts.basis_reduction) {
    rs.basis = graded_monomials(prog.n, prog.d);
    rs.support = graded_monomials(prog.n, 2 * prog.d);
    return rs;
  }
  std::set<MultiIndex, GradedLex> poly_support{MultiIndex::zero(prog.n)};
  for (int i = 1; i <= prog.num_functions(); ++i) {
    for (const auto& h : prog.function(i).h) {
      for (const auto& [alpha, c] : h.terms()) poly_support.insert(alpha);
    }
  }
  rs.basis = newton_half_basis({poly_support.begin(), poly_support.end()}, prog.d);
  std::set<MultiIndex, GradedLex> all(poly_support);
  for (const auto& a : rs.basis) {
    for (const auto& b : rs.basis) all.insert(a + b);
  }
  rs.support.assign(all.begin(), all.end());
  return rs;
}

namespace detail {

using SupportIndex = std::map<MultiIndex, int, GradedLex>;

inline SupportIndex index_support(const std::vector<MultiIndex>& support) {
  SupportIndex idx;
  for (int k = 0; k < static_cast<int>(support.size()); ++k) idx.emplace(support[k], k);
  return idx;
}

/// Adds sum_alpha p_alpha y_alpha to a row.
inline void add_moment_terms(ConicBuilder& b, int row, const Polynomial& p,
                             const SupportIndex& idx, double scale = 1.0) {
  for (const auto& [alpha, c] : p.terms()) {
    auto it = idx.find(alpha);
    if (it == idx.end()) {
      throw ValidationError("monomial " + alpha.to_string() + " outside the relaxation support");
    }
    b.add_coef(row, b.coord("y", it->second), scale * c);
  }
}

inline std::string z_name(const FractionalProgram& prog, int i) { return "Z[" + prog.tag(i) + "]"; }
inline std::string y_name(const FractionalProgram& prog, int i) { return "Y[" + prog.tag(i) + "]"; }

}  // namespace detail

/// Moment program:
///
///   min  sum_alpha (h_0^num)_alpha y_alpha + <A_0^num, Z_num>
///   s.t. 1 + sum (h_0^den)_alpha y_alpha + <A_0^den, Z_den> <= 0
///        sum (h_0^i)_alpha y_alpha + <A_0^i, Z_i> <= 0          i = 1..m
///        sum (h_j^i)_alpha y_alpha + <A_j^i, Z_i> = 0           all i, j >= 1
///        <B_l^i, Z_i> = 0                                      all i, l
///        sum y_alpha B_alpha >= 0,  Z_i >= 0.
///
/// Inequalities carry nonnegative slacks ("slack[den]", "slack[c<i>]"); the
/// moment matrix is an auxiliary block "S" tied to y entrywise. Rows are
/// ordered: denominator, constraints, (i, j) couplings, (i, l) liftings,
/// then moment-matrix entries (upper triangle, row by row).
inline ConicProgram build_Q(const FractionalProgram& prog, const RelaxOptions& opts = {}) {
  require_valid(prog);
  const RelaxationSupport rs = relaxation_support(prog, opts);
  const auto idx = detail::index_support(rs.support);
  const int m = prog.num_constraints();
  const int nf = prog.num_functions();

  ConicBuilder b;
  b.add_free("y", static_cast<int>(rs.support.size()));
  b.add_nonneg("slack[den]", 1);
  for (int i = 1; i <= m; ++i) b.add_nonneg("slack[" + prog.tag(i) + "]", 1);
  for (int i = 1; i <= nf; ++i) {
    const int t = prog.function(i).omega.t;
    if (t > 0) b.add_psd(detail::z_name(prog, i), t);
  }
  const BasisMatrixTable table(rs.basis);
  b.add_psd("S", table.dim());

  auto add_lmi_term = [&](int row, int i, const Eigen::MatrixXd& a) {
    if (prog.function(i).omega.t > 0) {
      b.add_inner(row, detail::z_name(prog, i), SymMatrix::symmetrized(a));
    }
  };

  {
    const SemiAlgFunction& f = prog.denominator_neg;
    const int r = b.begin_row("den", -1.0);
    detail::add_moment_terms(b, r, f.h[0], idx);
    add_lmi_term(r, m + 2, f.omega.A[0]);
    b.add_coef(r, b.coord("slack[den]", 0), 1.0);
  }
  for (int i = 1; i <= m; ++i) {
    const SemiAlgFunction& f = prog.function(i);
    const int r = b.begin_row(prog.tag(i), 0.0);
    detail::add_moment_terms(b, r, f.h[0], idx);
    add_lmi_term(r, i, f.omega.A[0]);
    b.add_coef(r, b.coord("slack[" + prog.tag(i) + "]", 0), 1.0);
  }
  for (int i = 1; i <= nf; ++i) {
    const SemiAlgFunction& f = prog.function(i);
    for (int j = 1; j <= f.omega.s; ++j) {
      const int r = b.begin_row("couple[" + prog.tag(i) + "," + std::to_string(j) + "]", 0.0);
      detail::add_moment_terms(b, r, f.h[j], idx);
      add_lmi_term(r, i, f.omega.A[j]);
    }
  }
  for (int i = 1; i <= nf; ++i) {
    const SemiAlgFunction& f = prog.function(i);
    for (int l = 0; l < f.omega.p; ++l) {
      const int r = b.begin_row("lift[" + prog.tag(i) + "," + std::to_string(l + 1) + "]", 0.0);
      add_lmi_term(r, i, f.omega.B[l]);
    }
  }
  for (int r0 = 0; r0 < table.dim(); ++r0) {
    for (int c0 = r0; c0 < table.dim(); ++c0) {
      const int r =
          b.begin_row("moment[" + std::to_string(r0) + "," + std::to_string(c0) + "]", 0.0);
      const auto [col, factor] = b.entry("S", r0, c0);
      b.add_coef(r, col, factor);
      b.add_coef(r, b.coord("y", idx.at(rs.basis[r0] + rs.basis[c0])), -1.0);
    }
  }

  const SemiAlgFunction& num = prog.numerator;
  for (const auto& [alpha, c] : num.h[0].terms()) b.set_objective(b.coord("y", idx.at(alpha)), c);
  if (num.omega.t > 0) {
    const Eigen::VectorXd cz = svec(SymMatrix::symmetrized(num.omega.A[0]));
    for (int k = 0; k < cz.size(); ++k) {
      b.set_objective(b.coord(detail::z_name(prog, m + 1), k), cz(k));
    }
  }
  b.set_sense(Sense::minimize);
  return b.build();
}

namespace detail {

/// Shared assembly of the SOS programs. With `gamma` unset this is the
/// ratio-bound program (maximize lambda0[den]); with `gamma` set,
/// lambda0[den] is pinned to gamma and a free "bound" variable is
/// subtracted from the constant coefficient and maximized.
inline ConicProgram build_sos_program(const FractionalProgram& prog, const RelaxOptions& opts,
                                      std::optional<double> gamma) {
  require_valid(prog);
  const RelaxationSupport rs = relaxation_support(prog, opts);
  const int m = prog.num_constraints();
  const int nf = prog.num_functions();
  const BasisMatrixTable table(rs.basis);

  auto lambda0 = [&](int i) { return "lambda0[" + prog.tag(i) + "]"; };
  ConicBuilder b;
  b.add_free(lambda0(m + 1), 1);
  if (gamma) {
    b.add_free(lambda0(m + 2), 1);
    b.add_free("bound", 1);
  }
  for (int i = 1; i <= nf; ++i) {
    const LMISet& o = prog.function(i).omega;
    if (o.s > 0) b.add_free("lambda[" + prog.tag(i) + "]", o.s);
    if (o.p > 0) b.add_free("z[" + prog.tag(i) + "]", o.p);
  }
  for (int i = 1; i <= m; ++i) b.add_nonneg(lambda0(i), 1);
  if (!gamma) b.add_nonneg(lambda0(m + 2), 1);
  for (int i = 1; i <= nf; ++i) {
    const int t = prog.function(i).omega.t;
    if (t > 0) b.add_psd(y_name(prog, i), t);
  }
  b.add_psd("X", table.dim());

  const MultiIndex zero = MultiIndex::zero(prog.n);
  for (const auto& alpha : rs.support) {
    const int r = b.begin_row("coef" + alpha.to_string(), 0.0);
    for (int i = 1; i <= nf; ++i) {
      const SemiAlgFunction& f = prog.function(i);
      b.add_coef(r, b.coord(lambda0(i), 0), f.h[0].coefficient(alpha));
      for (int j = 1; j <= f.omega.s; ++j) {
        b.add_coef(r, b.coord("lambda[" + prog.tag(i) + "]", j - 1), f.h[j].coefficient(alpha));
      }
    }
    for (auto [p, q] : table.entries(alpha)) {
      const auto [col, factor] = b.entry("X", p, q);
      // <B_alpha, X> counts off-diagonal positions twice.
      b.add_coef(r, col, -(p == q ? 1.0 : 2.0) * factor);
    }
    if (gamma && alpha == zero) b.add_coef(r, b.coord("bound", 0), -1.0);
  }
  {
    const int r = b.begin_row("pin[num]", 1.0);
    b.add_coef(r, b.coord(lambda0(m + 1), 0), 1.0);
  }
  if (gamma) {
    const int r = b.begin_row("pin[den]", *gamma);
    b.add_coef(r, b.coord(lambda0(m + 2), 0), 1.0);
  }
  for (int i = 1; i <= nf; ++i) {
    const LMISet& o = prog.function(i).omega;
    if (o.t == 0) continue;
    const std::string tag = prog.tag(i);
    for (int p = 0; p < o.t; ++p) {
      for (int q = p; q < o.t; ++q) {
        const int r = b.begin_row(
            "lmi[" + tag + "," + std::to_string(p) + "," + std::to_string(q) + "]", 0.0);
        const auto [col, factor] = b.entry(y_name(prog, i), p, q);
        b.add_coef(r, col, factor);
        b.add_coef(r, b.coord(lambda0(i), 0), -0.5 * (o.A[0](p, q) + o.A[0](q, p)));
        for (int j = 1; j <= o.s; ++j) {
          b.add_coef(r, b.coord("lambda[" + tag + "]", j - 1),
                     -0.5 * (o.A[j](p, q) + o.A[j](q, p)));
        }
        for (int l = 0; l < o.p; ++l) {
          b.add_coef(r, b.coord("z[" + tag + "]", l), -0.5 * (o.B[l](p, q) + o.B[l](q, p)));
        }
      }
    }
  }
  b.set_objective(b.coord(gamma ? std::string("bound") : lambda0(m + 2), 0), 1.0);
  b.set_sense(Sense::maximize);
  return b.build();
}

}  // namespace detail

/// SOS program:
///
///   max  lambda0[den]
///   s.t. sum_i ( lambda0_i (h_0^i)_alpha + sum_j lambda_j^i (h_j^i)_alpha ) = <B_alpha, X>
///        lambda0[num] = 1,  lambda0_i >= 0,
///        lambda0_i A_0^i + sum_j lambda_j^i A_j^i + sum_l z_l^i B_l^i = Y_i >= 0,
///        X >= 0.
///
/// Rows: one per alpha (graded-lex), the lambda0[num] pin, then the
/// LMI entries of each Y_i (upper triangle, row by row).
inline ConicProgram build_Qhat(const FractionalProgram& prog, const RelaxOptions& opts = {}) {
  return detail::build_sos_program(prog, opts, std::nullopt);
}

/// SOS lower bound on min over the feasible set of f_num + gamma * f_den:
/// the SOS program with lambda0[den] pinned to gamma and the largest
/// constant "bound" subtracted from the certified polynomial.
inline ConicProgram build_dinkelbach(const FractionalProgram& prog, double gamma,
                                     const RelaxOptions& opts = {}) {
  return detail::build_sos_program(prog, opts, gamma);
}

/// Charnes-Cooper image of a point x with -f_den(x) > 0: y = v(x) / g and
/// Z_i = W_i / g with g = -f_den(x) and W_i the inner multipliers at x,
/// packed in the layout of build_Q(prog, opts).
inline Eigen::VectorXd charnes_cooper_point(const FractionalProgram& prog,
                                            std::span<const double> x,
                                            const RelaxOptions& opts = {}) {
  const ConicProgram q = build_Q(prog, opts);
  const RelaxationSupport rs = relaxation_support(prog, opts);
  const int m = prog.num_constraints();
  const int nf = prog.num_functions();

  std::vector<SemiAlgEvaluation> ev;
  for (int i = 1; i <= nf; ++i) ev.push_back(eval_semialg_certificate(prog.function(i), x));
  const double g = -ev[m + 1].value;
  if (!(g > 0.0)) throw ValidationError("Charnes-Cooper map needs a positive denominator");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(q.num_vars());
  Eigen::VectorXd y(rs.support.size());
  for (int k = 0; k < y.size(); ++k) y(k) = monomial_value(rs.support[k], x) / g;
  q.layout.pack(v, "y", y);
  for (int i = 1; i <= nf; ++i) {
    if (prog.function(i).omega.t == 0) continue;
    SymMatrix z = ev[i - 1].W;
    z *= 1.0 / g;
    q.layout.pack_matrix(v, detail::z_name(prog, i), z);
  }
  q.layout.pack(v, "slack[den]", Eigen::VectorXd::Constant(1, -1.0 - ev[m + 1].value / g));
  for (int i = 1; i <= m; ++i) {
    q.layout.pack(v, "slack[" + prog.tag(i) + "]",
                  Eigen::VectorXd::Constant(1, -ev[i - 1].value / g));
  }
  const BasisMatrixTable table(rs.basis);
  const auto idx = detail::index_support(rs.support);
  q.layout.pack_matrix(v, "S", table.combine([&](const MultiIndex& a) { return y(idx.at(a)); }));
  return v;
}

}  // namespace fracsos
