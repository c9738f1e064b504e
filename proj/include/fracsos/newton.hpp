#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "fracsos/basis.hpp"
#include "fracsos/sdpsolve.hpp"

namespace fracsos {

/// Whether `point` lies in the convex hull of `vertices`, decided by the LP
///   min sum(u + v)  s.t.  sum_k mu_k v_k + u - v = point,  sum mu = 1,  mu, u, v >= 0.
inline bool in_convex_hull(const std::vector<std::vector<double>>& vertices,
                           const std::vector<double>& point, double tol = 1e-7) {
  const int n = static_cast<int>(point.size());
  const int K = static_cast<int>(vertices.size());
  if (K == 0) return false;
  ConicBuilder b;
  b.add_nonneg("mu", K);
  b.add_nonneg("over", n);
  b.add_nonneg("under", n);
  for (int i = 0; i < n; ++i) {
    const int r = b.begin_row("coord" + std::to_string(i), point[i]);
    for (int k = 0; k < K; ++k) b.add_coef(r, b.coord("mu", k), vertices[k][i]);
    b.add_coef(r, b.coord("over", i), 1.0);
    b.add_coef(r, b.coord("under", i), -1.0);
    b.set_objective(b.coord("over", i), 1.0);
    b.set_objective(b.coord("under", i), 1.0);
  }
  const int r = b.begin_row("simplex", 1.0);
  for (int k = 0; k < K; ++k) b.add_coef(r, b.coord("mu", k), 1.0);
  const ConicSolution sol = solve(b.build(), SolveOptions{1e-10, 1e-10, 200, 0});
  if (!sol.optimal()) {
    throw std::runtime_error(std::string("convex hull membership LP failed: ") +
                             to_string(sol.status));
  }
  return sol.primal_objective <= tol;
}

/// Monomials alpha with |alpha| <= d and 2*alpha in conv(support): the only
/// monomials that can appear in a sum-of-squares decomposition of a
/// polynomial supported on `support`.
inline std::vector<MultiIndex> newton_half_basis(const std::vector<MultiIndex>& support, int d) {
  if (support.empty()) throw ValidationError("newton_half_basis: empty support");
  const int n = support.front().size();
  std::set<MultiIndex, GradedLex> uniq(support.begin(), support.end());
  std::vector<std::vector<double>> vertices;
  for (const auto& a : uniq) vertices.emplace_back(a.exponents().begin(), a.exponents().end());
  std::vector<MultiIndex> out;
  for (const auto& a : graded_monomials(n, d)) {
    std::vector<double> p(n);
    for (int k = 0; k < n; ++k) p[k] = 2.0 * a[k];
    if (in_convex_hull(vertices, p)) out.push_back(a);
  }
  return out;
}

}  // namespace fracsos
