#pragma once

// Brute-force grid oracle: the best feasible ratio over a uniform grid.
// Its value is an upper bound on the infimum of the fractional program.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracsos/model.hpp"

namespace fracsos {

/// No grid point satisfied the constraints (the program itself may still be feasible).
class EmptyGridSample : public std::runtime_error {
 public:
  EmptyGridSample() : std::runtime_error("empty grid sample: no feasible grid point") {}
};

struct GridSpec {
  std::vector<std::pair<double, double>> box;  // per-coordinate [lo, hi]
  int steps = 201;                             // points per axis
  double feasibility_tol = 1e-9;               // f_i(x) <= tol counts as feasible

  /// lo == hi collapses an axis to a single point.
  void validate(int n) const {
    if (steps < 2) throw ValidationError("grid needs steps >= 2");
    if (static_cast<int>(box.size()) != n) {
      throw ValidationError("grid box has " + std::to_string(box.size()) +
                            " intervals, expected " + std::to_string(n));
    }
    for (const auto& [lo, hi] : box) {
      if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
        throw ValidationError("grid box intervals need finite lo <= hi");
      }
    }
  }
};

struct OracleResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  long evaluated = 0;
  long feasible = 0;
};

inline constexpr int kOracleMaxDim = 3;

/// Evaluates every grid point; among points attaining the minimum, the one
/// whose grid-index vector comes first in graded-lex order wins.
inline OracleResult grid_oracle(const FractionalProgram& prog, const GridSpec& spec) {
  if (prog.n > kOracleMaxDim) throw ValidationError("oracle limited to n <= 3");
  spec.validate(prog.n);
  require_valid(prog);

  std::vector<SemiAlgEvaluator> cons;
  for (const auto& f : prog.constraints) cons.emplace_back(f);
  const SemiAlgEvaluator num(prog.numerator);
  const SemiAlgEvaluator den(prog.denominator_neg);

  const int n = prog.n;
  auto coord = [&](int axis, int k) {
    const auto [lo, hi] = spec.box[axis];
    if (lo == hi) return lo;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(spec.steps - 1);
  };
  // Collapsed axes contribute a single grid point.
  std::vector<int> counts(n);
  for (int a = 0; a < n; ++a) counts[a] = spec.box[a].first == spec.box[a].second ? 1 : spec.steps;

  OracleResult res;
  std::vector<int> idx(n, 0);
  MultiIndex best_idx = MultiIndex::zero(n);
  std::vector<double> x(n);
  for (;;) {
    for (int a = 0; a < n; ++a) x[a] = coord(a, idx[a]);
    ++res.evaluated;
    bool feasible = true;
    for (const auto& c : cons) {
      if (!(c(x) <= spec.feasibility_tol)) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      const double g = -den(x);
      if (g > 0.0) {
        ++res.feasible;
        const double r = num(x) / g;
        const MultiIndex here(idx);
        if (r < res.value || (r == res.value && GradedLex{}(here, best_idx))) {
          res.value = r;
          res.argmin = x;
          best_idx = here;
        }
      }
    }
    int a = n - 1;
    while (a >= 0 && ++idx[a] == counts[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  if (res.feasible == 0) throw EmptyGridSample();
  return res;
}

}  // namespace fracsos
