#pragma once

// End-to-end solve: one moment program, then the minimizer is read off the
// first-order moments, x = (L_y(x_1), ..., L_y(x_n)) / y_0, and certified by
// direct evaluation of the program's functions.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracsos/model.hpp"
#include "fracsos/moment.hpp"
#include "fracsos/relax.hpp"
#include "fracsos/sdpsolve.hpp"

namespace fracsos {

inline constexpr double kDegeneracyTol = 1e-6;
inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kRatioRelTol = 1e-5;
inline constexpr double kDinkelbachTol = 1e-5;

/// (y_{e_1}, ..., y_{e_n}) / y_0, or nothing when |y_0| <= tol0.
inline std::optional<std::vector<double>> extract_x(const MomentVector& y,
                                                    double tol0 = kDegeneracyTol) {
  const double y0 = y.y0();
  if (!(std::abs(y0) > tol0)) return std::nullopt;
  std::vector<double> x = y.first_moments();
  for (double& v : x) v /= y0;
  return x;
}

struct Certification {
  std::vector<double> constraint_values;  // f_i(x) for i = 1..m
  double max_violation = 0.0;             // max(0, max_i f_i(x))
  double numerator = 0.0;                 // f_num(x)
  double denominator = 0.0;               // -f_den(x)
  std::optional<double> ratio;            // only when the denominator is positive
  std::optional<double> ratio_gap;        // |ratio - sdp_value|
  bool feasible = false;
  bool denominator_positive = false;
  bool ratio_matches = false;
  std::vector<std::string> failures;

  bool passed() const { return feasible && denominator_positive && ratio_matches; }
};

/// Checks x against the program directly: f_i(x) <= 1e-6, -f_den(x) > 0, and
/// |f_num(x) / (-f_den(x)) - sdp_value| <= 1e-5 (1 + |sdp_value|). Evaluation
/// errors are recorded as failures rather than thrown.
inline Certification certify(const FractionalProgram& prog, std::span<const double> x,
                             double sdp_value) {
  Certification c;
  const int m = prog.num_constraints();
  c.feasible = true;
  for (int i = 1; i <= m; ++i) {
    double v;
    try {
      v = eval_semialg(prog.function(i), x);
    } catch (const std::exception& e) {
      c.feasible = false;
      c.constraint_values.push_back(std::numeric_limits<double>::quiet_NaN());
      c.failures.push_back(prog.tag(i) + ": " + e.what());
      continue;
    }
    c.constraint_values.push_back(v);
    c.max_violation = std::max(c.max_violation, v);
    if (v > kFeasibilityTol) {
      c.feasible = false;
      c.failures.push_back(prog.tag(i) + " violated by " + std::to_string(v));
    }
  }
  try {
    c.numerator = eval_semialg(prog.numerator, x);
    c.denominator = -eval_semialg(prog.denominator_neg, x);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("objective evaluation failed: ") + e.what());
    return c;
  }
  c.denominator_positive = c.denominator > 0.0;
  if (!c.denominator_positive) {
    c.failures.push_back("denominator not positive: " + std::to_string(c.denominator));
    return c;
  }
  c.ratio = c.numerator / c.denominator;
  c.ratio_gap = std::abs(*c.ratio - sdp_value);
  c.ratio_matches = *c.ratio_gap <= kRatioRelTol * (1.0 + std::abs(sdp_value));
  if (!c.ratio_matches) {
    c.failures.push_back("ratio " + std::to_string(*c.ratio) + " differs from SDP value " +
                         std::to_string(sdp_value));
  }
  return c;
}

struct DinkelbachResult {
  SolveStatus status = SolveStatus::numerical_failure;
  double value = std::numeric_limits<double>::quiet_NaN();

  bool optimal() const { return status == SolveStatus::optimal; }
};

/// SOS lower bound on min over the feasible set of f_num + gamma * f_den.
/// At gamma equal to the optimal ratio this is zero.
inline DinkelbachResult dinkelbach_check(const FractionalProgram& prog, double gamma,
                                         const SolveOptions& solver = {},
                                         const RelaxOptions& relax = {}) {
  if (!(gamma >= 0.0)) throw ValidationError("Dinkelbach parameter must be nonnegative");
  const ConicSolution sol = solve(build_dinkelbach(prog, gamma, relax), solver);
  DinkelbachResult r;
  r.status = sol.status;
  if (sol.optimal()) r.value = sol.primal_objective;
  return r;
}

enum class Outcome { certified_optimal, degenerate, uncertified, infeasible, unbounded, solver_failure };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::certified_optimal: return "certified_optimal";
    case Outcome::degenerate: return "degenerate";
    case Outcome::uncertified: return "uncertified";
    case Outcome::infeasible: return "infeasible";
    case Outcome::unbounded: return "unbounded";
    case Outcome::solver_failure: return "solver_failure";
  }
  return "?";
}

struct ProgramOptions {
  SolveOptions solver;
  RelaxOptions relax;
  double degeneracy_tol = kDegeneracyTol;
  bool dinkelbach = true;
};

struct SolveReport {
  Outcome outcome = Outcome::solver_failure;
  SolveStatus status = SolveStatus::numerical_failure;  // status of the moment program
  int iterations = 0;
  Residuals residuals;
  std::optional<double> optimal_value;
  std::optional<MomentVector> y_bar;
  std::vector<std::pair<std::string, SymMatrix>> z_blocks;
  bool degenerate = false;
  std::optional<std::vector<double>> x_bar;
  std::optional<Certification> certification;
  std::optional<DinkelbachResult> dinkelbach;
  std::vector<std::string> messages;

  /// 0 certified optimum, 2 degenerate or uncertified, 3 infeasible or
  /// unbounded, 4 solver failure.
  int exit_code() const {
    switch (outcome) {
      case Outcome::certified_optimal: return 0;
      case Outcome::degenerate:
      case Outcome::uncertified: return 2;
      case Outcome::infeasible:
      case Outcome::unbounded: return 3;
      case Outcome::solver_failure: return 4;
    }
    return 4;
  }
};

/// Builds and solves the moment program once, extracts and certifies the
/// minimizer, and runs the Dinkelbach zero check at the computed value.
inline SolveReport solve_program(const FractionalProgram& prog, const ProgramOptions& opts = {}) {
  opts.solver.validate();
  const ConicProgram q = build_Q(prog, opts.relax);
  const RelaxationSupport rs = relaxation_support(prog, opts.relax);
  const ConicSolution sol = solve(q, opts.solver);

  SolveReport rep;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.residuals = sol.residuals;
  switch (sol.status) {
    case SolveStatus::optimal: break;
    case SolveStatus::infeasible:
      rep.outcome = Outcome::infeasible;
      rep.messages.push_back("moment program infeasible");
      return rep;
    case SolveStatus::unbounded:
      rep.outcome = Outcome::unbounded;
      rep.messages.push_back("moment program unbounded");
      return rep;
    default:
      rep.outcome = Outcome::solver_failure;
      rep.messages.push_back(std::string("solver stopped: ") + to_string(sol.status));
      return rep;
  }

  rep.optimal_value = sol.primal_objective;
  const Eigen::VectorXd y = q.layout.unpack(sol.primal, "y");
  rep.y_bar = MomentVector(prog.d, rs.support, std::vector<double>(y.data(), y.data() + y.size()));
  for (int i = 1; i <= prog.num_functions(); ++i) {
    if (prog.function(i).omega.t == 0) continue;
    const std::string name = "Z[" + prog.tag(i) + "]";
    rep.z_blocks.emplace_back(name, q.layout.unpack_matrix(sol.primal, name));
  }

  bool has_first_moments = true;
  for (int k = 0; k < prog.n; ++k) {
    has_first_moments = has_first_moments && rep.y_bar->contains(MultiIndex::unit(prog.n, k));
  }
  if (!has_first_moments) {
    rep.outcome = Outcome::degenerate;
    rep.degenerate = true;
    rep.messages.push_back("reduced relaxation carries no first-order moments; cannot extract");
    return rep;
  }
  rep.x_bar = extract_x(*rep.y_bar, opts.degeneracy_tol);
  if (!rep.x_bar) {
    rep.outcome = Outcome::degenerate;
    rep.degenerate = true;
    rep.messages.push_back("degenerate moment vector: |y_0| = " +
                           std::to_string(std::abs(rep.y_bar->y0())) + " <= " +
                           std::to_string(opts.degeneracy_tol));
    return rep;
  }

  rep.certification = certify(prog, *rep.x_bar, *rep.optimal_value);
  rep.outcome =
      rep.certification->passed() ? Outcome::certified_optimal : Outcome::uncertified;
  for (const auto& f : rep.certification->failures) rep.messages.push_back("certification: " + f);

  if (opts.dinkelbach && *rep.optimal_value >= 0.0) {
    rep.dinkelbach = dinkelbach_check(prog, *rep.optimal_value, opts.solver, opts.relax);
    if (!rep.dinkelbach->optimal()) {
      rep.messages.push_back(std::string("Dinkelbach check: solver status ") +
                             to_string(rep.dinkelbach->status));
    } else if (std::abs(rep.dinkelbach->value) > kDinkelbachTol) {
      rep.messages.push_back("Dinkelbach check: value " + std::to_string(rep.dinkelbach->value) +
                             " is not zero");
    }
  }
  return rep;
}

}  // namespace fracsos
