#pragma once

// Data model for fractional programs whose data are SOS-convex
// semi-algebraic functions
//
//   f(x) = sup { h_0(x) + sum_j y_j h_j(x) : A_0 + sum_j y_j A_j + sum_l z_l B_l >= 0 },
//
// together with pointwise evaluation (a small inner SDP, or a closed form
// when the LMI describes a box) and the standing-assumption checks.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracsos/conic.hpp"
#include "fracsos/errors.hpp"
#include "fracsos/polynomial.hpp"
#include "fracsos/sdpsolve.hpp"
#include "fracsos/sos.hpp"

namespace fracsos {

/// Omega = { y in R^s : exists z in R^p, A_0 + sum y_j A_j + sum z_l B_l >= 0 }.
/// Matrices are kept as plain dense matrices so that asymmetric input can be
/// reported by validation rather than rejected on construction.
struct LMISet {
  int s = 0;
  int p = 0;
  int t = 0;
  std::vector<Eigen::MatrixXd> A;  // A_0 .. A_s
  std::vector<Eigen::MatrixXd> B;  // B_1 .. B_p

  /// The one-point set R^0 used by pure polynomials.
  static LMISet point() {
    LMISet o;
    o.A.emplace_back(0, 0);
    return o;
  }

  /// The box prod_j [lo_j, hi_j], as rows hi_j - y_j >= 0 and y_j - lo_j >= 0.
  static LMISet box(const std::vector<double>& lo, const std::vector<double>& hi) {
    if (lo.size() != hi.size()) throw ValidationError("box bounds differ in length");
    LMISet o;
    o.s = static_cast<int>(lo.size());
    o.t = 2 * o.s;
    o.A.assign(o.s + 1, Eigen::MatrixXd::Zero(o.t, o.t));
    for (int j = 0; j < o.s; ++j) {
      o.A[0](2 * j, 2 * j) = hi[j];
      o.A[0](2 * j + 1, 2 * j + 1) = -lo[j];
      o.A[j + 1](2 * j, 2 * j) = -1.0;
      o.A[j + 1](2 * j + 1, 2 * j + 1) = 1.0;
    }
    return o;
  }
};

struct SemiAlgFunction {
  std::vector<Polynomial> h;  // h_0 .. h_s
  LMISet omega;

  static SemiAlgFunction polynomial(Polynomial f) {
    return SemiAlgFunction{{std::move(f)}, LMISet::point()};
  }

  bool is_polynomial() const { return omega.s == 0 && omega.p == 0 && omega.t == 0; }
};

/// min f_{m+1}(x) / (-f_{m+2}(x))  s.t.  f_i(x) <= 0, i = 1..m.
struct FractionalProgram {
  int n = 0;
  int d = 0;
  std::vector<SemiAlgFunction> constraints;
  SemiAlgFunction numerator;
  SemiAlgFunction denominator_neg;  // the denominator is -denominator_neg

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int num_functions() const { return num_constraints() + 2; }

  /// Functions indexed 1..m+2 (constraints, numerator, negated denominator).
  const SemiAlgFunction& function(int i) const {
    const int m = num_constraints();
    if (i >= 1 && i <= m) return constraints[i - 1];
    if (i == m + 1) return numerator;
    if (i == m + 2) return denominator_neg;
    throw ValidationError("function index out of range");
  }
  SemiAlgFunction& function(int i) {
    return const_cast<SemiAlgFunction&>(std::as_const(*this).function(i));
  }

  /// Short stable name: "c1".."cm", "num", "den".
  std::string tag(int i) const {
    const int m = num_constraints();
    if (i == m + 1) return "num";
    if (i == m + 2) return "den";
    return "c" + std::to_string(i);
  }
};

struct CheckItem {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string message;
  bool informational = false;  // reported but not part of the verdict
};

struct CheckReport {
  std::vector<CheckItem> items;

  void add(CheckItem item) {
    if (!std::isfinite(item.margin)) item.margin = 0.0;
    items.push_back(std::move(item));
  }
  void merge(const CheckReport& o) {
    items.insert(items.end(), o.items.begin(), o.items.end());
  }
  bool passed() const {
    for (const auto& i : items) {
      if (!i.informational && !i.passed) return false;
    }
    return true;
  }
  std::vector<CheckItem> failures() const {
    std::vector<CheckItem> f;
    for (const auto& i : items) {
      if (!i.informational && !i.passed) f.push_back(i);
    }
    return f;
  }
};

// ---------------------------------------------------------------------------
// Structural validation

namespace detail {

inline bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-12) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void lmi_violations(const LMISet& o, const std::string& where,
                           std::vector<std::string>& out) {
  if (o.s < 0 || o.p < 0 || o.t < 0) out.push_back(where + ": negative LMI size");
  if (static_cast<int>(o.A.size()) != o.s + 1) {
    out.push_back(where + ": expected " + std::to_string(o.s + 1) + " A matrices, got " +
                  std::to_string(o.A.size()));
  }
  if (static_cast<int>(o.B.size()) != o.p) {
    out.push_back(where + ": expected " + std::to_string(o.p) + " B matrices, got " +
                  std::to_string(o.B.size()));
  }
  if (o.t == 0 && (o.s > 0 || o.p > 0)) {
    out.push_back(where + ": Omega with s + p > 0 needs an LMI of order t >= 1");
  }
  auto check = [&](const Eigen::MatrixXd& m, const std::string& name) {
    if (m.rows() != o.t || m.cols() != o.t) {
      out.push_back(where + ": " + name + " matrix dimension mismatch (expected " +
                    std::to_string(o.t) + "x" + std::to_string(o.t) + ")");
      return;
    }
    if (!m.allFinite()) {
      out.push_back(where + ": " + name + " has non-finite entries");
    } else if (m.size() > 0 && !is_symmetric(m)) {
      out.push_back(where + ": " + name + " matrix not symmetric");
    }
  };
  for (std::size_t j = 0; j < o.A.size(); ++j) check(o.A[j], "A" + std::to_string(j));
  for (std::size_t l = 0; l < o.B.size(); ++l) check(o.B[l], "B" + std::to_string(l + 1));
}

}  // namespace detail

/// Every structural violation of the program, in a stable order.
inline std::vector<std::string> structural_violations(const FractionalProgram& prog) {
  std::vector<std::string> out;
  if (prog.n < 1) out.push_back("n must be at least 1");
  if (prog.d < 0) out.push_back("d must be nonnegative");
  for (int i = 1; i <= prog.num_functions(); ++i) {
    const SemiAlgFunction& f = prog.function(i);
    const std::string where = "function " + prog.tag(i);
    if (static_cast<int>(f.h.size()) != f.omega.s + 1) {
      out.push_back(where + ": expected " + std::to_string(f.omega.s + 1) +
                    " polynomials (s + 1), got " + std::to_string(f.h.size()));
    }
    for (std::size_t j = 0; j < f.h.size(); ++j) {
      const Polynomial& p = f.h[j];
      if (p.num_vars() != prog.n) {
        out.push_back(where + ": h" + std::to_string(j) + " has " +
                      std::to_string(p.num_vars()) + " variables, expected " +
                      std::to_string(prog.n));
      }
      if (p.degree() > 2 * prog.d) {
        out.push_back(where + ": h" + std::to_string(j) + " degree exceeds 2d (" +
                      std::to_string(p.degree()) + " > " + std::to_string(2 * prog.d) + ")");
      }
      for (const auto& [alpha, c] : p.terms()) {
        if (!std::isfinite(c)) {
          out.push_back(where + ": h" + std::to_string(j) + " has a non-finite coefficient");
          break;
        }
      }
    }
    detail::lmi_violations(f.omega, where, out);
  }
  return out;
}

/// Throws ValidationError listing every violation.
inline void require_valid(const FractionalProgram& prog) {
  const auto v = structural_violations(prog);
  if (v.empty()) return;
  std::string msg = "invalid program:";
  for (const auto& s : v) msg += "\n  " + s;
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// Evaluation

inline SolveOptions default_inner_options() { return SolveOptions{1e-10, 1e-10, 100, 0}; }

/// Full output of one evaluation: the value, a maximizer (y, z) in Omega, and
/// the optimal multiplier W >= 0 of the inner SDP (empty on closed-form paths).
struct SemiAlgEvaluation {
  double value = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  SymMatrix W;
};

/// Reusable evaluator: classifies Omega once, keeps the inner SDP template,
/// and only rewrites its right-hand side per point. Holds its own copy of the
/// function data, so evaluators can be shared read-only across threads.
class SemiAlgEvaluator {
 public:
  explicit SemiAlgEvaluator(SemiAlgFunction f, SolveOptions inner = default_inner_options())
      : f_(std::move(f)), inner_opts_(inner) {
    const LMISet& o = f_.omega;
    if (o.s == 0 && o.p == 0) {
      kind_ = Kind::point;
      point_nonempty_ = o.t == 0 || SymMatrix::symmetrized(o.A[0]).min_eigenvalue() >= -1e-12;
    } else if (auto box = detect_box(o)) {
      kind_ = Kind::box;
      lo_ = box->first;
      hi_ = box->second;
    } else {
      kind_ = Kind::sdp;
    }
    if (o.t > 0) inner_ = build_inner(o);
  }

  const SemiAlgFunction& function() const { return f_; }

  double operator()(std::span<const double> x) const { return evaluate(x, false).value; }

  /// With `certificate` set, the inner SDP is always solved so that W is available.
  SemiAlgEvaluation evaluate(std::span<const double> x, bool certificate) const {
    check_dim(x);
    const int s = f_.omega.s;
    std::vector<double> hx(s + 1);
    for (int j = 0; j <= s; ++j) hx[j] = f_.h[j](x);

    if (!certificate || f_.omega.t == 0) {
      if (kind_ == Kind::point) {
        if (!point_nonempty_) {
          throw EvaluationError(EvaluationError::Kind::empty_omega, "empty Omega: A0 is not PSD");
        }
        SemiAlgEvaluation e;
        e.value = hx[0];
        e.y = Eigen::VectorXd::Zero(0);
        e.z = Eigen::VectorXd::Zero(0);
        e.W = SymMatrix(f_.omega.t);
        return e;
      }
      if (kind_ == Kind::box) return eval_box(hx);
    }
    return eval_sdp(hx);
  }

 private:
  enum class Kind { point, box, sdp };

  void check_dim(std::span<const double> x) const {
    for (const auto& p : f_.h) {
      if (p.num_vars() != static_cast<int>(x.size())) {
        throw ValidationError("evaluation point has " + std::to_string(x.size()) +
                              " coordinates, expected " + std::to_string(p.num_vars()));
      }
    }
  }

  /// Diagonal LMIs without lifting, where each diagonal row involves at most
  /// one y_j, describe a product of intervals.
  static std::optional<std::pair<std::vector<double>, std::vector<double>>> detect_box(
      const LMISet& o) {
    if (o.p != 0 || o.t == 0) return std::nullopt;
    for (const auto& a : o.A) {
      if (a.rows() != o.t || a.cols() != o.t) return std::nullopt;
      Eigen::MatrixXd off = a;
      off.diagonal().setZero();
      if (off.cwiseAbs().maxCoeff() != 0.0) return std::nullopt;
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo(o.s, -inf), hi(o.s, inf);
    bool empty = false;
    for (int r = 0; r < o.t; ++r) {
      int which = -1;
      for (int j = 1; j <= o.s; ++j) {
        if (o.A[j](r, r) == 0.0) continue;
        if (which >= 0) return std::nullopt;
        which = j;
      }
      const double a0 = o.A[0](r, r);
      if (which < 0) {
        if (a0 < 0.0) empty = true;
        continue;
      }
      const double a = o.A[which](r, r);
      const double bound = -a0 / a;
      if (a > 0.0) {
        lo[which - 1] = std::max(lo[which - 1], bound);
      } else {
        hi[which - 1] = std::min(hi[which - 1], bound);
      }
    }
    if (empty) {
      // Encode an empty box so evaluation reports it.
      return std::make_pair(std::vector<double>(o.s, 1.0), std::vector<double>(o.s, -1.0));
    }
    return std::make_pair(lo, hi);
  }

  SemiAlgEvaluation eval_box(const std::vector<double>& hx) const {
    const int s = f_.omega.s;
    SemiAlgEvaluation e;
    e.y = Eigen::VectorXd::Zero(s);
    e.z = Eigen::VectorXd::Zero(0);
    e.W = SymMatrix(0);
    for (int j = 0; j < s; ++j) {
      if (lo_[j] > hi_[j]) {
        throw EvaluationError(EvaluationError::Kind::empty_omega, "empty Omega: empty interval");
      }
      if (!std::isfinite(lo_[j]) || !std::isfinite(hi_[j])) {
        throw EvaluationError(EvaluationError::Kind::omega_not_compact,
                              "Omega not compact: unbounded interval");
      }
    }
    e.value = hx[0];
    for (int j = 0; j < s; ++j) {
      const double c = hx[j + 1];
      e.y(j) = c > 0.0 ? hi_[j] : lo_[j];
      e.value += c * e.y(j);
    }
    return e;
  }

  /// Inner problem in standard form:
  ///   min <A_0, W>  s.t.  <A_j, W> = -h_j(x),  <B_l, W> = 0,  W >= 0,
  /// whose dual is the sup over Omega with y = -(row multipliers).
  static ConicProgram build_inner(const LMISet& o) {
    ConicBuilder b;
    b.add_psd("W", o.t);
    for (int j = 1; j <= o.s; ++j) {
      const int r = b.begin_row("y" + std::to_string(j), 0.0);
      b.add_inner(r, "W", SymMatrix::symmetrized(o.A[j]));
    }
    for (int l = 0; l < o.p; ++l) {
      const int r = b.begin_row("z" + std::to_string(l + 1), 0.0);
      b.add_inner(r, "W", SymMatrix::symmetrized(o.B[l]));
    }
    const Eigen::VectorXd c = svec(SymMatrix::symmetrized(o.A[0]));
    for (int k = 0; k < c.size(); ++k) b.set_objective(b.coord("W", k), c(k));
    return b.build();
  }

  SemiAlgEvaluation eval_sdp(const std::vector<double>& hx) const {
    const LMISet& o = f_.omega;
    if (o.t == 0) {
      throw EvaluationError(EvaluationError::Kind::omega_not_compact,
                            "Omega not compact: no LMI constrains y");
    }
    ConicProgram cp = inner_;
    for (int j = 1; j <= o.s; ++j) cp.b(j - 1) = -hx[j];
    const ConicSolution sol = solve(cp, inner_opts_);
    switch (sol.status) {
      case SolveStatus::optimal: break;
      case SolveStatus::infeasible:
        throw EvaluationError(EvaluationError::Kind::omega_not_compact,
                              "Omega not compact: inner supremum is unbounded");
      case SolveStatus::unbounded:
        throw EvaluationError(EvaluationError::Kind::empty_omega,
                              "empty Omega: the LMI is infeasible");
      default:
        throw EvaluationError(EvaluationError::Kind::solver_failure,
                              std::string("inner SDP failed: ") + to_string(sol.status));
    }
    SemiAlgEvaluation e;
    e.value = hx[0] + sol.primal_objective;
    e.y = -sol.dual.head(o.s);
    e.z = -sol.dual.segment(o.s, o.p);
    e.W = cp.layout.unpack_matrix(sol.primal, "W");
    return e;
  }

  SemiAlgFunction f_;
  SolveOptions inner_opts_;
  Kind kind_ = Kind::sdp;
  bool point_nonempty_ = true;
  std::vector<double> lo_, hi_;
  ConicProgram inner_;
};

/// f(x) = h_0(x) + max over Omega of sum_j y_j h_j(x).
inline double eval_semialg(const SemiAlgFunction& f, std::span<const double> x) {
  return SemiAlgEvaluator(f)(x);
}

/// Evaluation that always solves the inner SDP and returns its multiplier W.
inline SemiAlgEvaluation eval_semialg_certificate(const SemiAlgFunction& f,
                                                  std::span<const double> x) {
  return SemiAlgEvaluator(f).evaluate(x, true);
}

// ---------------------------------------------------------------------------
// Assumption checks

/// Largest tau with A_0 + sum y_j A_j + sum z_l B_l >= tau I for some (y, z),
/// computed as min <A_0, W> s.t. <A_j, W> = 0, <B_l, W> = 0, tr W = 1.
inline ConicSolution lmi_interior_margin(const LMISet& o,
                                         const SolveOptions& opts = default_inner_options()) {
  ConicBuilder b;
  b.add_psd("W", o.t);
  for (int j = 1; j <= o.s; ++j) {
    const int r = b.begin_row("y" + std::to_string(j), 0.0);
    b.add_inner(r, "W", SymMatrix::symmetrized(o.A[j]));
  }
  for (int l = 0; l < o.p; ++l) {
    const int r = b.begin_row("z" + std::to_string(l + 1), 0.0);
    b.add_inner(r, "W", SymMatrix::symmetrized(o.B[l]));
  }
  const int r = b.begin_row("trace", 1.0);
  b.add_inner(r, "W", SymMatrix::identity(o.t));
  const Eigen::VectorXd c = svec(SymMatrix::symmetrized(o.A[0]));
  for (int k = 0; k < c.size(); ++k) b.set_objective(b.coord("W", k), c(k));
  return solve(b.build(), opts);
}

inline constexpr double kInteriorMarginThreshold = 1e-7;
inline constexpr double kSlaterThreshold = 1e-8;

inline CheckReport check_assumption2(const FractionalProgram& prog) {
  CheckReport rep;
  for (int i = 1; i <= prog.num_functions(); ++i) {
    const LMISet& o = prog.function(i).omega;
    CheckItem item;
    item.name = "lmi_interior[" + prog.tag(i) + "]";
    if (o.t == 0) {
      item.passed = true;
      item.message = "no LMI (pure polynomial)";
      rep.add(item);
      continue;
    }
    const ConicSolution sol = lmi_interior_margin(o);
    if (sol.optimal()) {
      item.margin = sol.primal_objective;
      item.passed = item.margin > kInteriorMarginThreshold;
      item.message = item.passed ? "strictly feasible LMI" : "LMI has no interior point";
    } else if (sol.status == SolveStatus::infeasible) {
      item.message = "interior margin unbounded: Omega is not compact";
    } else if (sol.status == SolveStatus::unbounded) {
      item.message = "LMI margin unbounded below: Omega is empty";
    } else {
      item.message = std::string("undetermined: solver status ") + to_string(sol.status);
    }
    rep.add(item);
  }
  return rep;
}

inline CheckReport check_slater(const FractionalProgram& prog, std::span<const double> xhat) {
  if (static_cast<int>(xhat.size()) != prog.n) {
    throw ValidationError("Slater point has " + std::to_string(xhat.size()) +
                          " coordinates, expected " + std::to_string(prog.n));
  }
  CheckReport rep;
  for (int i = 1; i <= prog.num_constraints(); ++i) {
    const double v = eval_semialg(prog.function(i), xhat);
    CheckItem item{"slater[" + prog.tag(i) + "]", v < -kSlaterThreshold, -v, "", false};
    item.message = "f(xhat) = " + std::to_string(v);
    rep.add(item);
  }
  const int m = prog.num_constraints();
  const double den = -eval_semialg(prog.denominator_neg, xhat);
  rep.add({"denominator_positive", den > 0.0, den, "-f_den(xhat) = " + std::to_string(den), true});
  const double num = eval_semialg(prog.function(m + 1), xhat);
  rep.add({"numerator_nonnegative", num >= 0.0, num, "f_num(xhat) = " + std::to_string(num), true});
  return rep;
}

struct ValidateOptions {
  int sos_convex_samples = 8;  // 0 disables the SOS-convexity spot check
  unsigned seed = 20240101u;
  /// Additional y-points (per function index 1..m+2) at which SOS-convexity is checked.
  std::vector<std::pair<int, std::vector<double>>> witnesses;
};

namespace detail {

/// argmax over Omega of c^T y (the inner SDP with h_j replaced by c_j).
inline std::optional<Eigen::VectorXd> argmax_linear(const LMISet& o, const Eigen::VectorXd& c) {
  std::vector<Polynomial> h;
  h.push_back(Polynomial::constant(1, 0.0));
  for (int j = 0; j < o.s; ++j) h.push_back(Polynomial::constant(1, c(j)));
  const double x0 = 0.0;
  try {
    return eval_semialg_certificate(SemiAlgFunction{h, o}, std::span<const double>(&x0, 1)).y;
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

inline CheckItem sos_convex_item(const SemiAlgFunction& f, const Eigen::VectorXd& y,
                                 const std::string& name) {
  Polynomial g = f.h[0];
  for (int j = 0; j < y.size(); ++j) {
    Polynomial term = f.h[j + 1];
    term *= y(j);
    g += term;
  }
  const SosResult r = check_sos_convex(g);
  CheckItem item{name, r.is_sos(), 0.0, "", false};
  item.message = std::string("SOS-convexity: ") + to_string(r.verdict);
  if (!r.note.empty()) item.message += " (" + r.note + ")";
  return item;
}

}  // namespace detail

/// Structural checks, plus an optional SOS-convexity spot check of
/// h_0 + sum y_j h_j at sampled maximizers of random linear objectives over Omega.
inline CheckReport validate(const FractionalProgram& prog, const ValidateOptions& opts = {}) {
  CheckReport rep;
  const auto violations = structural_violations(prog);
  for (const auto& v : violations) rep.add({"structure", false, 0.0, v, false});
  if (!violations.empty()) return rep;
  rep.add({"structure", true, 0.0, "dimensions, degrees and symmetry consistent", false});

  if (opts.sos_convex_samples > 0) {
    std::mt19937 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 1; i <= prog.num_functions(); ++i) {
      const SemiAlgFunction& f = prog.function(i);
      const std::string base = "sos_convex[" + prog.tag(i) + "]";
      if (f.omega.s == 0) {
        rep.add(detail::sos_convex_item(f, Eigen::VectorXd::Zero(0), base));
        continue;
      }
      for (int k = 0; k < opts.sos_convex_samples; ++k) {
        Eigen::VectorXd c(f.omega.s);
        for (int j = 0; j < f.omega.s; ++j) c(j) = normal(rng);
        const auto y = detail::argmax_linear(f.omega, c);
        const std::string name = base + "#" + std::to_string(k);
        if (!y) {
          rep.add({name, false, 0.0, "could not sample Omega (empty or not compact)", false});
          continue;
        }
        rep.add(detail::sos_convex_item(f, *y, name));
      }
    }
  }
  for (const auto& [i, y] : opts.witnesses) {
    const SemiAlgFunction& f = prog.function(i);
    if (static_cast<int>(y.size()) != f.omega.s) {
      rep.add({"sos_convex_witness", false, 0.0, "witness has wrong length", false});
      continue;
    }
    rep.add(detail::sos_convex_item(f, Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()),
                                    "sos_convex_witness[" + prog.tag(i) + "]"));
  }
  return rep;
}

}  // namespace fracsos
