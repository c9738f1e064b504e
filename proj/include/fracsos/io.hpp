#pragma once

// JSON problem files and reports.
//
// Problem file:
//   {
//     "n": 2, "d": 1,
//     "constraints": [ <function>, ... ],
//     "numerator": <function>,
//     "denominator_neg": <function>      // the minimized ratio is numerator / (-denominator_neg)
//   }
//   <function> = { "h": [<poly>, ...], "omega": { "s", "p", "t", "A": [<matrix>...], "B": [...] } }
//   <poly>     = [ { "alpha": [ints], "coef": number }, ... ]
//   <matrix>   = row-major array of t*t numbers
// A function without "omega" is a plain polynomial and has exactly one h.

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracsos/extract.hpp"
#include "fracsos/model.hpp"

namespace fracsos {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "fracsos/1";

/// Malformed JSON text, with a 1-based line and column.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

inline const Json& require_key(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + ": missing key \"" + key + "\"");
  return *it;
}

inline int require_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<int>();
}

inline double require_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline const Json& require_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  return j;
}

inline Polynomial parse_poly(const Json& j, int n, const std::string& path) {
  Polynomial p(n);
  require_array(j, path);
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string tp = path + "[" + std::to_string(k) + "]";
    const Json& alpha = require_array(require_key(j[k], "alpha", tp), tp + ".alpha");
    if (static_cast<int>(alpha.size()) != n) {
      throw ValidationError(tp + ".alpha: expected " + std::to_string(n) + " exponents");
    }
    std::vector<int> e;
    for (std::size_t v = 0; v < alpha.size(); ++v) {
      const int ev = require_int(alpha[v], tp + ".alpha");
      if (ev < 0) throw ValidationError(tp + ".alpha: negative exponent");
      e.push_back(ev);
    }
    p.add_term(MultiIndex(std::move(e)), require_number(require_key(j[k], "coef", tp), tp + ".coef"));
  }
  return p;
}

inline Eigen::MatrixXd parse_matrix(const Json& j, int t, const std::string& path) {
  require_array(j, path);
  if (static_cast<int>(j.size()) != t * t) {
    throw ValidationError(path + ": matrix dimension mismatch (expected " + std::to_string(t * t) +
                          " entries, got " + std::to_string(j.size()) + ")");
  }
  Eigen::MatrixXd m(t, t);
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < t; ++c) m(r, c) = require_number(j[r * t + c], path);
  }
  return m;
}

inline SemiAlgFunction parse_function(const Json& j, int n, const std::string& path) {
  SemiAlgFunction f;
  const Json& h = require_array(require_key(j, "h", path), path + ".h");
  for (std::size_t k = 0; k < h.size(); ++k) {
    f.h.push_back(parse_poly(h[k], n, path + ".h[" + std::to_string(k) + "]"));
  }
  auto it = j.find("omega");
  if (it == j.end()) {
    f.omega = LMISet::point();
    return f;
  }
  const std::string op = path + ".omega";
  const Json& o = *it;
  f.omega.s = require_int(require_key(o, "s", op), op + ".s");
  f.omega.p = require_int(require_key(o, "p", op), op + ".p");
  f.omega.t = require_int(require_key(o, "t", op), op + ".t");
  if (f.omega.s < 0 || f.omega.p < 0 || f.omega.t < 0) {
    throw ValidationError(op + ": sizes must be nonnegative");
  }
  const Json& A = require_array(require_key(o, "A", op), op + ".A");
  for (std::size_t k = 0; k < A.size(); ++k) {
    f.omega.A.push_back(parse_matrix(A[k], f.omega.t, op + ".A[" + std::to_string(k) + "]"));
  }
  if (auto b = o.find("B"); b != o.end()) {
    require_array(*b, op + ".B");
    for (std::size_t k = 0; k < b->size(); ++k) {
      f.omega.B.push_back(parse_matrix((*b)[k], f.omega.t, op + ".B[" + std::to_string(k) + "]"));
    }
  }
  return f;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what(),
                     line, col);
  }
}

/// Builds and validates a program; throws ValidationError listing every problem.
inline FractionalProgram program_from_json(const Json& j) {
  FractionalProgram prog;
  prog.n = detail::require_int(detail::require_key(j, "n", "program"), "n");
  prog.d = detail::require_int(detail::require_key(j, "d", "program"), "d");
  if (prog.n < 1) throw ValidationError("n must be at least 1");
  if (prog.d < 0) throw ValidationError("d must be nonnegative");
  const Json& cons = detail::require_array(detail::require_key(j, "constraints", "program"),
                                           "constraints");
  for (std::size_t k = 0; k < cons.size(); ++k) {
    prog.constraints.push_back(
        detail::parse_function(cons[k], prog.n, "constraints[" + std::to_string(k) + "]"));
  }
  prog.numerator = detail::parse_function(detail::require_key(j, "numerator", "program"), prog.n,
                                          "numerator");
  prog.denominator_neg = detail::parse_function(
      detail::require_key(j, "denominator_neg", "program"), prog.n, "denominator_neg");
  require_valid(prog);
  return prog;
}

inline FractionalProgram parse_program(const std::string& text) {
  return program_from_json(parse_json_text(text));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline FractionalProgram load_program(const std::string& path) {
  return parse_program(read_file(path));
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Polynomial& p) {
  Json arr = Json::array();
  for (const auto& [alpha, c] : p.terms()) {
    arr.push_back({{"alpha", alpha.exponents()}, {"coef", c}});
  }
  return arr;
}

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json arr = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  }
  return arr;
}

inline Json to_json(const SemiAlgFunction& f) {
  Json j;
  Json h = Json::array();
  for (const auto& p : f.h) h.push_back(to_json(p));
  j["h"] = h;
  if (!f.is_polynomial()) {
    Json o;
    o["s"] = f.omega.s;
    o["p"] = f.omega.p;
    o["t"] = f.omega.t;
    Json A = Json::array(), B = Json::array();
    for (const auto& a : f.omega.A) A.push_back(matrix_to_json(a));
    for (const auto& b : f.omega.B) B.push_back(matrix_to_json(b));
    o["A"] = A;
    o["B"] = B;
    j["omega"] = o;
  }
  return j;
}

inline Json to_json(const FractionalProgram& prog) {
  Json j;
  j["n"] = prog.n;
  j["d"] = prog.d;
  Json cons = Json::array();
  for (const auto& c : prog.constraints) cons.push_back(to_json(c));
  j["constraints"] = cons;
  j["numerator"] = to_json(prog.numerator);
  j["denominator_neg"] = to_json(prog.denominator_neg);
  return j;
}

namespace detail {

/// Non-finite reals have no JSON representation; they serialize as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : Json(nullptr);
}

inline Json symmatrix_to_json(const SymMatrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.dim(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.dim(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline Json to_json(const SolveReport& rep) {
  Json j;
  j["schema"] = kReportSchema;
  j["outcome"] = to_string(rep.outcome);
  j["status"] = to_string(rep.status);
  j["iterations"] = rep.iterations;
  j["residuals"] = {{"primal_feasibility", detail::number(rep.residuals.primal_feas)},
                    {"dual_feasibility", detail::number(rep.residuals.dual_feas)},
                    {"gap", detail::number(rep.residuals.gap)}};
  j["optimal_value"] = detail::optional_number(rep.optimal_value);
  j["degenerate"] = rep.degenerate;
  if (rep.x_bar) {
    Json x = Json::array();
    for (double v : *rep.x_bar) x.push_back(detail::number(v));
    j["x_bar"] = x;
  } else {
    j["x_bar"] = nullptr;
  }
  if (rep.y_bar) {
    Json y = Json::array();
    for (int k = 0; k < rep.y_bar->size(); ++k) {
      y.push_back({{"alpha", rep.y_bar->support()[k].exponents()},
                   {"value", detail::number(rep.y_bar->values()[k])}});
    }
    j["y_bar"] = y;
  } else {
    j["y_bar"] = nullptr;
  }
  Json z = Json::object();
  for (const auto& [name, m] : rep.z_blocks) z[name] = detail::symmatrix_to_json(m);
  j["z_blocks"] = z;
  if (rep.certification) {
    const Certification& c = *rep.certification;
    Json cv = Json::array();
    for (double v : c.constraint_values) cv.push_back(detail::number(v));
    j["certification"] = {{"passed", c.passed()},
                          {"constraint_values", cv},
                          {"max_violation", detail::number(c.max_violation)},
                          {"numerator", detail::number(c.numerator)},
                          {"denominator", detail::number(c.denominator)},
                          {"ratio_at_xbar", detail::optional_number(c.ratio)},
                          {"ratio_gap", detail::optional_number(c.ratio_gap)},
                          {"feasible", c.feasible},
                          {"denominator_positive", c.denominator_positive},
                          {"ratio_matches", c.ratio_matches},
                          {"failures", c.failures}};
  } else {
    j["certification"] = nullptr;
  }
  if (rep.dinkelbach) {
    j["dinkelbach"] = {{"status", to_string(rep.dinkelbach->status)},
                       {"residual", detail::number(rep.dinkelbach->value)}};
  } else {
    j["dinkelbach"] = nullptr;
  }
  j["messages"] = rep.messages;
  return j;
}

inline Json to_json(const CheckReport& rep) {
  Json items = Json::array();
  for (const auto& i : rep.items) {
    items.push_back({{"name", i.name},
                     {"passed", i.passed},
                     {"margin", detail::number(i.margin)},
                     {"informational", i.informational},
                     {"message", i.message}});
  }
  return {{"schema", kReportSchema}, {"passed", rep.passed()}, {"items", items}};
}

}  // namespace fracsos
