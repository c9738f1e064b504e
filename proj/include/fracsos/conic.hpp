#pragma once

#include <algorithm>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracsos/symmatrix.hpp"

namespace fracsos {

enum class ConeKind { free, nonneg, psd };
enum class Sense { minimize, maximize };

inline const char* to_string(ConeKind k) {
  switch (k) {
    case ConeKind::free: return "free";
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::psd: return "psd";
  }
  return "?";
}

/// Cone product R^f x R^l_+ x S^{k_1}_+ x ... ; PSD blocks are stored in svec form.
struct ConeStructure {
  int num_free = 0;
  int num_nonneg = 0;
  std::vector<int> psd_dims;

  int num_vars() const {
    int n = num_free + num_nonneg;
    for (int k : psd_dims) n += svec_size(k);
    return n;
  }

  /// Barrier degree of the cone part.
  int degree() const {
    int d = num_nonneg;
    for (int k : psd_dims) d += k;
    return d;
  }
};

struct LayoutEntry {
  std::string name;
  int offset = 0;
  int length = 0;
  ConeKind kind = ConeKind::free;
  int psd_dim = 0;  // matrix order for PSD entries
};

/// Named spans of the variable vector.
class VariableLayout {
 public:
  void add(LayoutEntry e) {
    if (index_.count(e.name)) throw ValidationError("duplicate layout name " + e.name);
    index_.emplace(e.name, entries_.size());
    entries_.push_back(std::move(e));
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  const LayoutEntry& at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ValidationError("no layout entry " + std::string(name));
    return entries_[it->second];
  }

  const std::vector<LayoutEntry>& entries() const { return entries_; }

  Eigen::VectorXd unpack(const Eigen::VectorXd& x, std::string_view name) const {
    const auto& e = at(name);
    return x.segment(e.offset, e.length);
  }

  SymMatrix unpack_matrix(const Eigen::VectorXd& x, std::string_view name) const {
    const auto& e = at(name);
    if (e.kind != ConeKind::psd) throw ValidationError(e.name + " is not a matrix variable");
    return SymMatrix::symmetrized(smat_dense(x.segment(e.offset, e.length)));
  }

  void pack(Eigen::VectorXd& x, std::string_view name, const Eigen::VectorXd& v) const {
    const auto& e = at(name);
    if (v.size() != e.length) throw ValidationError("pack: length mismatch for " + e.name);
    x.segment(e.offset, e.length) = v;
  }

  void pack_matrix(Eigen::VectorXd& x, std::string_view name, const SymMatrix& m) const {
    pack(x, name, svec(m));
  }

  /// Spans are disjoint and cover [0, n).
  bool is_exhaustive(int n) const {
    std::vector<int> hit(n, 0);
    for (const auto& e : entries_) {
      if (e.offset < 0 || e.offset + e.length > n) return false;
      for (int k = e.offset; k < e.offset + e.length; ++k) {
        if (hit[k]++) return false;
      }
    }
    return std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; });
  }

 private:
  std::vector<LayoutEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Smallest cone "coordinate" of x: the minimum over nonnegative entries and
/// over the smallest eigenvalue of each PSD block (free entries are ignored).
/// Nonnegative iff x lies in the cone; +infinity when there is no cone part.
inline double cone_margin(const ConeStructure& cones, const Eigen::VectorXd& x) {
  if (x.size() != cones.num_vars()) throw ValidationError("cone_margin: length mismatch");
  double m = std::numeric_limits<double>::infinity();
  if (cones.num_nonneg > 0) m = std::min(m, x.segment(cones.num_free, cones.num_nonneg).minCoeff());
  int off = cones.num_free + cones.num_nonneg;
  for (int k : cones.psd_dims) {
    const int len = svec_size(k);
    if (k > 0) m = std::min(m, smat(x.segment(off, len)).min_eigenvalue());
    off += len;
  }
  return m;
}

/// min/max c^T x  s.t.  A x = b,  x in cones.
struct ConicProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  ConeStructure cones;
  Sense sense = Sense::minimize;
  VariableLayout layout;
  std::vector<std::string> row_labels;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  void check_well_formed() const {
    const int n = cones.num_vars();
    if (c.size() != n || A.cols() != n) {
      throw ValidationError("conic program: variable count does not match cone structure");
    }
    if (A.rows() != b.size()) throw ValidationError("conic program: A and b row mismatch");
    if (!layout.entries().empty() && !layout.is_exhaustive(n)) {
      throw ValidationError("conic program: layout spans are not disjoint and exhaustive");
    }
    if (!c.allFinite() || !A.allFinite() || !b.allFinite()) {
      throw ValidationError("conic program: non-finite data");
    }
  }

  double objective(const Eigen::VectorXd& x) const { return c.dot(x); }
};

/// Incremental assembly: declare variables, then add rows referencing them.
/// Coordinates are assigned free-first, then nonnegative, then PSD blocks,
/// each group in declaration order.
class ConicBuilder {
 public:
  using Var = std::string;

  void add_free(const std::string& name, int length) { declare(name, length, ConeKind::free, 0); }
  void add_nonneg(const std::string& name, int length) {
    declare(name, length, ConeKind::nonneg, 0);
  }
  void add_psd(const std::string& name, int dim) {
    declare(name, svec_size(dim), ConeKind::psd, dim);
  }

  /// Coordinates are fixed on first use after all declarations.
  int coord(const std::string& name, int local) {
    finalize();
    const auto& e = layout_.at(name);
    if (local < 0 || local >= e.length) throw ValidationError("coordinate out of range in " + name);
    return e.offset + local;
  }

  /// Coordinate of matrix entry (i, j) of a PSD variable and the factor that
  /// turns the svec coordinate into the entry value.
  std::pair<int, double> entry(const std::string& name, int i, int j) {
    finalize();
    const auto& e = layout_.at(name);
    return {e.offset + svec_index(i, j, e.psd_dim), i == j ? 1.0 : M_SQRT1_2};
  }

  int begin_row(std::string label, double rhs) {
    finalize();
    rows_.push_back({std::move(label), rhs, {}});
    return static_cast<int>(rows_.size()) - 1;
  }

  void add_coef(int row, int col, double v) {
    if (v != 0.0) rows_.at(row).coefs.emplace_back(col, v);
  }

  /// Adds coefficient vector for <M, X> where X is the named PSD variable.
  void add_inner(int row, const std::string& name, const SymMatrix& m) {
    finalize();
    const auto& e = layout_.at(name);
    const Eigen::VectorXd s = svec(m);
    for (int k = 0; k < s.size(); ++k) add_coef(row, e.offset + k, s(k));
  }

  void set_objective(int col, double v) {
    finalize();
    objective_[col] += v;
  }

  void set_sense(Sense s) { sense_ = s; }

  ConicProgram build() {
    finalize();
    ConicProgram cp;
    cp.cones = cones_;
    const int n = cones_.num_vars();
    const int m = static_cast<int>(rows_.size());
    cp.c = Eigen::VectorXd::Zero(n);
    for (auto [k, v] : objective_) cp.c(k) = v;
    cp.A = Eigen::MatrixXd::Zero(m, n);
    cp.b = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r) {
      cp.b(r) = rows_[r].rhs;
      for (auto [k, v] : rows_[r].coefs) cp.A(r, k) += v;
      cp.row_labels.push_back(rows_[r].label);
    }
    cp.sense = sense_;
    cp.layout = layout_;
    cp.check_well_formed();
    return cp;
  }

  const VariableLayout& layout() {
    finalize();
    return layout_;
  }

 private:
  struct Decl {
    std::string name;
    int length;
    ConeKind kind;
    int psd_dim;
  };
  struct Row {
    std::string label;
    double rhs;
    std::vector<std::pair<int, double>> coefs;
  };

  void declare(const std::string& name, int length, ConeKind kind, int psd_dim) {
    if (finalized_) throw std::logic_error("ConicBuilder: variable declared after first row");
    decls_.push_back({name, length, kind, psd_dim});
  }

  void finalize() {
    if (finalized_) return;
    finalized_ = true;
    int offset = 0;
    for (ConeKind kind : {ConeKind::free, ConeKind::nonneg, ConeKind::psd}) {
      for (const auto& d : decls_) {
        if (d.kind != kind) continue;
        layout_.add({d.name, offset, d.length, d.kind, d.psd_dim});
        offset += d.length;
        if (kind == ConeKind::free) cones_.num_free += d.length;
        if (kind == ConeKind::nonneg) cones_.num_nonneg += d.length;
        if (kind == ConeKind::psd) cones_.psd_dims.push_back(d.psd_dim);
      }
    }
  }

  bool finalized_ = false;
  std::vector<Decl> decls_;
  VariableLayout layout_;
  ConeStructure cones_;
  std::vector<Row> rows_;
  std::map<int, double> objective_;
  Sense sense_ = Sense::minimize;
};

/// Sparse text dump for debugging against external solvers.
///
///   # fracsos conic program
///   sense min|max
///   vars <n> rows <m>
///   cones free <f> nonneg <l> psd <k> <d_1> ... <d_k>
///   c <col> <value>        (one line per nonzero of c)
///   b <row> <value>        (one line per nonzero of b)
///   A <row> <col> <value>  (one line per nonzero of A)
///
/// Indices are zero-based; PSD blocks use svec coordinates (upper triangle,
/// row by row, off-diagonals scaled by sqrt(2)).
inline void write_sparse_text(std::ostream& os, const ConicProgram& cp) {
  os << "# fracsos conic program\n";
  os << "sense " << (cp.sense == Sense::minimize ? "min" : "max") << '\n';
  os << "vars " << cp.num_vars() << " rows " << cp.num_rows() << '\n';
  os << "cones free " << cp.cones.num_free << " nonneg " << cp.cones.num_nonneg << " psd "
     << cp.cones.psd_dims.size();
  for (int k : cp.cones.psd_dims) os << ' ' << k;
  os << '\n' << std::setprecision(17);
  for (int k = 0; k < cp.c.size(); ++k) {
    if (cp.c(k) != 0.0) os << "c " << k << ' ' << cp.c(k) << '\n';
  }
  for (int r = 0; r < cp.b.size(); ++r) {
    if (cp.b(r) != 0.0) os << "b " << r << ' ' << cp.b(r) << '\n';
  }
  for (int r = 0; r < cp.A.rows(); ++r) {
    for (int k = 0; k < cp.A.cols(); ++k) {
      if (cp.A(r, k) != 0.0) os << "A " << r << ' ' << k << ' ' << cp.A(r, k) << '\n';
    }
  }
}

}  // namespace fracsos
