// fracsos: command-line front end.
//
//   fracsos solve FILE  [--tol T] [--max-iter N] [--basis-reduction] [--json|--text]
//                       [--export-sdp PATH] [--no-dinkelbach] [--verbose]
//   fracsos check FILE  [--slater-point "x1,x2,..."] [--sos-convex-samples K] [--json]
//   fracsos oracle FILE --box "lo1:hi1,lo2:hi2" [--steps N] [--compare REPORT] [--json]
//
// Exit codes: 0 success (certified optimum / all checks pass), 1 input error,
// 2 degenerate or uncertified solve / failed check, 3 infeasible or unbounded
// relaxation, 4 solver failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracsos/extract.hpp"
#include "fracsos/io.hpp"
#include "fracsos/model.hpp"
#include "fracsos/relax.hpp"
#include "fracsos/verify.hpp"

namespace {

using namespace fracsos;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCheckFailed = 2;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
  return s + ")";
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> x;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse coordinate \"" + tok + "\"");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos) {
      throw ValidationError("cannot parse coordinate \"" + tok + "\"");
    }
    x.push_back(v);
  }
  return x;
}

std::vector<std::pair<double, double>> parse_box(const std::string& text) {
  std::vector<std::pair<double, double>> box;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ValidationError("box interval \"" + tok + "\" needs lo:hi");
    const auto lo = parse_point(tok.substr(0, colon));
    const auto hi = parse_point(tok.substr(colon + 1));
    if (lo.size() != 1 || hi.size() != 1) throw ValidationError("bad box interval \"" + tok + "\"");
    box.emplace_back(lo[0], hi[0]);
  }
  return box;
}

void print_text(const SolveReport& rep) {
  std::cout << "outcome:       " << to_string(rep.outcome) << "\n";
  std::cout << "solver status: " << to_string(rep.status) << " (" << rep.iterations
            << " iterations)\n";
  std::cout << "residuals:     primal " << fmt(rep.residuals.primal_feas, "%.2e") << ", dual "
            << fmt(rep.residuals.dual_feas, "%.2e") << ", gap " << fmt(rep.residuals.gap, "%.2e")
            << "\n";
  if (rep.optimal_value) std::cout << "optimal value: " << fmt(*rep.optimal_value) << "\n";
  if (rep.y_bar) std::cout << "y_0:           " << fmt(rep.y_bar->y0()) << "\n";
  if (rep.x_bar) std::cout << "x_bar:         " << fmt_vec(*rep.x_bar) << "\n";
  if (rep.certification) {
    const auto& c = *rep.certification;
    std::cout << "certification: " << (c.passed() ? "passed" : "FAILED") << "\n";
    std::cout << "  max constraint value " << fmt(c.max_violation) << "\n";
    std::cout << "  denominator          " << fmt(c.denominator) << "\n";
    if (c.ratio) std::cout << "  ratio at x_bar       " << fmt(*c.ratio) << "\n";
    if (c.ratio_gap) std::cout << "  |ratio - value|      " << fmt(*c.ratio_gap, "%.2e") << "\n";
  }
  if (rep.dinkelbach) {
    std::cout << "dinkelbach:    " << to_string(rep.dinkelbach->status);
    if (rep.dinkelbach->optimal()) std::cout << ", residual " << fmt(rep.dinkelbach->value, "%.2e");
    std::cout << "\n";
  }
  for (const auto& m : rep.messages) std::cout << "note: " << m << "\n";
}

int cmd_solve(const std::string& path, double tol, int max_iter, bool reduce, bool json,
              const std::string& export_path, bool dinkelbach, bool verbose) {
  const FractionalProgram prog = load_program(path);
  ProgramOptions opts;
  opts.solver.tol_feas = tol;
  opts.solver.tol_gap = tol;
  opts.solver.max_iter = max_iter;
  opts.solver.verbosity = verbose ? 1 : 0;
  opts.solver.validate();
  opts.relax.basis_reduction = reduce;
  opts.dinkelbach = dinkelbach;

  if (!export_path.empty()) {
    std::ofstream out(export_path);
    if (!out) throw ValidationError("cannot write " + export_path);
    write_sparse_text(out, build_Q(prog, opts.relax));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SolveReport rep = solve_program(prog, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (json) {
    std::cout << to_json(rep).dump(2) << "\n";
  } else {
    print_text(rep);
  }
  if (verbose) std::cerr << "solve time: " << fmt(secs, "%.3f") << " s\n";
  return rep.exit_code();
}

int cmd_check(const std::string& path, const std::string& slater, int samples, bool json) {
  const FractionalProgram prog = load_program(path);
  ValidateOptions vopts;
  vopts.sos_convex_samples = samples;
  CheckReport rep = validate(prog, vopts);
  rep.merge(check_assumption2(prog));
  if (!slater.empty()) rep.merge(check_slater(prog, parse_point(slater)));
  if (json) {
    std::cout << to_json(rep).dump(2) << "\n";
  } else {
    for (const auto& i : rep.items) {
      std::cout << (i.informational ? "info" : (i.passed ? "pass" : "FAIL")) << "  " << i.name
                << "  margin " << fmt(i.margin) << "  " << i.message << "\n";
    }
    std::cout << (rep.passed() ? "all checks passed" : "some checks failed") << "\n";
  }
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_oracle(const std::string& path, const std::string& box, int steps,
               const std::string& compare, bool json) {
  const FractionalProgram prog = load_program(path);
  GridSpec spec;
  spec.box = parse_box(box);
  spec.steps = steps;
  const OracleResult res = grid_oracle(prog, spec);

  std::optional<double> reference;
  if (!compare.empty()) {
    const Json j = parse_json_text(read_file(compare));
    auto it = j.find("optimal_value");
    if (it == j.end() || !it->is_number()) {
      throw ValidationError(compare + ": report has no numeric optimal_value");
    }
    reference = it->get<double>();
  }
  if (json) {
    Json out;
    out["schema"] = kReportSchema;
    out["value"] = res.value;
    out["argmin"] = res.argmin;
    out["evaluated"] = res.evaluated;
    out["feasible"] = res.feasible;
    if (reference) {
      out["reference_value"] = *reference;
      out["gap"] = res.value - *reference;
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "oracle value:  " << fmt(res.value) << "\n";
    std::cout << "argmin:        " << fmt_vec(res.argmin) << "\n";
    std::cout << "grid points:   " << res.evaluated << " (" << res.feasible << " feasible)\n";
    if (reference) {
      std::cout << "reference:     " << fmt(*reference) << "\n";
      std::cout << "gap:           " << fmt(res.value - *reference, "%.3e") << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter-free solver for fractional programs with SOS-convex semi-algebraic data"};
  app.require_subcommand(1);

  std::string file;
  double tol = 1e-8;
  int max_iter = 200;
  bool reduce = false, json = false, text = false, verbose = false, no_dinkelbach = false;
  std::string export_path;
  auto* solve = app.add_subcommand("solve", "Solve a program and certify the minimizer");
  solve->add_option("file", file, "Problem file (JSON)")->required();
  solve->add_option("--tol", tol, "Solver feasibility and gap tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);
  solve->add_flag("--basis-reduction", reduce, "Restrict the monomial basis to the Newton polytope");
  auto* json_flag = solve->add_flag("--json", json, "Print the report as JSON");
  solve->add_flag("--text", text, "Print the report as text (default)")->excludes(json_flag);
  solve->add_option("--export-sdp", export_path, "Write the moment program in sparse text form");
  solve->add_flag("--no-dinkelbach", no_dinkelbach, "Skip the Dinkelbach zero check");
  solve->add_flag("--verbose", verbose, "Print solver iterations and timing to stderr");

  std::string slater;
  int samples = 8;
  bool check_json = false;
  auto* check = app.add_subcommand("check", "Validate a program and its standing assumptions");
  check->add_option("file", file, "Problem file (JSON)")->required();
  check->add_option("--slater-point", slater, "Candidate strictly feasible point \"x1,x2,...\"");
  check->add_option("--sos-convex-samples", samples, "SOS-convexity spot checks per function")
      ->check(CLI::NonNegativeNumber);
  check->add_flag("--json", check_json, "Print the report as JSON");

  std::string box, compare;
  int steps = 201;
  bool oracle_json = false;
  auto* oracle = app.add_subcommand("oracle", "Brute-force grid search for the optimal ratio");
  oracle->add_option("file", file, "Problem file (JSON)")->required();
  oracle->add_option("--box", box, "Search box \"lo1:hi1,lo2:hi2,...\"")->required();
  oracle->add_option("--steps", steps, "Grid points per axis (>= 2)");
  oracle->add_option("--compare", compare, "JSON report of a previous solve to compare against");
  oracle->add_flag("--json", oracle_json, "Print the result as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve) {
      return cmd_solve(file, tol, max_iter, reduce, json, export_path, !no_dinkelbach, verbose);
    }
    if (*check) return cmd_check(file, slater, samples, check_json);
    if (*oracle) {
      if (steps < 2) throw ValidationError("grid needs steps >= 2");
      return cmd_oracle(file, box, steps, compare, oracle_json);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << file << ":" << e.line() << ":" << e.column() << ": " << e.what()
              << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EmptyGridSample& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const EvaluationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return kExitInput;
}
