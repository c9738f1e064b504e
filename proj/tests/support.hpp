#pragma once

// Shared fixtures for the test suites and the acceptance runner: problem
// files, polynomial helpers, and random generators for valid programs.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fracsos/basis.hpp"
#include "fracsos/io.hpp"
#include "fracsos/model.hpp"
#include "fracsos/moment.hpp"
#include "fracsos/polynomial.hpp"

#ifndef FRACSOS_PROBLEMS
#error "FRACSOS_PROBLEMS must point at the problems/ directory"
#endif

namespace fracsos::testing {

inline std::string problem_path(const std::string& name) {
  return std::string(FRACSOS_PROBLEMS) + "/" + name;
}

inline FractionalProgram example1() { return load_program(problem_path("ex1.json")); }
inline FractionalProgram example2() { return load_program(problem_path("ex2.json")); }

inline Polynomial power(const Polynomial& p, int k) {
  Polynomial r = Polynomial::constant(p.num_vars(), 1.0);
  for (int i = 0; i < k; ++i) r = r * p;
  return r;
}

inline Polynomial x(int n, int k) { return Polynomial::variable(n, k); }
inline Polynomial constant(int n, double c) { return Polynomial::constant(n, c); }

/// a . x + b
inline Polynomial affine(const std::vector<double>& a, double b) {
  const int n = static_cast<int>(a.size());
  Polynomial p = constant(n, b);
  for (int k = 0; k < n; ++k) p += a[k] * x(n, k);
  return p;
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> uniform_vec(std::mt19937& rng, int n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& e : v) e = uniform(rng, lo, hi);
  return v;
}

/// Random polynomial of degree <= deg with coefficients in [-1, 1].
inline Polynomial random_poly(std::mt19937& rng, int n, int deg) {
  Polynomial p(n);
  for (const auto& alpha : graded_monomials(n, deg)) p.add_term(alpha, uniform(rng, -1.0, 1.0));
  return p;
}

/// sum_l q_l^2 with q_l random of degree <= d.
inline Polynomial random_sos(std::mt19937& rng, int n, int d, int terms) {
  Polynomial p(n);
  for (int l = 0; l < terms; ++l) {
    const Polynomial q = random_poly(rng, n, d);
    p += q * q;
  }
  return p;
}

/// sum_k w_k (a_k . x + b_k)^{2 j_k}: SOS-convex, of degree <= 2d.
inline Polynomial random_sos_convex(std::mt19937& rng, int n, int d, int terms) {
  Polynomial p = affine(uniform_vec(rng, n, -1.0, 1.0), 0.0);
  for (int k = 0; k < terms; ++k) {
    const int j = std::uniform_int_distribution<int>(1, d)(rng);
    p += uniform(rng, 0.1, 1.0) * power(affine(uniform_vec(rng, n, -1.0, 1.0), uniform(rng, -1, 1)), 2 * j);
  }
  return p;
}

/// Convex combination of point evaluations, y_0 = 1.
inline MomentVector random_mixture_moments(std::mt19937& rng, int n, int d, int atoms) {
  std::vector<double> w(atoms);
  for (double& e : w) e = uniform(rng, 0.05, 1.0);
  double total = 0.0;
  for (double e : w) total += e;
  const auto support = graded_monomials(n, 2 * d);
  std::vector<double> y(support.size(), 0.0);
  for (int a = 0; a < atoms; ++a) {
    const auto pt = uniform_vec(rng, n, -1.5, 1.5);
    for (std::size_t k = 0; k < support.size(); ++k) {
      y[k] += w[a] / total * monomial_value(support[k], pt);
    }
  }
  return MomentVector::full(n, d, std::move(y));
}

/// h0 + sup over the box [lo, hi]^s of sum_j y_j l_j(x).
inline SemiAlgFunction box_function(Polynomial h0, const std::vector<Polynomial>& l,
                                    const std::vector<double>& lo, const std::vector<double>& hi) {
  SemiAlgFunction f;
  f.h.push_back(std::move(h0));
  f.h.insert(f.h.end(), l.begin(), l.end());
  f.omega = l.empty() ? LMISet::point() : LMISet::box(lo, hi);
  return f;
}

/// Search box [-2, 2]^n contains the feasible set of every random instance.
inline constexpr double kRandomBox = 2.0;

/// A valid program with n <= 2, d <= 2 and box-type Omega:
///   constraint  |x - c|^2 (+ w x_1^4) + |a . x| - r^2 <= 0, a set inside [-2, 2]^n
///   numerator   sum of squared affine forms (+ a quartic) + sup_box of linear forms >= 0
///   denominator C - q(x) - sup_box of linear forms, with C chosen so it stays >= 0.5 on the box
inline FractionalProgram random_instance(std::mt19937& rng, int n, int d) {
  FractionalProgram prog;
  prog.n = n;
  prog.d = d;
  auto num_abs = [&] { return std::uniform_int_distribution<int>(0, 2)(rng); };
  auto box_terms = [&](int s, std::vector<Polynomial>& l, std::vector<double>& lo,
                       std::vector<double>& hi) {
    for (int j = 0; j < s; ++j) {
      l.push_back(affine(uniform_vec(rng, n, -0.5, 0.5), uniform(rng, -0.3, 0.3)));
      lo.push_back(-uniform(rng, 0.2, 1.0));
      hi.push_back(uniform(rng, 0.2, 1.0));
    }
  };

  {
    const auto c = uniform_vec(rng, n, -0.5, 0.5);
    const double r = uniform(rng, 0.6, 1.4);
    Polynomial h0 = constant(n, -r * r);
    for (int k = 0; k < n; ++k) h0 += power(x(n, k) - constant(n, c[k]), 2);
    if (d >= 2) h0 += uniform(rng, 0.0, 0.3) * power(x(n, 0), 4);
    std::vector<Polynomial> l;
    std::vector<double> lo, hi;
    if (std::bernoulli_distribution(0.5)(rng)) {
      l.push_back(affine(uniform_vec(rng, n, -0.3, 0.3), 0.0));
      lo.push_back(-1.0);
      hi.push_back(1.0);
    }
    prog.constraints.push_back(box_function(h0, l, lo, hi));
  }
  {
    Polynomial h0 = constant(n, uniform(rng, 0.0, 0.5));
    for (int k = 0; k < n; ++k) {
      h0 += uniform(rng, 0.2, 1.0) * power(affine(uniform_vec(rng, n, -1, 1), uniform(rng, -1, 1)), 2);
    }
    if (d >= 2) {
      h0 += uniform(rng, 0.0, 0.5) * power(affine(uniform_vec(rng, n, -1, 1), uniform(rng, -1, 1)), 4);
    }
    std::vector<Polynomial> l;
    std::vector<double> lo, hi;
    box_terms(num_abs(), l, lo, hi);
    prog.numerator = box_function(h0, l, lo, hi);
  }
  {
    Polynomial q(n);
    for (int k = 0; k < n; ++k) {
      q += uniform(rng, 0.0, 0.3) * power(affine(uniform_vec(rng, n, -1, 1), 0.0), 2);
    }
    if (d >= 2) q += uniform(rng, 0.0, 0.1) * power(x(n, n - 1), 4);
    std::vector<Polynomial> l;
    std::vector<double> lo, hi;
    box_terms(num_abs(), l, lo, hi);
    // Largest value of q + sup_box over a grid of [-2, 2]^n, padded.
    const SemiAlgEvaluator probe(box_function(q, l, lo, hi));
    double peak = 0.0;
    const int steps = 41;
    std::vector<double> pt(n);
    for (int a = 0; a < steps; ++a) {
      for (int b = 0; b < (n == 2 ? steps : 1); ++b) {
        pt[0] = -kRandomBox + 2 * kRandomBox * a / (steps - 1);
        if (n == 2) pt[1] = -kRandomBox + 2 * kRandomBox * b / (steps - 1);
        peak = std::max(peak, probe(pt));
      }
    }
    const double C = 1.25 * peak + uniform(rng, 0.5, 2.0);
    prog.denominator_neg = box_function(q - constant(n, C), l, lo, hi);
  }
  require_valid(prog);
  return prog;
}

}  // namespace fracsos::testing
