#include <gtest/gtest.h>

#include <random>

#include "fracsos/extract.hpp"
#include "support.hpp"

using namespace fracsos;
using namespace fracsos::testing;

namespace {

MomentVector point_mass(const std::vector<double>& pt, int d, double weight = 1.0) {
  const int n = static_cast<int>(pt.size());
  std::vector<double> y;
  for (const auto& alpha : graded_monomials(n, 2 * d)) y.push_back(weight * monomial_value(alpha, pt));
  return MomentVector::full(n, d, std::move(y));
}

/// min 1 / (2 - x^2) over [-1, 1]: value 1/2 at x = 0.
FractionalProgram constant_numerator_program() {
  FractionalProgram prog;
  prog.n = 1;
  prog.d = 1;
  prog.constraints.push_back(SemiAlgFunction::polynomial(power(x(1, 0), 2) - constant(1, 1.0)));
  prog.numerator = SemiAlgFunction::polynomial(constant(1, 1.0));
  prog.denominator_neg = SemiAlgFunction::polynomial(power(x(1, 0), 2) - constant(1, 2.0));
  return prog;
}

FractionalProgram scaled(FractionalProgram prog, double num, double den) {
  for (auto& h : prog.numerator.h) h *= num;
  for (auto& h : prog.denominator_neg.h) h *= den;
  return prog;
}

}  // namespace

// --- extraction --------------------------------------------------------------

TEST(ExtractX, PointMass) {
  const auto x = extract_x(point_mass({2.0, -1.0}, 1, 0.25));
  ASSERT_TRUE(x);
  EXPECT_DOUBLE_EQ((*x)[0], 2.0);
  EXPECT_DOUBLE_EQ((*x)[1], -1.0);
}

TEST(ExtractX, MixtureGivesMean) {
  const MomentVector a = point_mass({1.0, 0.0}, 1, 0.5), b = point_mass({0.0, 3.0}, 1, 0.5);
  std::vector<double> y(a.values().size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = a.values()[k] + b.values()[k];
  const auto x = extract_x(MomentVector::full(2, 1, y));
  ASSERT_TRUE(x);
  EXPECT_DOUBLE_EQ((*x)[0], 0.5);
  EXPECT_DOUBLE_EQ((*x)[1], 1.5);
}

TEST(ExtractX, DegenerateMass) {
  EXPECT_FALSE(extract_x(point_mass({1.0, 1.0}, 1, 1e-7)));
  EXPECT_FALSE(extract_x(point_mass({1.0, 1.0}, 1, 0.0)));
  EXPECT_TRUE(extract_x(point_mass({1.0, 1.0}, 1, 1e-7), 1e-8));
}

// --- certification -----------------------------------------------------------

TEST(Certify, ExampleTwoMinimizer) {
  const std::vector<double> pt{1.0, 1.0};
  const Certification c = certify(example2(), pt, std::sqrt(20.0) / 3.0);
  EXPECT_TRUE(c.passed());
  EXPECT_NEAR(c.constraint_values[0], 0.0, 1e-12);
  EXPECT_NEAR(c.numerator, std::sqrt(20.0), 1e-7);
  EXPECT_NEAR(c.denominator, 3.0, 1e-12);
}

TEST(Certify, InfeasiblePoint) {
  const std::vector<double> pt{5.0, 5.0};
  const Certification c = certify(example2(), pt, 1.0);
  EXPECT_FALSE(c.feasible);
  EXPECT_NEAR(c.max_violation, 24.0, 1e-12);
  EXPECT_FALSE(c.passed());
}

TEST(Certify, RatioMismatch) {
  const std::vector<double> pt{1.0, 1.0};
  const Certification c = certify(example2(), pt, 1.0);
  EXPECT_TRUE(c.feasible);
  EXPECT_FALSE(c.ratio_matches);
  EXPECT_FALSE(c.passed());
}

TEST(Certify, NonPositiveDenominator) {
  FractionalProgram prog = constant_numerator_program();
  prog.constraints.clear();
  const std::vector<double> pt{2.0};
  const Certification c = certify(prog, pt, 0.5);
  EXPECT_FALSE(c.denominator_positive);
  EXPECT_FALSE(c.ratio);
}

// --- Dinkelbach --------------------------------------------------------------

TEST(Dinkelbach, ExampleTwoSignPattern) {
  const double gamma = std::sqrt(20.0) / 3.0;
  const DinkelbachResult at = dinkelbach_check(example2(), gamma);
  ASSERT_TRUE(at.optimal());
  EXPECT_NEAR(at.value, 0.0, 1e-5);
  const DinkelbachResult below = dinkelbach_check(example2(), 0.0);
  ASSERT_TRUE(below.optimal());
  EXPECT_GT(below.value, 1e-3);
  const DinkelbachResult above = dinkelbach_check(example2(), gamma + 0.1);
  ASSERT_TRUE(above.optimal());
  EXPECT_LT(above.value, -1e-3);
}

TEST(Dinkelbach, NegativeParameterRejected) {
  EXPECT_THROW(dinkelbach_check(example2(), -1.0), ValidationError);
}

// --- end to end --------------------------------------------------------------

TEST(SolveProgram, ExampleTwo) {
  const SolveReport r = solve_program(example2());
  ASSERT_EQ(r.outcome, Outcome::certified_optimal);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_NEAR(*r.optimal_value, std::sqrt(20.0) / 3.0, 1e-6);
  EXPECT_NEAR((*r.x_bar)[0], 1.0, 1e-5);
  EXPECT_NEAR((*r.x_bar)[1], 1.0, 1e-5);
  ASSERT_TRUE(r.dinkelbach);
  EXPECT_NEAR(r.dinkelbach->value, 0.0, 1e-5);
  EXPECT_EQ(r.z_blocks.size(), 2u);
}

TEST(SolveProgram, ExampleOne) {
  ProgramOptions opts;
  opts.relax.basis_reduction = true;
  const SolveReport r = solve_program(example1(), opts);
  ASSERT_EQ(r.outcome, Outcome::certified_optimal);
  EXPECT_NEAR(*r.optimal_value, 0.0558, 1e-3);
  EXPECT_NEAR((*r.x_bar)[0], -0.3820, 1e-3);
  EXPECT_NEAR((*r.x_bar)[1], 0.0, 1e-3);
  EXPECT_TRUE(r.certification->passed());
}

TEST(SolveProgram, ConstantNumerator) {
  const SolveReport r = solve_program(constant_numerator_program());
  ASSERT_EQ(r.outcome, Outcome::certified_optimal);
  EXPECT_NEAR(*r.optimal_value, 0.5, 1e-6);
  EXPECT_NEAR((*r.x_bar)[0], 0.0, 1e-5);
}

TEST(SolveProgram, InfeasibleProgram) {
  FractionalProgram prog = constant_numerator_program();
  prog.constraints[0] = SemiAlgFunction::polynomial(power(x(1, 0), 2) + constant(1, 1.0));
  const SolveReport r = solve_program(prog);
  EXPECT_EQ(r.outcome, Outcome::infeasible);
  EXPECT_EQ(r.exit_code(), 3);
  EXPECT_FALSE(r.optimal_value);
}

TEST(SolveProgram, IterationLimitIsSolverFailure) {
  ProgramOptions opts;
  opts.solver.max_iter = 2;
  const SolveReport r = solve_program(example2(), opts);
  EXPECT_EQ(r.outcome, Outcome::solver_failure);
  EXPECT_EQ(r.exit_code(), 4);
}

TEST(SolveProgram, DinkelbachCanBeDisabled) {
  ProgramOptions opts;
  opts.dinkelbach = false;
  EXPECT_FALSE(solve_program(example2(), opts).dinkelbach);
}

// --- invariants over random instances ----------------------------------------

TEST(SolveProgramProperty, ExtractedPointIsFeasibleAndAttainsBound) {
  std::mt19937 rng(61);
  for (int k = 0; k < 12; ++k) {
    const FractionalProgram prog = random_instance(rng, 1 + k % 2, 1 + (k / 2) % 2);
    const SolveReport r = solve_program(prog);
    ASSERT_TRUE(r.optimal_value) << "instance " << k;
    ASSERT_TRUE(r.x_bar) << "instance " << k;
    // Extraction feasibility: Jensen puts x_bar in the feasible set.
    EXPECT_LE(r.certification->max_violation, kFeasibilityTol) << "instance " << k;
    // Lower bound: the ratio at x_bar is at least the relaxation value, and equal at optimum.
    ASSERT_TRUE(r.certification->ratio);
    EXPECT_GE(*r.certification->ratio, *r.optimal_value - 1e-6);
    EXPECT_EQ(r.outcome, Outcome::certified_optimal) << "instance " << k;
    // Dinkelbach consistency.
    ASSERT_TRUE(r.dinkelbach && r.dinkelbach->optimal());
    EXPECT_NEAR(r.dinkelbach->value, 0.0, kDinkelbachTol * (1.0 + *r.optimal_value));
  }
}

TEST(SolveProgramProperty, ScaleCovariance) {
  std::mt19937 rng(62);
  for (int k = 0; k < 6; ++k) {
    const FractionalProgram prog = random_instance(rng, 1 + k % 2, 1 + (k / 2) % 2);
    const double a = uniform(rng, 0.2, 5.0), b = uniform(rng, 0.2, 5.0);
    const SolveReport base = solve_program(prog);
    const SolveReport sc = solve_program(scaled(prog, a, b));
    ASSERT_TRUE(base.optimal_value && sc.optimal_value);
    EXPECT_NEAR(*sc.optimal_value, a / b * *base.optimal_value, 1e-6 * (1.0 + *sc.optimal_value));
    // The minimizer can be ill-conditioned near a flat optimum, so compare
    // through the original program: the rescaled solution is still optimal.
    EXPECT_TRUE(certify(prog, *sc.x_bar, *base.optimal_value).passed()) << "instance " << k;
  }
}
