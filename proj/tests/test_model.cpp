#include <gtest/gtest.h>

#include <random>

#include "fracsos/model.hpp"
#include "support.hpp"

using namespace fracsos;
using namespace fracsos::testing;

namespace {

double eval(const SemiAlgFunction& f, std::vector<double> pt) { return eval_semialg(f, pt); }

/// { y : y_1^2 + y_2^2 <= 1 } as the 3x3 arrow LMI.
LMISet unit_disk() {
  LMISet o;
  o.s = 2;
  o.t = 3;
  o.A.assign(3, Eigen::MatrixXd::Zero(3, 3));
  o.A[0].setIdentity();
  o.A[1](0, 2) = o.A[1](2, 0) = 1.0;
  o.A[2](1, 2) = o.A[2](2, 1) = 1.0;
  return o;
}

FractionalProgram single_function_program(SemiAlgFunction f) {
  FractionalProgram prog;
  prog.n = static_cast<int>(f.h[0].num_vars());
  prog.d = 1;
  prog.numerator = std::move(f);
  prog.denominator_neg = SemiAlgFunction::polynomial(constant(prog.n, -1.0));
  return prog;
}

}  // namespace

// --- evaluation --------------------------------------------------------------

TEST(EvalSemialg, ExampleTwoConstraint) {
  const FractionalProgram prog = example2();
  // f_1 = (x1 - 2)^2 + (x2 - 1)^2 - 1: -1 at the center (2, 1), 4 at the origin.
  EXPECT_NEAR(eval(prog.constraints[0], {2.0, 1.0}), -1.0, 1e-12);
  EXPECT_NEAR(eval(prog.constraints[0], {0.0, 0.0}), 4.0, 1e-12);
  EXPECT_NEAR(eval(prog.constraints[0], {5.0, 5.0}), 24.0, 1e-12);
}

TEST(EvalSemialg, ExampleTwoNumeratorIsEuclideanNorm) {
  const FractionalProgram prog = example2();
  EXPECT_NEAR(eval(prog.numerator, {1.0, 1.0}), std::sqrt(20.0), 1e-7);
  EXPECT_NEAR(eval(prog.numerator, {0.0, 0.0}), 0.0, 1e-7);
  EXPECT_NEAR(eval(prog.numerator, {2.0, -1.0}), std::hypot(5.0, 1.0), 1e-7);
}

TEST(EvalSemialg, ExampleOneClosedForms) {
  const FractionalProgram prog = example1();
  // f_1 = 1 + 4 x1 + x1^2 + x1 x2 + x2^2 + |x1| + |x2|.
  EXPECT_NEAR(eval(prog.constraints[0], {0.0, 0.0}), 1.0, 1e-12);
  EXPECT_NEAR(eval(prog.constraints[0], {-1.0, 0.0}), -1.0, 1e-12);
  EXPECT_NEAR(eval(prog.numerator, {0.5, -0.25}), 0.25 - 0.125 + 0.0625 + std::pow(0.5, 8) + 0.75, 1e-12);
  EXPECT_NEAR(eval(prog.denominator_neg, {1.0, -2.0}), -10.0 + 1.0 + 3.0, 1e-12);
}

TEST(EvalSemialg, CertificateReturnsMaximizer) {
  const FractionalProgram prog = example2();
  const std::vector<double> pt{1.0, 1.0};
  const SemiAlgEvaluation e = eval_semialg_certificate(prog.numerator, pt);
  // Maximizer of 4 y1 + 2 y2 over the unit disk.
  EXPECT_NEAR(e.y(0), 4.0 / std::sqrt(20.0), 1e-6);
  EXPECT_NEAR(e.y(1), 2.0 / std::sqrt(20.0), 1e-6);
  EXPECT_GE(e.W.min_eigenvalue(), -1e-9);
}

TEST(EvalSemialg, WrongDimensionRejected) {
  EXPECT_THROW(eval(example2().numerator, {1.0}), ValidationError);
}

TEST(EvalSemialg, EmptyOmegaReported) {
  LMISet o = LMISet::point();
  o.t = 1;
  o.A[0] = Eigen::MatrixXd::Constant(1, 1, -1.0);
  const SemiAlgFunction f{{constant(1, 0.0)}, o};
  try {
    eval(f, {0.0});
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.kind(), EvaluationError::Kind::empty_omega);
  }
  // An empty interval on the box path and an infeasible LMI on the SDP path.
  const SemiAlgFunction g = box_function(constant(1, 0.0), {x(1, 0)}, {1.0}, {-1.0});
  EXPECT_THROW(eval(g, {0.5}), EvaluationError);
  LMISet d = unit_disk();
  d.A[0] *= -1.0;
  EXPECT_THROW(eval(SemiAlgFunction{{constant(1, 0.0), x(1, 0), x(1, 0)}, d}, {0.5}), EvaluationError);
}

TEST(EvalSemialg, NonCompactOmegaReported) {
  // Omega = { y >= 0 }.
  LMISet o;
  o.s = 1;
  o.t = 1;
  o.A = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  const SemiAlgFunction f{{constant(1, 0.0), x(1, 0)}, o};
  try {
    eval(f, {1.0});
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.kind(), EvaluationError::Kind::omega_not_compact);
  }
}

TEST(EvalSemialgProperty, BoxClosedFormMatchesInnerSdp) {
  std::mt19937 rng(41);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 3, s = 1 + k % 3;
    std::vector<Polynomial> l;
    std::vector<double> lo, hi;
    for (int j = 0; j < s; ++j) {
      l.push_back(random_poly(rng, n, 2));
      lo.push_back(-uniform(rng, 0.0, 2.0));
      hi.push_back(uniform(rng, 0.0, 2.0));
    }
    const SemiAlgFunction f = box_function(random_poly(rng, n, 2), l, lo, hi);
    const auto pt = uniform_vec(rng, n, -2.0, 2.0);
    const double closed = eval_semialg(f, pt);
    const double sdp = eval_semialg_certificate(f, pt).value;
    EXPECT_NEAR(closed, sdp, 1e-8 * (1.0 + std::abs(closed))) << "instance " << k;
  }
}

TEST(EvalSemialgProperty, ConvexAlongSegments) {
  std::mt19937 rng(42);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 2, d = 1 + (k / 2) % 2;
    const FractionalProgram prog = random_instance(rng, n, d);
    for (int i = 1; i <= prog.num_functions(); ++i) {
      const SemiAlgFunction& f = prog.function(i);
      for (int t = 0; t < 10; ++t) {
        const auto a = uniform_vec(rng, n, -2.0, 2.0), b = uniform_vec(rng, n, -2.0, 2.0);
        const double lam = uniform(rng, 0.0, 1.0);
        std::vector<double> mid(n);
        for (int c = 0; c < n; ++c) mid[c] = lam * a[c] + (1 - lam) * b[c];
        const double fa = eval_semialg(f, a), fb = eval_semialg(f, b);
        const double bound = lam * fa + (1 - lam) * fb;
        // The denominator is stored negated: -f_den is concave, f_den convex.
        EXPECT_LE(eval_semialg(f, mid), bound + 1e-9 * (1.0 + std::abs(bound)));
      }
    }
  }
}

TEST(EvalSemialgProperty, DiskSupportFunction) {
  std::mt19937 rng(43);
  const SemiAlgFunction f{{random_poly(rng, 2, 2), random_poly(rng, 2, 1), random_poly(rng, 2, 1)},
                          unit_disk()};
  for (int k = 0; k < 50; ++k) {
    const auto pt = uniform_vec(rng, 2, -2.0, 2.0);
    const double expect = f.h[0](pt) + std::hypot(f.h[1](pt), f.h[2](pt));
    EXPECT_NEAR(eval_semialg(f, pt), expect, 1e-7 * (1.0 + std::abs(expect)));
  }
}

// --- Assumption 2 ---------------------------------------------------------------

TEST(Assumption2, DiskHasUnitMargin) {
  const CheckReport r = check_assumption2(example2());
  ASSERT_TRUE(r.passed());
  EXPECT_NEAR(r.items[1].margin, 1.0, 1e-6);  // numerator: the unit disk
  EXPECT_TRUE(r.items[0].passed);             // constraint: pure polynomial
}

TEST(Assumption2, IntervalMargin) {
  // [-1, 1]: the largest t with t I <= diag(1 - y, 1 + y) is 1 at y = 0.
  const SemiAlgFunction f = box_function(constant(1, 0.0), {x(1, 0)}, {-1.0}, {1.0});
  const CheckReport r = check_assumption2(single_function_program(f));
  ASSERT_TRUE(r.passed());
  EXPECT_NEAR(r.items[0].margin, 1.0, 1e-6);
}

TEST(Assumption2, FlatLmiFails) {
  // diag(y, -y) >= 0 forces y = 0: nonempty but without interior.
  LMISet o;
  o.s = 1;
  o.t = 2;
  o.A = {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
  o.A[1](0, 0) = 1.0;
  o.A[1](1, 1) = -1.0;
  const CheckReport r = check_assumption2(single_function_program({{constant(1, 0.0), x(1, 0)}, o}));
  EXPECT_FALSE(r.passed());
  EXPECT_NEAR(r.items[0].margin, 0.0, 1e-6);
}

TEST(Assumption2, NonCompactFails) {
  LMISet o;
  o.s = 1;
  o.t = 1;
  o.A = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  const CheckReport r = check_assumption2(single_function_program({{constant(1, 0.0), x(1, 0)}, o}));
  EXPECT_FALSE(r.passed());
  EXPECT_NE(r.items[0].message.find("not compact"), std::string::npos);
}

TEST(Assumption2Property, InvariantUnderAppendedIdentityBlock) {
  // Appending an identity block (with zero y-coefficients) keeps Omega and
  // can only lower the margin to at most 1.
  FractionalProgram prog = example2();
  const double before = check_assumption2(prog).items[1].margin;
  LMISet& o = prog.numerator.omega;
  const int t = o.t;
  for (int j = 0; j <= o.s; ++j) {
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(t + 2, t + 2);
    big.topLeftCorner(t, t) = o.A[j];
    if (j == 0) big.bottomRightCorner(2, 2).setIdentity();
    o.A[j] = big;
  }
  o.t = t + 2;
  const CheckReport r = check_assumption2(prog);
  ASSERT_TRUE(r.passed());
  EXPECT_NEAR(r.items[1].margin, std::min(before, 1.0), 1e-6);
  const std::vector<double> pt{0.7, -0.3};
  EXPECT_NEAR(eval_semialg(prog.numerator, pt), eval_semialg(example2().numerator, pt), 1e-7);
}

// --- Slater ----------------------------------------------------------------------

TEST(Slater, ExampleOneInteriorPoint) {
  const std::vector<double> pt{-1.0, 0.0};
  const CheckReport r = check_slater(example1(), pt);
  ASSERT_TRUE(r.passed());
  EXPECT_NEAR(r.items[0].margin, 1.0, 1e-12);
}

TEST(Slater, ExampleTwoCenterPassesOriginAndFarPointFail) {
  const std::vector<double> center{2.0, 1.0}, origin{0.0, 0.0}, far{5.0, 5.0};
  EXPECT_TRUE(check_slater(example2(), center).passed());
  EXPECT_FALSE(check_slater(example2(), origin).passed());
  const CheckReport r = check_slater(example2(), far);
  EXPECT_FALSE(r.passed());
  EXPECT_NEAR(r.items[0].margin, -24.0, 1e-12);
}

TEST(Slater, WrongDimensionRejected) {
  const std::vector<double> pt{1.0};
  EXPECT_THROW(check_slater(example2(), pt), ValidationError);
}

// --- validation -------------------------------------------------------------------

TEST(Validate, ExamplesPass) {
  EXPECT_TRUE(validate(example1()).passed());
  EXPECT_TRUE(validate(example2()).passed());
}

TEST(Validate, DegreeAboveTwoD) {
  FractionalProgram prog = example2();
  prog.numerator.h[0] = power(x(2, 0), 4);
  const CheckReport r = validate(prog);
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.failures().empty());
  EXPECT_NE(r.failures()[0].message.find("degree exceeds 2d"), std::string::npos);
  EXPECT_THROW(require_valid(prog), ValidationError);
}

TEST(Validate, AsymmetricMatrix) {
  FractionalProgram prog = example2();
  prog.numerator.omega.A[1](0, 1) = 0.5;
  const CheckReport r = validate(prog);
  EXPECT_FALSE(r.passed());
  EXPECT_NE(r.failures()[0].message.find("not symmetric"), std::string::npos);
}

TEST(Validate, WrongNumberOfPolynomials) {
  FractionalProgram prog = example2();
  prog.numerator.h.pop_back();
  EXPECT_FALSE(validate(prog).passed());
}

TEST(Validate, NonSosConvexDataFlagged) {
  FractionalProgram prog = example2();
  prog.numerator.h[0] = -1.0 * power(x(2, 0), 2);
  const CheckReport r = validate(prog);
  EXPECT_FALSE(r.passed());
  bool flagged = false;
  for (const auto& f : r.failures()) flagged |= f.name.rfind("sos_convex[num]", 0) == 0;
  EXPECT_TRUE(flagged);
}

TEST(ValidateProperty, RandomInstancesAreValid) {
  std::mt19937 rng(44);
  for (int k = 0; k < 10; ++k) {
    const FractionalProgram prog = random_instance(rng, 1 + k % 2, 1 + (k / 2) % 2);
    EXPECT_TRUE(validate(prog).passed()) << "instance " << k;
    EXPECT_TRUE(check_assumption2(prog).passed()) << "instance " << k;
  }
}
