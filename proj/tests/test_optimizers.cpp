#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmpe/bounds.hpp"
#include "rmpe/optimizers.hpp"

using namespace rmpe;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix diag41() { return vec({4.0, 1.0}).asDiagonal(); }

}  // namespace

TEST(GradientStep, UnitQuadratic) {
  auto grad = [](const Vector& x) { return x; };
  for (auto kind : {StepperKind::gradient_fixed, StepperKind::gradient_short}) {
    const Vector x = gradient_step(vec({2, 0}), grad, StepperSpec{kind, 1.0, 1.0});
    EXPECT_NEAR(x.norm(), 0.0, 1e-15);
  }
}

TEST(GradientStep, ShortStepOnDiag41) {
  const Matrix B = diag41();
  auto grad = [&](const Vector& x) { return Vector(B * x); };
  const Vector x = gradient_step(vec({1, 1}), grad, StepperSpec{StepperKind::gradient_short, 4.0, 1.0});
  EXPECT_NEAR(x(0), 0.0, 1e-15);
  EXPECT_NEAR(x(1), 0.75, 1e-15);
}

TEST(GradientStep, FixedStepSize) {
  EXPECT_DOUBLE_EQ((StepperSpec{StepperKind::gradient_fixed, 4.0, 1.0}.step_size()), 0.4);
  EXPECT_DOUBLE_EQ((StepperSpec{StepperKind::gradient_short, 4.0, 1.0}.step_size()), 0.25);
}

TEST(GradientStep, NonFiniteGradientDiverges) {
  auto grad = [](const Vector& x) { return Vector(x / 0.0); };
  EXPECT_THROW(gradient_step(vec({1}), grad, StepperSpec{StepperKind::gradient_short, 1.0, 0.0}), DivergedError);
}

TEST(StepperSpec, MuZeroOnlyWhereAllowed) {
  EXPECT_NO_THROW((StepperSpec{StepperKind::gradient_short, 1.0, 0.0}.validate()));
  EXPECT_NO_THROW((StepperSpec{StepperKind::nesterov_convex, 1.0, 0.0}.validate()));
  EXPECT_THROW((StepperSpec{StepperKind::nesterov_strong, 1.0, 0.0}.validate()), DomainError);
  EXPECT_THROW((StepperSpec{StepperKind::gradient_fixed, 1.0, 0.0}.validate()), DomainError);
  EXPECT_THROW((StepperSpec{StepperKind::gradient_short, 1.0, 2.0}.validate()), DomainError);
}

TEST(Nesterov, BetaOnDiag41) { EXPECT_NEAR(nesterov_beta(4.0, 1.0), 1.0 / 3.0, 1e-15); }

TEST(Nesterov, MuEqualsLIsGradient) {
  const Matrix B = diag41();
  auto grad = [&](const Vector& x) { return Vector(B * x); };
  NesterovState s = NesterovState::start(vec({1, -2}));
  Vector x = s.x;
  for (int i = 0; i < 5; ++i) {
    s = nesterov_step(s, grad, StepperSpec{StepperKind::nesterov_strong, 4.0, 4.0});
    x = gradient_step(x, grad, StepperSpec{StepperKind::gradient_short, 4.0, 4.0});
    EXPECT_EQ(s.x, x);
  }
}

TEST(Nesterov, ConvexFirstStepIsGradient) {
  const Matrix B = diag41();
  auto grad = [&](const Vector& x) { return Vector(B * x); };
  const NesterovState s =
      nesterov_step(NesterovState::start(vec({1, 1})), grad, StepperSpec{StepperKind::nesterov_convex, 4.0, 0.0});
  EXPECT_NEAR(s.x(0), 0.0, 1e-15);
  EXPECT_NEAR(s.x(1), 0.75, 1e-15);
  EXPECT_EQ(s.x, s.y);
}

TEST(Nesterov, StrongMomentumOnDiag41) {
  const Matrix B = diag41();
  auto grad = [&](const Vector& x) { return Vector(B * x); };
  const StepperSpec spec{StepperKind::nesterov_strong, 4.0, 1.0};
  NesterovState s = nesterov_step(NesterovState::start(vec({1, 1})), grad, spec);
  // x1 = (0, 0.75), y1 = x1 + (x1 - x0)/3.
  EXPECT_NEAR(s.y(0), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.y(1), 0.75 - 0.25 / 3.0, 1e-15);
}

TEST(Chebyshev, ZeroStepsReturnsStart) {
  const auto ys = chebyshev_run(diag41(), vec({1, 2}), 4.0, 1.0, vec({3, 3}), 0);
  ASSERT_EQ(ys.size(), 1u);
  EXPECT_EQ(ys[0], vec({3, 3}));
}

TEST(Chebyshev, FirstStepMatchesT1) {
  const Matrix B = diag41();
  const Vector xs = vec({0.5, -1.0});
  const Vector b = B * xs;
  const Vector x0 = xs + vec({1, 1});
  const auto ys = chebyshev_run(B, b, 4.0, 1.0, x0, 1);
  const double sigma = 0.75;
  // A = I - B/L = diag(0, 0.75); T_1(x) = (2x - sigma)/(2 - sigma).
  const Vector expected = vec({(0.0 - sigma) / (2.0 - sigma), (1.5 - sigma) / (2.0 - sigma)});
  EXPECT_LT((ys[1] - xs - expected).norm(), 1e-14);
  EXPECT_NEAR(expected(0), -0.6, 1e-15);
  EXPECT_NEAR(expected(1), 0.6, 1e-15);
}

TEST(Chebyshev, ErrorRespectsRateBound) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(1.0, 50.0);
  for (int t = 0; t < 20; ++t) {
    const Index n = 8;
    Matrix R(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) R(i, j) = g(rng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(R).householderQ();
    Vector ev(n);
    for (Index i = 0; i < n; ++i) ev(i) = u(rng);
    const double L = ev.maxCoeff(), mu = ev.minCoeff();
    const Matrix B = Q * ev.asDiagonal() * Q.transpose();
    Vector xs(n), x0(n);
    for (Index i = 0; i < n; ++i) {
      xs(i) = g(rng);
      x0(i) = g(rng);
    }
    const auto ys = chebyshev_run(B, B * xs, L, mu, x0, 10);
    const double d0 = (x0 - xs).norm();
    for (long k = 0; k <= 10; ++k)
      EXPECT_LE((ys[static_cast<std::size_t>(k)] - xs).norm(), cheby_rate(k, 1.0 - mu / L) * d0 * (1.0 + 1e-10));
  }
}

TEST(Chebyshev, SigmaZeroIsGradient) {
  const Matrix B = 2.0 * Matrix::Identity(2, 2);
  const auto ys = chebyshev_run(B, vec({2, 4}), 2.0, 2.0, vec({0, 0}), 3);
  EXPECT_LT((ys[1] - vec({1, 2})).norm(), 1e-15);
  EXPECT_LT((ys[3] - vec({1, 2})).norm(), 1e-15);
}

TEST(Chebyshev, InvalidSpectrum) {
  EXPECT_THROW(chebyshev_run(diag41(), vec({1, 1}), 4.0, 0.0, vec({0, 0}), 2), DomainError);
  EXPECT_THROW(chebyshev_run(diag41(), vec({1, 1}), 4.0, 5.0, vec({0, 0}), 2), DomainError);
}

TEST(NesterovPolynomial, LowDegrees) {
  const PolynomialCoeffs n0 = nesterov_polynomial(0, 0.5);
  ASSERT_EQ(n0.size(), 1);
  EXPECT_EQ(n0(0), 1.0);
  const PolynomialCoeffs n1 = nesterov_polynomial(1, 0.5);
  EXPECT_EQ(n1, vec({0, 1}));
  // N_2 = x((1 + b) x - b) = -b x + (1 + b) x^2.
  const PolynomialCoeffs n2 = nesterov_polynomial(2, 0.5);
  EXPECT_EQ(n2, vec({0, -0.5, 1.5}));
}

TEST(NesterovPolynomial, ValueAtOne) {
  for (double beta : {0.1, 0.5, 0.9}) {
    const std::vector<double> betas(50, beta);
    for (Index k = 0; k <= 50; ++k) EXPECT_NEAR(nesterov_eval(k, betas, 1.0), 1.0, 1e-12);
    for (Index k = 0; k <= 10; ++k) EXPECT_NEAR(polyval(nesterov_polynomial(k, beta), 1.0), 1.0, 1e-12);
  }
}

TEST(NesterovPolynomial, EvalMatchesCoefficients) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> betas;
  for (int i = 0; i < 12; ++i) betas.push_back(u(rng));
  for (Index k = 0; k <= 12; ++k)
    for (double x : {0.0, 0.3, 0.9, 1.0})
      EXPECT_NEAR(nesterov_eval(k, betas, x), polyval(nesterov_polynomial(k, betas), x), 1e-12);
}

TEST(NesterovPolynomial, DegreeLimit) { EXPECT_THROW(nesterov_polynomial(51, 0.5), DomainError); }

TEST(NesterovPolynomial, IdentityWithRate) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  for (int t = 0; t < 100; ++t) {
    const double mu = std::pow(10.0, u(rng));
    const double beta = nesterov_beta(1.0, mu), sigma = 1.0 - mu, r = 1.0 - std::sqrt(mu);
    EXPECT_NEAR(sigma * ((1.0 + beta) * r - beta), r * r, 1e-12);
  }
}

TEST(NesterovPolynomial, ConjectureProbe) {
  for (double sigma : {0.5, 0.9}) {
    const double s = std::sqrt(1.0 - sigma);
    const ConjectureProbe p = nesterov_conjecture_probe(10, sigma, (1.0 - s) / (1.0 + s));
    EXPECT_TRUE(p.max_at_sigma);
    EXPECT_NEAR(p.argmax, sigma, 1e-12);
  }
}

TEST(Polyval, Horner) { EXPECT_DOUBLE_EQ(polyval(vec({1, 2, 3}), 2.0), 17.0); }
