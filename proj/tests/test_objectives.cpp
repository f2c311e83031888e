#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmpe/dataset.hpp"
#include "rmpe/objectives.hpp"

using namespace rmpe;

namespace {

SparseRowMatrix sparse(const Matrix& m) {
  SparseRowMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

LogisticProblem random_logistic(std::mt19937_64& rng, Index m, Index n, double tau) {
  std::normal_distribution<double> g;
  Matrix Z(m, n);
  Vector y(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) Z(i, j) = g(rng);
    y(i) = g(rng) > 0.0 ? 1.0 : -1.0;
  }
  return {sparse(Z), y, tau};
}

}  // namespace

TEST(Logistic, SingleSampleAtZero) {
  Matrix Z(1, 1);
  Z << 1.0;
  const LogisticProblem p{sparse(Z), Vector::Ones(1), 0.0};
  const auto [f, g] = logistic_value_grad(p, Vector::Zero(1));
  EXPECT_NEAR(f, std::log(2.0), 1e-15);
  EXPECT_NEAR(g(0), -0.5, 1e-15);
}

TEST(Logistic, ZeroWeightsGiveSymmetricValues) {
  std::mt19937_64 rng(1);
  const LogisticProblem p = random_logistic(rng, 30, 5, 0.1);
  const auto [f, g] = logistic_value_grad(p, Vector::Zero(5));
  EXPECT_NEAR(f, 30.0 * std::log(2.0), 1e-12);
  const Vector expected = -0.5 * (p.Z.transpose() * p.y);
  EXPECT_LT((g - expected).norm(), 1e-12);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int t = 0; t < 5; ++t) {
    const LogisticProblem p = random_logistic(rng, 40, 6, 1e-2);
    Vector w(6);
    for (Index i = 0; i < 6; ++i) w(i) = g(rng);
    const Vector grad = logistic_value_grad(p, w).second;
    const double h = 1e-6;
    for (Index i = 0; i < 6; ++i) {
      Vector a = w, b = w;
      a(i) += h;
      b(i) -= h;
      const double fd = (logistic_value_grad(p, a).first - logistic_value_grad(p, b).first) / (2.0 * h);
      EXPECT_NEAR(fd, grad(i), 1e-5 * std::max(1.0, std::abs(grad(i))));
    }
  }
}

TEST(Logistic, LargeMarginsStayFinite) {
  Matrix Z(2, 1);
  Z << 1.0, -1.0;
  const LogisticProblem p{sparse(Z), Vector::Ones(2), 0.0};
  const auto [f, g] = logistic_value_grad(p, Vector::Constant(1, 800.0));
  EXPECT_TRUE(std::isfinite(f));
  EXPECT_NEAR(f, 800.0, 1e-9);
  EXPECT_TRUE(g.allFinite());
  EXPECT_NEAR(g(0), 1.0, 1e-12);
}

TEST(Lipschitz, ScalarExample) {
  Matrix Z(1, 1);
  Z << 1.0;
  const ProblemSpec s = lipschitz_constants(LogisticProblem{sparse(Z), Vector::Ones(1), 0.1});
  EXPECT_NEAR(s.L, 0.35, 1e-12);
  EXPECT_EQ(s.mu, 0.1);
  EXPECT_NEAR(s.M_hess, 1.0 / (6.0 * std::sqrt(3.0)), 1e-15);
}

TEST(Lipschitz, ZeroRowsDoNotChangeL) {
  std::mt19937_64 rng(3);
  const LogisticProblem p = random_logistic(rng, 20, 4, 0.1);
  Matrix Zd = Matrix(p.Z);
  Matrix Za = Matrix::Zero(25, 4);
  Za.topRows(20) = Zd;
  Vector ya = Vector::Ones(25);
  ya.head(20) = p.y;
  const double L1 = lipschitz_constants(p).L;
  const double L2 = lipschitz_constants(LogisticProblem{sparse(Za), ya, 0.1}).L;
  EXPECT_NEAR(L1, L2, 1e-7 * L1);
}

TEST(Lipschitz, PowerIterationMatchesDenseEigensolver) {
  std::mt19937_64 rng(4);
  const LogisticProblem p = random_logistic(rng, 60, 10, 1e-3);
  const Matrix Zd = Matrix(p.Z);
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(Zd.transpose() * Zd).eigenvalues().maxCoeff();
  EXPECT_NEAR(spectral_norm_squared(p.Z), top, 1e-6 * top);
}

TEST(Lipschitz, Errors) {
  Matrix Z = Matrix::Zero(3, 2);
  EXPECT_THROW(spectral_norm_squared(sparse(Z)), EstimationError);
  Matrix One(1, 1);
  One << 1.0;
  EXPECT_THROW(lipschitz_constants(LogisticProblem{sparse(One), Vector::Ones(1), 0.0}), DomainError);
}

TEST(Lipschitz, SyntheticDataIsFinite) {
  const Dataset d = synth_dataset(5, 100, 12);
  const ProblemSpec s = lipschitz_constants(LogisticProblem{d.Z, d.y, 1e-4});
  EXPECT_TRUE(std::isfinite(s.L) && s.L > 0.0);
  EXPECT_TRUE(std::isfinite(s.M_hess) && s.M_hess > 0.0);
}

TEST(Quadratic, IdentityExample) {
  QuadraticProblem p{Matrix::Identity(2, 2), Vector::Zero(2)};
  Vector x(2);
  x << 3, 4;
  const auto [f, g] = quadratic_value_grad(p, x);
  EXPECT_DOUBLE_EQ(f, 12.5);
  EXPECT_EQ(g, x);
}

TEST(Quadratic, GradientVanishesAtMinimizer) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Matrix R(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) R(i, j) = g(rng);
  Vector b(5);
  for (Index i = 0; i < 5; ++i) b(i) = g(rng);
  QuadraticProblem spd{R.transpose() * R + Matrix::Identity(5, 5), b};
  EXPECT_LT(quadratic_value_grad(spd, spd.minimizer()).second.norm(), 1e-10);
  QuadraticProblem ls{R, b, QuadraticForm::least_squares};
  EXPECT_LT(quadratic_value_grad(ls, ls.minimizer()).second.norm(), 1e-9);
}

TEST(Quadratic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Matrix R(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) R(i, j) = g(rng);
  Vector b(4), x(4);
  for (Index i = 0; i < 4; ++i) {
    b(i) = g(rng);
    x(i) = g(rng);
  }
  for (auto form : {QuadraticForm::spd, QuadraticForm::least_squares}) {
    QuadraticProblem p{form == QuadraticForm::spd ? Matrix(R.transpose() * R) : R, b, form};
    const Vector grad = quadratic_value_grad(p, x).second;
    for (Index i = 0; i < 4; ++i) {
      Vector a = x, c = x;
      a(i) += 1e-6;
      c(i) -= 1e-6;
      const double fd = (quadratic_value_grad(p, a).first - quadratic_value_grad(p, c).first) / 2e-6;
      EXPECT_NEAR(fd, grad(i), 1e-6 * std::max(1.0, std::abs(grad(i))));
    }
  }
}

TEST(Quadratic, SpecFromSpectrum) {
  QuadraticProblem p{Matrix(Vector::LinSpaced(3, 1.0, 9.0).asDiagonal()), Vector::Zero(3)};
  const ProblemSpec s = p.spec();
  EXPECT_NEAR(s.L, 9.0, 1e-12);
  EXPECT_NEAR(s.mu, 1.0, 1e-12);
  EXPECT_NEAR(s.kappa(), 9.0, 1e-12);
}
