#include <gtest/gtest.h>

#include <numbers>

#include "poisson_sharp/spectral.hpp"

using namespace poisson_sharp;

namespace {
constexpr double pi2 = std::numbers::pi * std::numbers::pi;

const std::vector<EigenPair>& square_pairs() {
  static const auto pairs = eigenpairs(make_domain("square:1", 64), 4);
  return pairs;
}
}  // namespace

TEST(Eigen, SquareClassicalValues) {
  const auto& p = square_pairs();
  ASSERT_EQ(p.size(), 4u);
  EXPECT_NEAR(p[0].lambda / (2 * pi2), 1.0, 5e-3);
  EXPECT_NEAR(p[1].lambda / (5 * pi2), 1.0, 1e-2);
  EXPECT_NEAR(p[2].lambda / (5 * pi2), 1.0, 1e-2);
  EXPECT_NEAR(p[3].lambda / (8 * pi2), 1.0, 1e-2);
  // Exact discrete value for the face-Dirichlet stencil.
  const double h = 1.0 / 64, s = std::sin(std::numbers::pi * h / 2);
  EXPECT_NEAR(p[0].lambda, 8.0 / (h * h) * s * s, 1e-8);
}

TEST(Eigen, ContractResidualOrderingOrthogonality) {
  const auto& p = square_pairs();
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i].k, static_cast<int>(i + 1));
    EXPECT_LE(p[i].residual, 1e-8);
    EXPECT_NEAR(p[i].u.norm_l2(), 1.0, 1e-12);
    auto r = apply_laplacian(p[i].u);
    r -= p[i].u * p[i].lambda;
    EXPECT_LE(r.norm_l2(), 1e-8);
    // Rayleigh quotient.
    const auto Au = apply_laplacian(p[i].u);
    double num = 0, den = 0;
    for (std::size_t n = 0; n < Au.size(); ++n) {
      num += p[i].u[n] * Au[n];
      den += p[i].u[n] * p[i].u[n];
    }
    EXPECT_NEAR(num / den, p[i].lambda, 1e-8 * p[i].lambda);
    if (i) { EXPECT_LE(p[i - 1].lambda, p[i].lambda); }
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0;
      for (std::size_t n = 0; n < p[i].u.size(); ++n) dot += p[i].u[n] * p[j].u[n] * p[i].u.domain()->cell_volume();
      EXPECT_LT(std::abs(dot), 1e-8);
    }
    EXPECT_GT(p[i].u[p[i].u.argmax()], 0.0);
    EXPECT_GE(p[i].u.max(), -p[i].u.min() * (1 - 1e-9));  // antisymmetric modes tie
  }
  EXPECT_LT(p[0].lambda, p[1].lambda);
}

TEST(Eigen, FirstModeNorms) {
  const auto& u = square_pairs()[0].u;
  EXPECT_NEAR(u.norm_linf(), 2.0, 2e-3);
  EXPECT_NEAR(u.norm_l1(), 8.0 / pi2, 2e-3);
}

TEST(Eigen, DiskFirstEigenvalue) {
  auto p = eigenpairs(make_domain("disk:1", 64), 1);
  EXPECT_NEAR(p[0].lambda / 5.78318596, 1.0, 1e-2);
}

TEST(Eigen, FaberKrahnSmoke) {
  const double square = square_pairs()[0].lambda;
  const double r = std::sqrt(1.0 / std::numbers::pi);
  auto disk = eigenpairs(make_domain("disk:" + std::to_string(r), 64), 1);
  EXPECT_LE(disk[0].lambda, square * 1.01);
}

TEST(Eigen, Preconditions) {
  auto d = make_domain("square:1", 16);
  EXPECT_THROW(eigenpairs(d, 0), std::invalid_argument);
  EXPECT_THROW(eigenpairs(d, 21), std::invalid_argument);
  EXPECT_THROW(eigenpairs(d, 2, 1e-3), std::invalid_argument);
  EXPECT_THROW(eigenpairs(d, 2, 0.0), std::invalid_argument);
}

TEST(Eigen, NonConvergenceReportsResidual) {
  EigenOptions o;
  o.max_iterations = 1;
  try {
    eigenpairs(PoissonSolver(make_domain("square:1", 32)), 4, 1e-12, o);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_GT(e.last_residual(), 1e-12);
  }
}

TEST(EigenBound, ClosedFormFirstSquareMode) {
  const auto ball = BallModulusParams::for_ball(2, std::sqrt(1.0 / std::numbers::pi));
  auto d = make_domain("square:1", 16);
  ScalarField u(d);
  for (std::size_t n = 0; n < d->size(); ++n) {
    const auto x = d->center(static_cast<int>(n));
    u[n] = 2 * std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
  }
  EigenPair ep{1, 2 * pi2, u, 0.0};
  auto r = eigen_bound_check(ball, ep);
  const double factor = 2 * pi2 * (std::log(std::numbers::pi) + (1 + std::log(ball.radius)) / std::numbers::pi + 2 * pi2 / (8 * pi2));
  EXPECT_NEAR(r.rhs, factor * u.norm_l1(), 1e-12);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.margin, 10.0);
  EXPECT_FALSE(r.vacuous);
  // Sign flip.
  EigenPair flipped{1, ep.lambda, u * -1.0, 0.0};
  EXPECT_DOUBLE_EQ(eigen_bound_check(ball, flipped).margin, r.margin);
}

TEST(EigenBound, NegativeRightSideIsVacuous) {
  const auto ball = BallModulusParams::for_ball(3, 1.0);
  // For small λ the subtracted term dominates in 3D.
  EXPECT_LT(eigen_bound_factor(ball, 0.5), 0.0);
  auto d = make_domain("cube:1", 8);
  EigenPair ep{1, 0.5, ScalarField(d, 1.0), 0.0};
  auto r = eigen_bound_check(ball, ep);
  EXPECT_TRUE(r.vacuous);
  EXPECT_FALSE(r.failed());
}

TEST(EigenBound, ComputedPairsPass) {
  auto d = make_domain("square:1", 64);
  const auto ball = BallModulusParams::for_domain(*d);
  for (const auto& ep : square_pairs()) {
    EXPECT_TRUE(eigen_bound_check(ball, ep).pass);
    EXPECT_TRUE(eigen_raw_bound_check(ball, ep).pass);
  }
}

TEST(EigenRawBound, Homogeneous) {
  const auto& ep = square_pairs()[0];
  auto d = ep.u.domain();
  const auto ball = BallModulusParams::for_domain(*d);
  EigenPair scaled{1, ep.lambda, ep.u * 3.5, 0.0};
  auto a = eigen_raw_bound_check(ball, ep), b = eigen_raw_bound_check(ball, scaled);
  EXPECT_NEAR(b.lhs, 3.5 * a.lhs, 1e-12);
  EXPECT_NEAR(b.rhs, 3.5 * a.rhs, 1e-9);
  EXPECT_EQ(a.pass, b.pass);
}
