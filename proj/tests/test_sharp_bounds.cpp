#include <gtest/gtest.h>

#include <numbers>

#include "poisson_sharp/sharp_bounds.hpp"

using namespace poisson_sharp;

namespace {

// u(0) for -Δu = χ_{B_r} in B_R by direct radial quadrature of
// u(0) = ∫_0^R (m(s) / s^{n-1}) ds / n, m(s) = min(s, r)^n.
double radial_quadrature(int n, double R, double r) {
  const int steps = 200000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double s = (i + 0.5) * R / steps;
    sum += std::pow(std::min(s, r), n) / std::pow(s, n - 1) / n;
  }
  return sum * R / steps;
}

}  // namespace

TEST(BallParams, UnitBallVolumes) {
  EXPECT_DOUBLE_EQ(BallModulusParams::for_ball(2, 1).omega, std::numbers::pi);
  EXPECT_NEAR(BallModulusParams::for_ball(3, 1).omega, 4 * std::numbers::pi / 3, 1e-14);
  EXPECT_NEAR(unit_ball_volume(4), std::numbers::pi * std::numbers::pi / 2, 1e-13);
  EXPECT_THROW(BallModulusParams::for_ball(1, 1), std::invalid_argument);
  EXPECT_THROW(BallModulusParams::for_ball(2, 0), std::invalid_argument);
}

TEST(RadialSigma, GoldenValues) {
  EXPECT_NEAR(radial_sigma_ball(BallModulusParams::for_ball(2, 1), std::numbers::pi), 0.25, 1e-14);
  const auto b3 = BallModulusParams::for_ball(3, 1);
  EXPECT_NEAR(radial_sigma_ball(b3, 4 * std::numbers::pi / 3), 1.0 / 6, 1e-14);
  EXPECT_NEAR(radial_sigma_ball(b3, std::numbers::pi / 6), 0.125 - 0.125 / 3, 1e-14);
  EXPECT_EQ(radial_sigma_ball(b3, 0.0), 0.0);
  EXPECT_THROW(radial_sigma_ball(b3, 5.0), std::invalid_argument);
  EXPECT_THROW(radial_sigma_ball(b3, -0.1), std::invalid_argument);
}

TEST(RadialSigma, MatchesQuadrature) {
  for (int n : {2, 3, 4})
    for (double R : {0.5, 1.0, 2.0})
      for (double rr : {0.1, 0.5, 0.9}) {
        const auto p = BallModulusParams::for_ball(n, R);
        const double r = rr * R;
        EXPECT_NEAR(radial_sigma_ball(p, p.omega * std::pow(r, n)), radial_quadrature(n, R, r), 1e-8);
      }
}

TEST(RadialSigma, MonotoneContinuousFromZero) {
  for (int n : {2, 3}) {
    const auto p = BallModulusParams::for_ball(n, 0.8);
    double prev = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double v = radial_sigma_ball(p, p.measure() * k / 1000);
      EXPECT_GE(v, prev);
      EXPECT_LT(v - prev, 1e-2);
      prev = v;
    }
    EXPECT_NEAR(prev, p.radius * p.radius / (2 * n), 1e-12);
  }
}

TEST(PrintedSigma, ThreeDimensionalConstants) {
  const auto p = BallModulusParams::for_ball(3, 1);
  EXPECT_NEAR(p.c1(), 5.0 / (6.0 * std::pow(4 * std::numbers::pi / 3, 2.0 / 3)), 1e-14);
  EXPECT_NEAR(p.c1(), 0.320696, 1e-6);
  EXPECT_NEAR(p.c2(), 1 / (4 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(printed_sigma_ball(p, 4 * std::numbers::pi / 3), 0.5, 1e-14);
}

TEST(PrintedSigma, TwoDimensionalBranch) {
  const auto p = BallModulusParams::for_ball(2, 1);
  EXPECT_THROW(printed_sigma_ball(p, 0.0), std::invalid_argument);
  const double t = 1.3;
  const double expect = (0.5 * std::log(std::numbers::pi) + 1 / (2 * std::numbers::pi)) * t -
                        t * std::log(t) / (4 * std::numbers::pi);
  EXPECT_NEAR(printed_sigma_ball(p, t), expect, 1e-14);
}

TEST(PrintedSigma, DominatesRadial) {
  for (int n : {2, 3})
    for (double R : {0.3, 0.56419, 1.0, 3.0}) {
      const auto p = BallModulusParams::for_ball(n, R);
      for (const auto& row : constants_table(p, 500)) EXPECT_GE(row.printed, row.radial) << n << ' ' << R << ' ' << row.t;
    }
}

TEST(PrintedModulusBound, GoldenTwoDimensional) {
  const auto p = BallModulusParams::for_ball(2, 1);
  const double pi = std::numbers::pi;
  const double golden = (0.5 * std::log(pi) + 1 / (2 * pi)) * pi - 0.25 * std::log(pi);
  EXPECT_NEAR(printed_modulus_bound(p, pi, 1.0), golden, 1e-14);
  EXPECT_NEAR(golden, 2.0119550284, 1e-9);
  EXPECT_EQ(printed_modulus_bound(p, 0.0, 1.0), 0.0);
}

TEST(PrintedModulusBound, UnitLinfIsPrintedSigma) {
  for (int n : {2, 3}) {
    const auto p = BallModulusParams::for_ball(n, 1.2);
    for (double t : {0.01, 0.5, 2.0}) EXPECT_NEAR(printed_modulus_bound(p, t, 1.0), printed_sigma_ball(p, t), 1e-13);
  }
}

TEST(PrintedModulusBound, Homogeneous) {
  Lcg64 rng(8);
  for (int n : {2, 3, 5}) {
    const auto p = BallModulusParams::for_ball(n, 0.9);
    for (int i = 0; i < 20; ++i) {
      const double linf = rng.uniform(0.1, 3), l1 = rng.uniform(0.01, 1) * linf * p.measure();
      for (double c : {7.3, rng.uniform(0.1, 10)})
        EXPECT_NEAR(printed_modulus_bound(p, c * l1, c * linf), c * printed_modulus_bound(p, l1, linf),
                    1e-12 * std::abs(c * printed_modulus_bound(p, l1, linf)) + 1e-14);
    }
  }
}

TEST(PrintedModulusBound, RejectsBadNorms) {
  const auto p = BallModulusParams::for_ball(2, 1);
  EXPECT_THROW(printed_modulus_bound(p, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(printed_modulus_bound(p, 10.0, 1.0), std::invalid_argument);
}

TEST(Reports, PassRule) {
  auto r = make_report("x", 1.0, 0.99, 0.02);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.margin, -0.01, 1e-15);
  auto j = to_json(r);
  EXPECT_EQ(j["id"], "x");
  EXPECT_FALSE(make_report("x", 1.0, 0.9, 0.05).pass);
  auto v = make_report("x", 1.0, -1.0, 0.0);
  v.vacuous = true;
  EXPECT_FALSE(v.failed());
}

class SquareBounds : public ::testing::Test {
protected:
  DomainPtr d = make_domain("square:1", 32);
  PoissonSolver solver{d};
};

TEST_F(SquareBounds, SignSplitHalves) {
  ExtremalOptimizer opt(d);
  ScalarField f(d);
  for (std::size_t n = 0; n < d->size(); ++n) f[n] = d->center(static_cast<int>(n))[0] < 0.5 ? 1.0 : -1.0;
  const auto computed = computed_sigma_evaluator(opt);
  auto r = bound_sign_split(computed, f, solver);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.rhs, opt.optimize(0.5).sigma, 1e-12);
  // f and -f give the same right side.
  auto rm = bound_sign_split(computed, f * -1.0, solver);
  EXPECT_DOUBLE_EQ(r.rhs, rm.rhs);
  EXPECT_THROW(bound_sign_split(computed, ScalarField(d), solver), std::invalid_argument);
}

TEST_F(SquareBounds, SignSplitReducesForNonnegative) {
  const auto ball = ball_sigma_evaluator(*d);
  Lcg64 rng(4);
  auto f = random_nonnegative(d, rng);
  auto r = bound_sign_split(ball, f, solver);
  EXPECT_NEAR(r.rhs, f.norm_linf() * ball(f.norm_l1() / f.norm_linf()), 1e-14);
  EXPECT_EQ(r.context["minus"]["bound"], 0.0);
  EXPECT_TRUE(r.pass);
}

TEST_F(SquareBounds, ShiftedConstantSource) {
  ExtremalOptimizer opt(d);
  const auto sigma = computed_sigma_evaluator(opt);
  auto r = bound_shifted(*d, ScalarField(d, 1.0), sigma, opt.torsion(), solver);
  const double vmax = opt.torsion().u.max();
  // σ(|D|) = max v, so the printed one-sided right side collapses to 0.
  EXPECT_NEAR(r.upper.rhs, 0.0, 1e-9);
  EXPECT_NEAR(r.upper.lhs, vmax, 1e-9);
  EXPECT_TRUE(r.upper.informational);
  EXPECT_FALSE(r.upper.failed());
  EXPECT_TRUE(r.rederived.pass);
  EXPECT_NEAR(r.rederived.rhs, vmax, 1e-9);
  auto m = bound_shifted(*d, ScalarField(d, -1.0), sigma, opt.torsion(), solver);
  EXPECT_NEAR(m.lower.margin, r.upper.margin, 1e-9);
  EXPECT_NEAR(m.rederived.margin, r.rederived.margin, 1e-9);
}

TEST_F(SquareBounds, ShiftedRandomSignChanging) {
  ExtremalOptimizer opt(d);
  const auto sigma = computed_sigma_evaluator(opt);
  Lcg64 rng(12);
  for (int i = 0; i < 5; ++i) {
    auto r = bound_shifted(*d, random_signed_blobs(d, rng), sigma, opt.torsion(), solver);
    EXPECT_TRUE(r.rederived.pass) << r.rederived.margin;
    EXPECT_TRUE(r.two_sided.informational);
  }
  EXPECT_THROW(bound_shifted(*d, ScalarField(d), sigma, opt.torsion(), solver), std::invalid_argument);
}

TEST_F(SquareBounds, VerifyModulusEqualityAndScaling) {
  ExtremalOptimizer opt(d);
  auto p = opt.optimize(0.4);
  auto eq = verify_modulus(p.source, p, solver);
  EXPECT_LE(std::abs(eq.lhs - eq.rhs), 1e-10 * eq.rhs);
  EXPECT_TRUE(eq.pass);
  auto half = verify_modulus(p.source * 0.5, p, solver);
  EXPECT_NEAR(half.lhs, half.rhs, 1e-10 * half.rhs);
  EXPECT_NEAR(half.rhs, 0.5 * eq.rhs, 1e-12 * eq.rhs);
  EXPECT_TRUE(half.pass);
  ScalarField other(d, 1.0);
  EXPECT_THROW(verify_modulus(other, p, solver), std::invalid_argument);
}

TEST_F(SquareBounds, VerifyModulusRandomBlob) {
  ExtremalOptimizer opt(d);
  Lcg64 rng(77);
  auto f = random_indicator_blobs(d, rng);
  auto p = opt.optimize(f.norm_l1() / f.norm_linf());
  auto r = verify_modulus(f, p, solver);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.margin, 0.0);
}

TEST_F(SquareBounds, SigmaBelowBall) {
  ExtremalOptimizer opt(d);
  const auto ball = BallModulusParams::for_domain(*d);
  for (int k = 1; k <= 8; ++k) EXPECT_TRUE(compare_with_ball(opt.optimize(k / 8.0), ball).pass);
}

TEST(SigmaEvaluators, RangeChecked) {
  auto d = make_domain("square:1", 16);
  const auto e = ball_sigma_evaluator(*d);
  EXPECT_THROW(e(1.5), std::invalid_argument);
  EXPECT_NO_THROW(e(1.0 + 1e-14));
  EXPECT_EQ(e.name, "radial_ball");
}
