#include <gtest/gtest.h>

#include <numbers>

#include "poisson_sharp/random_fields.hpp"
#include "poisson_sharp/rearrangement.hpp"

using namespace poisson_sharp;

TEST(Rearrange, ConstantStaysConstant) {
  auto d = make_domain("l_shape:1", 16);
  auto ball = equal_measure_ball(*d);
  auto r = rearrange(ScalarField(d, 0.7), ball);
  EXPECT_EQ(r.max(), 0.7);
  EXPECT_EQ(r.min(), 0.7);
  EXPECT_EQ(ball->size(), d->size());
  EXPECT_DOUBLE_EQ(ball->measure(), d->measure());
}

TEST(Rearrange, PermutesValuesAndPreservesNorms) {
  auto d = make_domain("square:1", 32);
  auto ball = equal_measure_ball(*d);
  Lcg64 rng(1);
  auto f = random_nonnegative(d, rng);
  auto r = rearrange(f, ball);
  EXPECT_EQ(sorted_descending(f.values()), sorted_descending(r.values()));
  EXPECT_EQ(f.norm_linf(), r.norm_linf());
  EXPECT_NEAR(f.norm_l1(), r.norm_l1(), 1e-14 * f.norm_l1());
  EXPECT_NEAR(f.norm_l2(), r.norm_l2(), 1e-14 * f.norm_l2());
}

TEST(Rearrange, TwoLevelField) {
  auto d = make_domain("square:1", 16);
  auto ball = equal_measure_ball(*d);
  ScalarField f(d, 1.0);
  for (std::size_t n = 0; n < d->size(); n += 2) f[n] = 2.0;
  auto r = rearrange(f, ball);
  const auto order = rank_order(*ball);
  for (std::size_t k = 0; k < order.size(); ++k) EXPECT_EQ(r[order[k]], k < order.size() / 2 ? 2.0 : 1.0);
}

TEST(Rearrange, RadiallyNonIncreasingAndIdempotent) {
  auto d = make_domain("disk:1", 32);
  auto ball = equal_measure_ball(*d);
  Lcg64 rng(2);
  auto r = rearrange(random_nonnegative(d, rng), ball);
  auto prof = radial_profile(r, d);
  for (std::size_t k = 1; k < prof.values.size(); ++k) {
    EXPECT_LE(prof.values[k], prof.values[k - 1]);
    EXPECT_GE(prof.radii[k], prof.radii[k - 1]);
  }
  double mass = 0.0;
  for (double v : prof.values) mass += v * ball->cell_volume();
  EXPECT_NEAR(mass, r.norm_l1(), 1e-14 * mass);
  auto again = rearrange(r, ball);
  EXPECT_EQ(again.values().size(), r.values().size());
  for (std::size_t n = 0; n < r.size(); ++n) EXPECT_EQ(again[n], r[n]);
}

TEST(Rearrange, OrderPreserving) {
  auto d = make_domain("l_shape:1", 16);
  auto ball = equal_measure_ball(*d);
  Lcg64 rng(3);
  auto f = random_nonnegative(d, rng);
  ScalarField g = f;
  for (std::size_t n = 0; n < g.size(); ++n) g[n] += rng.uniform(0, 0.1);
  auto fs = rearrange(f, ball), gs = rearrange(g, ball);
  for (std::size_t n = 0; n < fs.size(); ++n) EXPECT_LE(fs[n], gs[n]);
}

TEST(Rearrange, RejectsNegativeAndWrongBall) {
  auto d = make_domain("square:1", 16);
  ScalarField f(d, 1.0);
  f[5] = -0.1;
  EXPECT_THROW(rearrange(f, equal_measure_ball(*d)), std::invalid_argument);
  EXPECT_THROW(rearrange(ScalarField(d, 1.0), make_rank_ball(2, d->spacing(), d->size() + 1)), std::invalid_argument);
}

TEST(Talenti, SquareConstantSource) {
  auto d = make_domain("square:1", 64);
  auto r = talenti_check(d, ScalarField(d, 1.0));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.context["max_u"].get<double>(), 0.07367, 1e-3);
  EXPECT_NEAR(r.context["max_v"].get<double>(), 1 / (4 * std::numbers::pi), 2e-3);
  EXPECT_GT(r.context["max_v"].get<double>(), r.context["max_u"].get<double>());
}

TEST(Talenti, ZeroSource) {
  auto d = make_domain("square:1", 16);
  auto r = talenti_check(d, ScalarField(d));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.margin, 0.0);
}

TEST(Talenti, BallFixedPoint) {
  auto d = make_domain("disk:1", 64);
  RearrangementChecker rc(d);
  // A radial non-increasing source on the disk itself.
  ScalarField f(d);
  for (std::size_t n = 0; n < d->size(); ++n) {
    const auto x = d->center(static_cast<int>(n));
    f[n] = std::max(0.0, 1.0 - std::hypot(x[0], x[1]));
  }
  auto r = rc.talenti(f);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(std::abs(r.margin), 1e-3 * r.context["max_v"].get<double>());
  EXPECT_LE(std::abs(r.margin), 1e-9);
}

TEST(Talenti, RandomSources) {
  for (auto shape : {"square:1", "l_shape:1", "disk:1"}) {
    auto d = make_domain(shape, 32);
    RearrangementChecker rc(d);
    Lcg64 rng(5);
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(rc.talenti(random_nonnegative(d, rng)).pass) << shape;
  }
}

TEST(GreenRearrangement, BallCenterIsFixedPoint) {
  auto d = make_domain("disk:1", 64);
  auto r = green_rearrangement_check(d, centermost_cell(*d));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs, 0.0, 1e-7);
}

TEST(GreenRearrangement, SquareCenterAndNearBoundary) {
  auto d = make_domain("square:1", 64);
  RearrangementChecker rc(d);
  auto center = rc.green(centermost_cell(*d));
  EXPECT_TRUE(center.pass);
  auto edge = rc.green(d->interior_index(d->linear(2, 32)));
  EXPECT_TRUE(edge.pass);
  EXPECT_LT(edge.lhs, center.lhs);
  EXPECT_THROW(rc.green(0, -1), std::invalid_argument);
}
