#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "poisson_sharp/elliptic.hpp"
#include "poisson_sharp/sharp_bounds.hpp"

namespace poisson_sharp {

/// Ball grid with the same number of interior cells as d.
inline DomainPtr equal_measure_ball(const GridDomain& d) { return make_rank_ball(d.dim(), d.spacing(), d.size()); }

/// Interior indices of the ball ordered by squared distance (in cells) from
/// the central box cell, ties by ascending index.
inline std::vector<int> rank_order(const GridDomain& ball) {
  const auto& e = ball.extent();
  const int ci = (e[0] - 1) / 2, cj = (e[1] - 1) / 2, ck = (e[2] - 1) / 2;
  std::vector<std::pair<long, int>> keyed(ball.size());
  for (std::size_t n = 0; n < ball.size(); ++n) {
    const auto q = ball.coords(ball.cell(static_cast<int>(n)));
    const long di = q[0] - ci, dj = q[1] - cj, dk = q[2] - ck;
    keyed[n] = {di * di + dj * dj + dk * dk, static_cast<int>(n)};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> order(keyed.size());
  std::transform(keyed.begin(), keyed.end(), order.begin(), [](const auto& p) { return p.second; });
  return order;
}

/// Values sorted in non-increasing order.
inline std::vector<double> sorted_descending(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

/// Symmetric decreasing rearrangement onto a rank ball: the k-th largest value
/// of f goes to the k-th cell of rank_order(ball).
inline ScalarField rearrange(const ScalarField& f, const DomainPtr& ball) {
  if (ball->size() != f.size() || ball->dim() != f.domain()->dim())
    throw std::invalid_argument("rearrange: ball cell count differs from the field's domain");
  for (double v : f.values())
    if (v < 0.0) throw std::invalid_argument("rearrange: field has negative values");
  const auto sorted = sorted_descending(f.values());
  const auto order = rank_order(*ball);
  ScalarField out(ball);
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = sorted[k];
  return out;
}

struct RadialProfile {
  std::vector<double> radii;   // distance of each ranked cell from the ball center
  std::vector<double> values;  // non-increasing
  DomainPtr source_domain;
};

/// Rank-ordered view of a field on a rank ball.
inline RadialProfile radial_profile(const ScalarField& on_ball, DomainPtr source_domain = nullptr) {
  const GridDomain& b = *on_ball.domain();
  const auto order = rank_order(b);
  const auto& e = b.extent();
  RadialProfile p;
  p.source_domain = std::move(source_domain);
  for (int n : order) {
    const auto q = b.coords(b.cell(n));
    double s = 0.0;
    for (int a = 0; a < b.dim(); ++a) {
      const double d = (q[a] - (e[a] - 1) / 2) * b.spacing();
      s += d * d;
    }
    p.radii.push_back(std::sqrt(s));
    p.values.push_back(on_ball[n]);
  }
  return p;
}

/// Domain, its equal-count ball and a solver for each, reused across checks.
class RearrangementChecker {
public:
  explicit RearrangementChecker(DomainPtr d)
      : domain_(std::move(d)), ball_(equal_measure_ball(*domain_)), solver_(domain_), ball_solver_(ball_) {}
  RearrangementChecker(DomainPtr d, const PoissonSolver& solver)
      : domain_(std::move(d)), ball_(equal_measure_ball(*domain_)), solver_(solver), ball_solver_(ball_) {}

  const DomainPtr& domain() const noexcept { return domain_; }
  const DomainPtr& ball() const noexcept { return ball_; }

  /// u* <= v with u = u_f on D and v = u_{f*} on the ball. Both sides are
  /// compared as decreasing sequences; this keeps the ball/radial case an
  /// exact fixed point on the lattice.
  BoundReport talenti(const ScalarField& f, double tolerance = 0.03, double rtol = 1e-10) const {
    if (f.domain().get() != domain_.get()) throw std::invalid_argument("talenti_check: field lives on a different domain");
    const auto fstar = rearrange(f, ball_);
    const auto u = sorted_descending(solver_.solve(f, rtol).u.values());
    const auto v = sorted_descending(ball_solver_.solve(fstar, rtol).u.values());
    double lhs = f.size() ? u[0] - v[0] : 0.0;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (u[k] - v[k] > lhs) {
        lhs = u[k] - v[k];
        worst = k;
      }
    const double vmax = v.empty() ? 0.0 : v[0];
    return make_report("talenti", lhs, 0.0, tolerance * vmax,
                       {{"max_u", u.empty() ? 0.0 : u[0]}, {"max_v", vmax}, {"worst_rank", worst},
                        {"h", domain_->spacing()}, {"cells", domain_->size()}});
  }

  /// Rearranged Green column from `source` against the ball's central column,
  /// skipping the first k0 ranks.
  BoundReport green(int source, int k0 = 8, double tolerance = 0.05, double rtol = 1e-10) const {
    if (k0 < 0) throw std::invalid_argument("green_rearrangement_check: k0 must be nonnegative");
    const auto g = sorted_descending(solver_.green_column(source, rtol).g.values());
    const auto gb = sorted_descending(ball_solver_.green_column(centermost_cell(*ball_), rtol).g.values());
    double lhs = -1.0;
    std::size_t worst = 0;
    for (std::size_t k = static_cast<std::size_t>(k0); k < g.size(); ++k) {
      const double excess = g[k] / gb[k] - 1.0;
      if (excess > lhs) {
        lhs = excess;
        worst = k;
      }
    }
    return make_report("green_rearrangement", lhs, 0.0, tolerance,
                       {{"source", source}, {"k0", k0}, {"worst_rank", worst}, {"g_peak", g[0]}, {"gB_peak", gb[0]},
                        {"h", domain_->spacing()}});
  }

private:
  DomainPtr domain_;
  DomainPtr ball_;
  PoissonSolver solver_;
  PoissonSolver ball_solver_;
};

inline BoundReport talenti_check(const DomainPtr& d, const ScalarField& f, double tolerance = 0.03,
                                 double rtol = 1e-10) {
  return RearrangementChecker(d).talenti(f, tolerance, rtol);
}

inline BoundReport green_rearrangement_check(const DomainPtr& d, int source, int k0 = 8, double tolerance = 0.05,
                                             double rtol = 1e-10) {
  return RearrangementChecker(d).green(source, k0, tolerance, rtol);
}

}  // namespace poisson_sharp
