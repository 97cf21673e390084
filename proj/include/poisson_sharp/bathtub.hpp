#pragma once

#include <algorithm>
#include <cmath>
#include <list>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "poisson_sharp/elliptic.hpp"
#include "poisson_sharp/random_fields.hpp"

namespace poisson_sharp {

/// Discrete bathtub solution: the weight field maximizing Σ g w h^dim over
/// 0 <= w <= 1 with Σ w h^dim = beta.
struct BathtubSet {
  double level_alpha = 0.0;
  ScalarField weights;
  double mass = 0.0;
  double objective = 0.0;
  int fractional_cell = -1;  // interior index of the partial cell, -1 when none
};

/// Same as BathtubSet, on a bare value array (cell volume given explicitly).
struct BathtubWeights {
  double level_alpha = 0.0;
  std::vector<double> weights;
  double mass = 0.0;
  double objective = 0.0;
  int fractional_cell = -1;
};

/// Greedy fill of the cells in order of decreasing g (ties by ascending
/// index): full cells while they fit, then one fractional cell to make the
/// mass exactly beta. level_alpha is g at the last cell touched (max g when
/// beta = 0).
inline BathtubWeights calibrate_bathtub(std::span<const double> g, double cell_volume, double beta) {
  const std::size_t n = g.size();
  const double total = static_cast<double>(n) * cell_volume;
  if (!std::isfinite(beta) || beta < 0.0 || beta > total * (1.0 + 1e-12))
    throw std::invalid_argument("calibrate_bathtub: beta outside [0, |D|]");
  beta = std::min(beta, total);

  BathtubWeights out;
  out.weights.assign(n, 0.0);
  if (n == 0) return out;

  double units = beta / cell_volume;
  auto full = static_cast<std::size_t>(std::floor(units));
  double frac = units - static_cast<double>(full);
  if (frac > 1.0 - 1e-12) {
    ++full;
    frac = 0.0;
  } else if (frac < 1e-12) {
    frac = 0.0;
  }
  full = std::min(full, n);
  const std::size_t touched = std::min(n, full + (frac > 0.0 ? 1 : 0));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](int a, int b) { return g[a] > g[b] || (g[a] == g[b] && a < b); };
  if (touched == 0) {
    out.level_alpha = *std::max_element(g.begin(), g.end());
    return out;
  }
  if (touched < n) std::nth_element(order.begin(), order.begin() + (touched - 1), order.end(), before);
  std::sort(order.begin(), order.begin() + touched, before);

  double objective = 0.0;
  for (std::size_t k = 0; k < full; ++k) {
    out.weights[order[k]] = 1.0;
    objective += g[order[k]];
  }
  if (touched > full) {
    out.fractional_cell = order[full];
    out.weights[order[full]] = frac;
    objective += frac * g[order[full]];
  }
  out.level_alpha = g[order[touched - 1]];
  out.mass = (static_cast<double>(full) + (touched > full ? frac : 0.0)) * cell_volume;
  out.objective = objective * cell_volume;
  return out;
}

inline BathtubSet calibrate_bathtub(const GreenColumn& column, double beta) {
  const auto& d = *column.g.domain();
  auto w = calibrate_bathtub(column.g.values(), d.cell_volume(), beta);
  return {w.level_alpha, ScalarField(column.g.domain(), std::move(w.weights)), w.mass, w.objective, w.fractional_cell};
}

struct OptimizerOptions {
  double rtol = 1e-10;
  int max_outer_iterations = 50;
  /// Pseudorandom interior starts in addition to the torsion argmax.
  int random_starts = 4;
  std::uint64_t seed = 0x5eed'2017'0001ULL;
  /// Further start cells (interior indices), tried after the default ones.
  std::vector<int> extra_starts;
  double stagnation_tolerance = 1e-12;
  double tie_tolerance = 1e-10;
};

struct SigmaPoint {
  double beta = 0.0;
  double sigma = 0.0;
  int argmax_cell = -1;
  double level_alpha = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;
  // Diagnostics.
  int start_index = 0;
  int start_cell = -1;
  bool fixed_point = false;
  std::vector<int> tied_cells;  // cells with û within tie_tolerance of sigma
  ScalarField source;           // extremal weights f̂
  ScalarField solution;         // û
};

struct SigmaCurve {
  std::vector<SigmaPoint> points;
  bool monotone = true;
};

/// Bounded FIFO cache of Green's function columns, keyed by source cell.
class GreenCache {
public:
  GreenCache(const PoissonSolver& solver, double rtol, std::size_t capacity)
      : solver_(solver), rtol_(rtol), capacity_(std::max<std::size_t>(capacity, 1)) {}

  std::shared_ptr<const GreenColumn> get(int source) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = columns_.find(source); it != columns_.end()) return it->second;
    }
    auto column = std::make_shared<const GreenColumn>(solver_.green_column(source, rtol_));
    std::lock_guard lock(mutex_);
    if (auto it = columns_.find(source); it != columns_.end()) return it->second;
    columns_.emplace(source, column);
    order_.push_back(source);
    if (order_.size() > capacity_) {
      columns_.erase(order_.front());
      order_.pop_front();
    }
    return column;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return columns_.size();
  }

private:
  const PoissonSolver& solver_;
  double rtol_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<int, std::shared_ptr<const GreenColumn>> columns_;
  std::list<int> order_;
};

/// Alternating maximization of u_w(x) = Σ_y G(x, y) w(y) h^dim over source
/// points x and bathtub weights w of mass beta. Both half-steps are exact:
/// w <- bathtub(G(x, ·)) and x <- argmax u_w. Several starts are run and
/// the best final objective wins (lowest start index on ties).
class ExtremalOptimizer {
public:
  explicit ExtremalOptimizer(DomainPtr domain, OptimizerOptions options = {})
      : solver_(std::move(domain)),
        options_(std::move(options)),
        torsion_(solver_.torsion(options_.rtol)),
        cache_(solver_, options_.rtol, std::max<std::size_t>(16, (std::size_t{1} << 24) / solver_.domain()->size())) {}

  const DomainPtr& domain() const noexcept { return solver_.domain(); }
  const PoissonSolver& solver() const noexcept { return solver_; }
  const OptimizerOptions& options() const noexcept { return options_; }
  const PoissonSolution& torsion() const noexcept { return torsion_; }
  std::shared_ptr<const GreenColumn> green(int source) { return cache_.get(source); }

  /// Start cells: torsion argmax, then seeded pseudorandom interior cells,
  /// then extra starts; duplicates removed keeping the first occurrence.
  std::vector<int> start_cells(std::span<const int> extra = {}) const {
    std::vector<int> starts{torsion_.u.argmax()};
    Lcg64 rng(options_.seed);
    const std::size_t n = domain()->size();
    for (int k = 0; k < options_.random_starts; ++k) starts.push_back(static_cast<int>(rng.index(n)));
    starts.insert(starts.end(), options_.extra_starts.begin(), options_.extra_starts.end());
    starts.insert(starts.end(), extra.begin(), extra.end());
    std::vector<int> unique;
    for (int s : starts) {
      if (s < 0 || static_cast<std::size_t>(s) >= n) throw std::invalid_argument("start cell is not interior");
      if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
    }
    return unique;
  }

  SigmaPoint optimize(double beta, std::span<const int> extra_starts = {}) {
    const double measure = domain()->measure();
    if (!std::isfinite(beta) || beta < 0.0 || beta > measure * (1.0 + 1e-12))
      throw std::invalid_argument("optimize_extremal: beta outside [0, |D|]");
    beta = std::min(beta, measure);
    if (beta == 0.0) return zero_point();

    const auto starts = start_cells(extra_starts);
    std::vector<SigmaPoint> runs(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
      runs[s] = run_from(starts[s], beta);
      runs[s].start_index = static_cast<int>(s);
    });
    std::size_t best = 0;
    for (std::size_t s = 1; s < runs.size(); ++s)
      if (runs[s].sigma > runs[best].sigma) best = s;
    SigmaPoint out = std::move(runs[best]);
    for (std::size_t n = 0; n < out.solution.size(); ++n)
      if (out.solution[n] >= out.sigma - options_.tie_tolerance) out.tied_cells.push_back(static_cast<int>(n));
    return out;
  }

  /// Points for ascending betas; each point also starts from the previous
  /// point's extremal cell, which keeps the computed curve non-decreasing.
  SigmaCurve curve(std::span<const double> betas) {
    if (!std::is_sorted(betas.begin(), betas.end())) throw std::invalid_argument("sigma_curve: betas must be ascending");
    SigmaCurve out;
    std::vector<int> warm;
    for (double beta : betas) {
      out.points.push_back(optimize(beta, warm));
      const auto& p = out.points.back();
      if (p.beta > 0.0) warm = {p.argmax_cell};
      if (out.points.size() > 1 && p.sigma < out.points[out.points.size() - 2].sigma - 1e-12) out.monotone = false;
    }
    return out;
  }

private:
  SigmaPoint zero_point() {
    SigmaPoint p;
    p.argmax_cell = torsion_.u.argmax();
    p.start_cell = p.argmax_cell;
    p.level_alpha = green(p.argmax_cell)->g.max();
    p.fixed_point = true;
    p.objective_history = {0.0};
    p.source = ScalarField(domain());
    p.solution = ScalarField(domain());
    p.tied_cells.resize(domain()->size());
    std::iota(p.tied_cells.begin(), p.tied_cells.end(), 0);
    return p;
  }

  SigmaPoint run_from(int start, double beta) {
    SigmaPoint best;
    best.beta = beta;
    best.start_cell = start;
    int x = start;
    for (int it = 1; it <= options_.max_outer_iterations; ++it) {
      auto column = green(x);
      auto bathtub = calibrate_bathtub(*column, beta);
      auto sol = solver_.solve(bathtub.weights, options_.rtol);
      const int next = sol.u.argmax();
      const double objective = sol.u[next];
      best.iterations = it;
      const bool stalled = !best.objective_history.empty() &&
                           objective - best.objective_history.back() < options_.stagnation_tolerance;
      if (stalled && objective < best.objective_history.back()) break;  // roundoff-level decrease: keep previous
      best.objective_history.push_back(objective);
      best.sigma = objective;
      best.argmax_cell = next;
      best.level_alpha = bathtub.level_alpha;
      best.source = std::move(bathtub.weights);
      best.solution = std::move(sol.u);
      best.fixed_point = next == x;
      if (stalled || next == x) break;
      x = next;
    }
    return best;
  }

  PoissonSolver solver_;
  OptimizerOptions options_;
  PoissonSolution torsion_;
  GreenCache cache_;
};

inline SigmaPoint optimize_extremal(const DomainPtr& d, double beta, const OptimizerOptions& options = {}) {
  return ExtremalOptimizer(d, options).optimize(beta);
}

inline SigmaCurve sigma_curve(const DomainPtr& d, std::span<const double> betas, const OptimizerOptions& options = {}) {
  return ExtremalOptimizer(d, options).curve(betas);
}

/// Max-norm of the centered-difference gradient of u at the extremal cell.
inline double stationarity_check(const SigmaPoint& point, const PoissonSolution& u) {
  const auto& d = *u.u.domain();
  const int x = point.argmax_cell;
  if (x < 0 || static_cast<std::size_t>(x) >= d.size()) throw std::invalid_argument("stationarity_check: bad cell");
  if (d.touches_boundary(x)) throw std::domain_error("gradient check unavailable: extremal cell is next to the boundary");
  auto nb = d.neighbors(x);
  double norm = 0.0;
  for (int a = 0; a < d.dim(); ++a)
    norm = std::max(norm, std::abs(u.u[nb[2 * a + 1]] - u.u[nb[2 * a]]) / (2.0 * d.spacing()));
  return norm;
}

}  // namespace poisson_sharp
