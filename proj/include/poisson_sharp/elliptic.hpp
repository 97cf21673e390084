#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "poisson_sharp/multigrid.hpp"
#include "poisson_sharp/scalar_field.hpp"

namespace poisson_sharp {

/// Solution of -Δu = f with homogeneous Dirichlet data.
struct PoissonSolution {
  ScalarField u;
  double residual_norm = 0.0;  // discrete L2 norm of A u - f
  int iterations = 0;
};

/// Discrete Green's function y -> G_h(source, y): the solve with right side
/// 1/h^dim at the source cell.
struct GreenColumn {
  int source = -1;
  ScalarField g;
};

namespace detail {

// out = -Δ_h in. An exterior neighbor holds the ghost value -in[c], which
// puts the zero Dirichlet value on the shared cell face.
inline void laplacian(const GridDomain& d, std::span<const double> in, std::span<double> out) {
  const int stencil = 2 * d.dim();
  const double inv_h2 = 1.0 / (d.spacing() * d.spacing());
  const int* nb = d.neighbor_table().data();
  const std::size_t n = d.size();
  for (std::size_t c = 0; c < n; ++c) {
    double s = stencil * in[c];
    for (int k = 0; k < stencil; ++k) {
      const int m = nb[c * stencil + k];
      s -= m >= 0 ? in[m] : -in[c];
    }
    out[c] = s * inv_h2;
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Standard (2*dim+1)-point -Δ_h with homogeneous Dirichlet data on the
/// faces between interior and exterior cells.
inline ScalarField apply_laplacian(const GridDomain& d, const ScalarField& v) {
  if (v.domain().get() != &d) throw std::invalid_argument("apply_laplacian: field lives on a different domain");
  ScalarField out(v.domain());
  detail::laplacian(d, v.values(), out.values());
  return out;
}

inline ScalarField apply_laplacian(const ScalarField& v) { return apply_laplacian(*v.domain(), v); }

/// Multigrid-preconditioned conjugate gradients for the Dirichlet Poisson
/// problem on one domain. The hierarchy is built once; solve() is const and
/// allocates its own workspace, so one solver may serve several threads.
class PoissonSolver {
public:
  explicit PoissonSolver(DomainPtr domain, int max_iterations = 500)
      : domain_(std::move(domain)), mg_(*domain_), max_iterations_(max_iterations) {}

  const DomainPtr& domain() const noexcept { return domain_; }
  const Multigrid& multigrid() const noexcept { return mg_; }

  /// Iterates until ||A u - f|| <= rtol ||f|| (Euclidean over interior cells).
  /// Starts from zero unless an initial guess is supplied.
  PoissonSolution solve(const ScalarField& f, double rtol = 1e-10, const ScalarField* guess = nullptr) const {
    if (f.domain().get() != domain_.get()) throw std::invalid_argument("solve: field lives on a different domain");
    if (!(rtol > 0.0 && rtol < 1.0)) throw std::invalid_argument("solve: rtol must lie in (0, 1)");
    if (!f.all_finite()) throw std::invalid_argument("solve: right-hand side is not finite");

    const GridDomain& d = *domain_;
    const std::size_t n = d.size();
    PoissonSolution out{ScalarField(domain_), 0.0, 0};
    const auto b = f.values();
    const double bnorm = std::sqrt(detail::dot(b, b));
    if (bnorm == 0.0) return out;

    auto x = out.u.values();
    if (guess) {
      guess->require_same_domain(f);
      std::copy(guess->values().begin(), guess->values().end(), x.begin());
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    auto ws = mg_.make_workspace();
    const double target = rtol * bnorm;
    int iterations = 0;
    double rnorm = 0.0;

    for (int restart = 0; restart < 4; ++restart) {
      detail::laplacian(d, x, r);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
      rnorm = std::sqrt(detail::dot(r, r));
      if (rnorm <= target) break;
      mg_.apply(r, z, ws);
      p = z;
      double rz = detail::dot(r, z);
      while (rnorm > target && iterations < max_iterations_) {
        detail::laplacian(d, p, q);
        const double pq = detail::dot(p, q);
        if (!(pq > 0.0)) throw SolverError("PCG breakdown: non-positive curvature", rnorm / bnorm, iterations);
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
          x[i] += alpha * p[i];
          r[i] -= alpha * q[i];
        }
        ++iterations;
        rnorm = std::sqrt(detail::dot(r, r));
        if (rnorm <= target) break;
        mg_.apply(r, z, ws);
        const double rz_next = detail::dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      }
      if (iterations >= max_iterations_) break;
      // Loop back to confirm against the true residual; the recursive one drifts.
    }
    detail::laplacian(d, x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    rnorm = std::sqrt(detail::dot(r, r));
    if (!(rnorm <= target)) throw SolverError("PCG did not converge", rnorm / bnorm, iterations);
    out.residual_norm = rnorm * std::sqrt(d.cell_volume());
    out.iterations = iterations;
    return out;
  }

  GreenColumn green_column(int source, double rtol = 1e-10) const {
    if (source < 0 || static_cast<std::size_t>(source) >= domain_->size())
      throw std::invalid_argument("green_column: source is not an interior cell");
    ScalarField delta(domain_);
    delta[source] = 1.0 / domain_->cell_volume();
    return {source, solve(delta, rtol).u};
  }

  /// Solution of -Δv = 1.
  PoissonSolution torsion(double rtol = 1e-10) const { return solve(ScalarField(domain_, 1.0), rtol); }

private:
  DomainPtr domain_;
  Multigrid mg_;
  int max_iterations_;
};

inline PoissonSolution solve_poisson(const DomainPtr& d, const ScalarField& f, double rtol = 1e-10) {
  return PoissonSolver(d).solve(f, rtol);
}

inline GreenColumn green_column(const DomainPtr& d, int source, double rtol = 1e-10) {
  return PoissonSolver(d).green_column(source, rtol);
}

inline PoissonSolution torsion_function(const DomainPtr& d, double rtol = 1e-10) {
  return PoissonSolver(d).torsion(rtol);
}

}  // namespace poisson_sharp
