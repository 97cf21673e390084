#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "poisson_sharp/random_fields.hpp"
#include "poisson_sharp/sharp_bounds.hpp"

namespace poisson_sharp {

struct EigenPair {
  int k = 0;            // 1-based, ascending eigenvalues
  double lambda = 0.0;
  ScalarField u;        // ||u||_2 = 1 in the h^dim-weighted norm
  double residual = 0.0;
};

struct EigenOptions {
  int max_iterations = 300;
  double inner_rtol = 1e-6;
  std::uint64_t seed = 0x5eed'2017'e16eULL;
};

/// Lowest k_max eigenpairs of -Δ_h by subspace iteration on A^{-1} with
/// Rayleigh-Ritz, using a block of max(k_max + 4, 2 k_max) vectors. The
/// multigrid-PCG solver applies A^{-1}. Converged when every requested pair
/// has residual ||A u - λ u||_2 <= eps.
inline std::vector<EigenPair> eigenpairs(const PoissonSolver& solver, int k_max, double eps = 1e-8,
                                         const EigenOptions& options = {}) {
  if (k_max < 1 || k_max > 20) throw std::invalid_argument("eigenpairs: k_max must lie in [1, 20]");
  if (!(eps > 0.0 && eps < 1e-4)) throw std::invalid_argument("eigenpairs: eps must lie in (0, 1e-4)");
  const DomainPtr& d = solver.domain();
  const auto N = static_cast<Eigen::Index>(d->size());
  const Eigen::Index m = std::min<Eigen::Index>(std::max(k_max + 4, 2 * k_max), N);
  if (m < k_max) throw std::invalid_argument("eigenpairs: domain has fewer cells than k_max");

  // Euclidean-orthonormal columns; the h^dim weighting is applied at the end.
  Eigen::MatrixXd V(N, m), AV(N, m);
  Lcg64 rng(options.seed);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < N; ++i) V(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(m);

  auto apply_a = [&](const Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      detail::laplacian(*d, std::span<const double>(X.col(j).data(), N), std::span<double>(Y.col(j).data(), N));
  };
  auto orthonormalize = [&](Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(N, X.cols());
  };

  orthonormalize(V);
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= options.max_iterations; ++it) {
    // Rayleigh-Ritz on span(V).
    apply_a(V, AV);
    Eigen::MatrixXd H = V.transpose() * AV;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    V = V * es.eigenvectors();
    AV = AV * es.eigenvectors();
    theta = es.eigenvalues();
    worst = 0.0;
    for (int j = 0; j < k_max; ++j) worst = std::max(worst, (AV.col(j) - theta(j) * V.col(j)).norm());
    if (worst <= eps) break;
    if (it == options.max_iterations) break;

    // W = A^{-1} V as V/θ plus a correction. Solving for the correction keeps
    // the tolerance relative to the small defect, well above roundoff.
    std::vector<Eigen::VectorXd> W(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
      const auto jj = static_cast<Eigen::Index>(j);
      Eigen::VectorXd x = V.col(jj) / theta(jj);
      Eigen::VectorXd defect = V.col(jj) - AV.col(jj) / theta(jj);
      ScalarField rhs(d, std::vector<double>(defect.data(), defect.data() + N));
      if (rhs.norm_linf() > 0.0) {
        auto sol = solver.solve(rhs, options.inner_rtol);
        x += Eigen::Map<const Eigen::VectorXd>(sol.u.values().data(), N);
      }
      W[j] = std::move(x);
    });
    for (Eigen::Index j = 0; j < m; ++j) V.col(j) = W[j];
    orthonormalize(V);
  }
  if (!(worst <= eps)) throw SolverError("eigenpairs: subspace iteration did not converge", worst, options.max_iterations);

  const double scale = 1.0 / std::sqrt(d->cell_volume());
  std::vector<EigenPair> out;
  for (int j = 0; j < k_max; ++j) {
    Eigen::VectorXd v = V.col(j);
    Eigen::Index big = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < N; ++i)
      if (std::abs(v(i)) > best * (1.0 + 1e-12)) {
        best = std::abs(v(i));
        big = i;
      }
    if (v(big) < 0.0) v = -v;
    ScalarField u(d, std::vector<double>(v.data(), v.data() + N));
    u *= scale;
    out.push_back({j + 1, theta(j), std::move(u), (AV.col(j) - theta(j) * V.col(j)).norm()});
  }
  return out;
}

inline std::vector<EigenPair> eigenpairs(const DomainPtr& d, int k_max, double eps = 1e-8) {
  return eigenpairs(PoissonSolver(d), k_max, eps);
}

/// Right side of the eigenfunction estimate, without the ||u_k||_1 factor.
inline double eigen_bound_factor(const BallModulusParams& p, double lambda) {
  const int n = p.dim;
  if (n == 2)
    return lambda * (std::log(std::numbers::pi) + (1.0 + std::log(p.radius)) / std::numbers::pi +
                     lambda / (8.0 * std::numbers::pi * std::numbers::pi));
  const double pre = 2.0 / (std::pow(n, n) * (n - 2.0) * p.omega);
  return pre * (std::pow(lambda, 0.5 * n) * std::pow((n - 1.0) * (n - 1.0) + 1.0, 0.5 * n) -
                lambda * std::pow(n, n - 1.0) / std::pow(p.radius, n - 2.0));
}

/// ||u_k||_inf <= factor(λ_k) ||u_k||_1. A negative right side is flagged vacuous.
inline BoundReport eigen_bound_check(const BallModulusParams& p, const EigenPair& ep) {
  const double l1 = ep.u.norm_l1();
  const double linf = ep.u.norm_linf();
  const double rhs = eigen_bound_factor(p, ep.lambda) * l1;
  auto r = make_report("eigen", linf, rhs, 0.0,
                       {{"k", ep.k}, {"lambda", ep.lambda}, {"l1", l1}, {"linf", linf}, {"R", p.radius}});
  r.vacuous = rhs < 0.0;
  return r;
}

/// The modulus bound with printed constants applied to -Δu_k = λ_k u_k:
/// ||u_k||_inf <= printed_modulus_bound(λ_k ||u_k||_1, λ_k ||u_k||_inf).
inline BoundReport eigen_raw_bound_check(const BallModulusParams& p, const EigenPair& ep) {
  const double l1 = ep.u.norm_l1();
  const double linf = ep.u.norm_linf();
  const double rhs = printed_modulus_bound(p, ep.lambda * l1, ep.lambda * linf);
  return make_report("eigen_raw", linf, rhs, 0.0, {{"k", ep.k}, {"lambda", ep.lambda}, {"l1", l1}, {"linf", linf}});
}

inline BoundReport eigen_raw_bound_check(const EigenPair& ep, const GridDomain& d) {
  return eigen_raw_bound_check(BallModulusParams::for_domain(d), ep);
}

}  // namespace poisson_sharp
