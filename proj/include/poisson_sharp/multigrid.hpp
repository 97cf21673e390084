#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

#include "poisson_sharp/grid_domain.hpp"

namespace poisson_sharp {

/// Symmetric V-cycle for the cell-centered Dirichlet Laplacian on a masked grid
/// (zero Dirichlet value on interior/exterior cell faces).
///
/// Coarse levels are built by 2x agglomeration (a coarse cell is active when
/// any child is active) and rediscretized with spacing 2h. Transfers are the
/// cell-centered (bi/tri)linear prolongation P and R = P^T / 2^dim. The
/// pre-smoother is red-black Gauss-Seidel and the post-smoother is the same
/// sweep in reverse color order, so the cycle is a symmetric positive
/// definite linear operator suitable as a CG preconditioner. The coarsest
/// level is solved with a dense Cholesky factorization.
class Multigrid {
public:
  struct Level {
    int dim = 2;
    double h = 1.0;
    std::array<int, 3> extent{1, 1, 1};
    std::vector<int> linear;     // active cell -> linear index in this level's box
    std::vector<int> neighbors;  // 2*dim entries per active cell, -1 outside
    std::vector<int> red, black;
    // Prolongation from the next coarser level into this one (CSR by fine cell).
    std::vector<int> p_ptr, p_col;
    std::vector<double> p_weight;

    std::size_t size() const noexcept { return linear.size(); }
  };

  struct Workspace {
    std::vector<std::vector<double>> u, f, r;
  };

  explicit Multigrid(const GridDomain& d, int smoothing_steps = 2, std::size_t coarse_limit = 400)
      : smoothing_(smoothing_steps) {
    Level fine;
    fine.dim = d.dim();
    fine.h = d.spacing();
    fine.extent = d.extent();
    fine.linear.assign(d.cells().begin(), d.cells().end());
    fine.neighbors.assign(d.neighbor_table().begin(), d.neighbor_table().end());
    color(fine);
    levels_.push_back(std::move(fine));

    while (levels_.back().size() > coarse_limit) {
      const auto& e = levels_.back().extent;
      bool can_coarsen = true;
      for (int a = 0; a < levels_.back().dim; ++a) can_coarsen = can_coarsen && e[a] >= 6;
      if (!can_coarsen) break;
      levels_.push_back(coarsen(levels_.back()));
    }
    factor_coarsest();
  }

  std::size_t num_levels() const noexcept { return levels_.size(); }
  const Level& level(std::size_t l) const { return levels_[l]; }

  Workspace make_workspace() const {
    Workspace w;
    for (const auto& L : levels_) {
      w.u.emplace_back(L.size());
      w.f.emplace_back(L.size());
      w.r.emplace_back(L.size());
    }
    return w;
  }

  /// z = B r, one V-cycle from a zero initial guess.
  void apply(std::span<const double> r, std::span<double> z, Workspace& w) const {
    std::copy(r.begin(), r.end(), w.f[0].begin());
    cycle(0, w);
    std::copy(w.u[0].begin(), w.u[0].end(), z.begin());
  }

private:
  static void color(Level& L) {
    L.red.clear();
    L.black.clear();
    for (std::size_t n = 0; n < L.size(); ++n) {
      const int c = L.linear[n];
      const int i = c % L.extent[0];
      const int rest = c / L.extent[0];
      const int parity = (i + rest % L.extent[1] + rest / L.extent[1]) & 1;
      (parity ? L.black : L.red).push_back(static_cast<int>(n));
    }
  }

  static Level coarsen(Level& fine) {
    Level c;
    c.dim = fine.dim;
    c.h = 2.0 * fine.h;
    c.extent = {(fine.extent[0] + 1) / 2, (fine.extent[1] + 1) / 2, fine.dim == 3 ? (fine.extent[2] + 1) / 2 : 1};
    const auto& fe = fine.extent;
    const auto& ce = c.extent;
    const std::size_t box = static_cast<std::size_t>(ce[0]) * ce[1] * ce[2];
    std::vector<int> index(box, -1);
    std::vector<char> active(box, 0);
    auto fine_ijk = [&](int lin) {
      return std::array<int, 3>{lin % fe[0], (lin / fe[0]) % fe[1], lin / (fe[0] * fe[1])};
    };
    auto clin = [&](int i, int j, int k) { return i + ce[0] * (j + ce[1] * k); };
    for (int lin : fine.linear) {
      auto f = fine_ijk(lin);
      active[clin(f[0] / 2, f[1] / 2, f[2] / 2)] = 1;
    }
    for (std::size_t b = 0; b < box; ++b)
      if (active[b]) {
        index[b] = static_cast<int>(c.linear.size());
        c.linear.push_back(static_cast<int>(b));
      }

    const int stencil = 2 * c.dim;
    c.neighbors.assign(c.linear.size() * stencil, -1);
    for (std::size_t n = 0; n < c.linear.size(); ++n) {
      const int b = c.linear[n];
      std::array<int, 3> ijk{b % ce[0], (b / ce[0]) % ce[1], b / (ce[0] * ce[1])};
      for (int a = 0; a < c.dim; ++a)
        for (int s = 0; s < 2; ++s) {
          auto q = ijk;
          q[a] += s ? 1 : -1;
          if (q[a] < 0 || q[a] >= ce[a]) continue;
          c.neighbors[n * stencil + 2 * a + s] = index[clin(q[0], q[1], q[2])];
        }
    }
    color(c);

    // Linear interpolation weights: 3/4 from the parent, 1/4 from the
    // neighbor on the side of the child, per axis.
    fine.p_ptr.assign(1, 0);
    fine.p_col.clear();
    fine.p_weight.clear();
    for (int lin : fine.linear) {
      auto f = fine_ijk(lin);
      const int combos = 1 << c.dim;
      for (int m = 0; m < combos; ++m) {
        std::array<int, 3> q{0, 0, 0};
        double w = 1.0;
        bool inside = true;
        for (int a = 0; a < c.dim; ++a) {
          const int parent = f[a] / 2;
          const bool use_other = (m >> a) & 1;
          q[a] = use_other ? parent + ((f[a] & 1) ? 1 : -1) : parent;
          w *= use_other ? 0.25 : 0.75;
          inside = inside && q[a] >= 0 && q[a] < ce[a];
        }
        if (!inside) continue;
        const int J = index[clin(q[0], q[1], q[2])];
        if (J < 0) continue;
        fine.p_col.push_back(J);
        fine.p_weight.push_back(w);
      }
      fine.p_ptr.push_back(static_cast<int>(fine.p_col.size()));
    }
    return c;
  }

  void factor_coarsest() {
    const Level& L = levels_.back();
    const auto n = static_cast<Eigen::Index>(L.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const double inv_h2 = 1.0 / (L.h * L.h);
    const int stencil = 2 * L.dim;
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = stencil * inv_h2;
      for (int s = 0; s < stencil; ++s) {
        const int nb = L.neighbors[i * stencil + s];
        if (nb >= 0) A(i, nb) = -inv_h2;
        else A(i, i) += inv_h2;
      }
    }
    coarse_solver_.compute(A);
  }

  void smooth(const Level& L, std::vector<double>& u, const std::vector<double>& f,
              const std::vector<int>& cells) const {
    const int stencil = 2 * L.dim;
    const double h2 = L.h * L.h;
    const int* nb = L.neighbors.data();
    for (int n : cells) {
      double s = h2 * f[n];
      int diag = stencil;
      for (int k = 0; k < stencil; ++k) {
        const int m = nb[n * stencil + k];
        if (m >= 0) s += u[m];
        else ++diag;
      }
      u[n] = s / diag;
    }
  }

  void residual(const Level& L, const std::vector<double>& u, const std::vector<double>& f,
                std::vector<double>& r) const {
    const int stencil = 2 * L.dim;
    const double inv_h2 = 1.0 / (L.h * L.h);
    const int* nb = L.neighbors.data();
    for (std::size_t n = 0; n < L.size(); ++n) {
      double s = stencil * u[n];
      for (int k = 0; k < stencil; ++k) {
        const int m = nb[n * stencil + k];
        s -= m >= 0 ? u[m] : -u[n];
      }
      r[n] = f[n] - s * inv_h2;
    }
  }

  void cycle(std::size_t l, Workspace& w) const {
    const Level& L = levels_[l];
    auto& u = w.u[l];
    const auto& f = w.f[l];
    if (l + 1 == levels_.size()) {
      Eigen::Map<const Eigen::VectorXd> rhs(f.data(), static_cast<Eigen::Index>(f.size()));
      Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())) = coarse_solver_.solve(rhs);
      return;
    }
    std::fill(u.begin(), u.end(), 0.0);
    for (int s = 0; s < smoothing_; ++s) {
      smooth(L, u, f, L.red);
      smooth(L, u, f, L.black);
    }
    auto& r = w.r[l];
    residual(L, u, f, r);
    auto& fc = w.f[l + 1];
    std::fill(fc.begin(), fc.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(1 << L.dim);
    for (std::size_t i = 0; i < L.size(); ++i) {
      const double ri = r[i] * scale;
      for (int p = L.p_ptr[i]; p < L.p_ptr[i + 1]; ++p) fc[L.p_col[p]] += L.p_weight[p] * ri;
    }
    cycle(l + 1, w);
    const auto& uc = w.u[l + 1];
    for (std::size_t i = 0; i < L.size(); ++i) {
      double s = 0.0;
      for (int p = L.p_ptr[i]; p < L.p_ptr[i + 1]; ++p) s += L.p_weight[p] * uc[L.p_col[p]];
      u[i] += s;
    }
    for (int s = 0; s < smoothing_; ++s) {
      smooth(L, u, f, L.black);
      smooth(L, u, f, L.red);
    }
  }

  int smoothing_;
  std::vector<Level> levels_;
  Eigen::LLT<Eigen::MatrixXd> coarse_solver_;
};

}  // namespace poisson_sharp
