#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "poisson_sharp/grid_domain.hpp"

namespace poisson_sharp {

struct EllipseFit {
  double area = 0.0;                  // measure of the cell set
  double semi_major = 0.0, semi_minor = 0.0;
  double perimeter = 0.0;             // of the moment-equivalent ellipse
  double circularity = 0.0;           // 4π·area / perimeter², 1 for a disk
  std::array<double, 2> centroid{};
};

/// Fits the ellipse with the same first and second moments as a set of 2D
/// cells (each cell a uniform h x h square) and reports its circularity.
/// Area is the cell-set area, perimeter the ellipse's (Ramanujan's second
/// approximation), so elongation and holes both lower the value.
inline EllipseFit best_fit_ellipse(const GridDomain& d, std::span<const int> cells) {
  if (d.dim() != 2) throw std::invalid_argument("best_fit_ellipse: 2D domains only");
  if (cells.empty()) throw std::invalid_argument("best_fit_ellipse: empty cell set");
  EllipseFit e;
  double sx = 0, sy = 0;
  for (int n : cells) {
    const auto x = d.center(n);
    sx += x[0];
    sy += x[1];
  }
  const double count = static_cast<double>(cells.size());
  e.centroid = {sx / count, sy / count};
  double cxx = 0, cyy = 0, cxy = 0;
  for (int n : cells) {
    const auto x = d.center(n);
    const double dx = x[0] - e.centroid[0], dy = x[1] - e.centroid[1];
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  const double self = d.spacing() * d.spacing() / 12.0;  // a cell's own spread
  cxx = cxx / count + self;
  cyy = cyy / count + self;
  cxy /= count;
  const double mean = 0.5 * (cxx + cyy);
  const double dev = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
  // A uniform ellipse with semi-axis a has variance a²/4 along it.
  e.semi_major = 2.0 * std::sqrt(mean + dev);
  e.semi_minor = 2.0 * std::sqrt(std::max(mean - dev, 0.0));
  e.area = count * d.cell_volume();
  const double a = e.semi_major, b = e.semi_minor;
  const double hh = (a - b) * (a - b) / ((a + b) * (a + b));
  e.perimeter = std::numbers::pi * (a + b) * (1.0 + 3.0 * hh / (10.0 + std::sqrt(4.0 - 3.0 * hh)));
  e.circularity = 4.0 * std::numbers::pi * e.area / (e.perimeter * e.perimeter);
  return e;
}

/// Interior cells with a positive value.
template <class Field>
std::vector<int> support_cells(const Field& f) {
  std::vector<int> out;
  for (std::size_t n = 0; n < f.size(); ++n)
    if (f[n] > 0.0) out.push_back(static_cast<int>(n));
  return out;
}

}  // namespace poisson_sharp
