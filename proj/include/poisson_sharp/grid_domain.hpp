#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "poisson_sharp/common.hpp"

namespace poisson_sharp {

/// A uniform Cartesian grid (2D or 3D) with a mask of interior cells.
///
/// Cells are addressed two ways: by linear index into the bounding box
/// (i + nx*(j + ny*k)) and by interior index 0..N-1, which enumerates interior
/// cells in ascending linear order. Every interior cell has at least one
/// layer of exterior cells between it and the edge of the box, so the face
/// neighbors of an interior cell always exist in the box. Exterior neighbors
/// carry the homogeneous Dirichlet value.
class GridDomain {
public:
  GridDomain(int dim, double spacing, std::array<int, 3> extent, std::vector<std::uint8_t> mask,
             std::array<double, 3> origin = {0.0, 0.0, 0.0})
      : dim_(dim), h_(spacing), extent_(extent), origin_(origin), mask_(std::move(mask)) {
    if (dim_ != 2 && dim_ != 3) throw DomainError("grid dimension must be 2 or 3");
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("grid spacing must be positive");
    if (dim_ == 2) extent_[2] = 1;
    for (int a = 0; a < dim_; ++a)
      if (extent_[a] < 3) throw DomainError("degenerate domain: extent below 3 cells");
    const std::size_t total =
        static_cast<std::size_t>(extent_[0]) * extent_[1] * static_cast<std::size_t>(extent_[2]);
    if (mask_.size() != total) throw DomainError("mask size does not match grid extent");

    index_.assign(total, -1);
    for (std::size_t c = 0; c < total; ++c) {
      if (!mask_[c]) continue;
      mask_[c] = 1;
      auto ijk = coords(static_cast<int>(c));
      for (int a = 0; a < dim_; ++a)
        if (ijk[a] == 0 || ijk[a] == extent_[a] - 1)
          throw DomainError("interior cell touches the bounding box");
      index_[c] = static_cast<int>(cells_.size());
      cells_.push_back(static_cast<int>(c));
    }
    if (cells_.empty()) throw DomainError("degenerate domain: no interior cells");

    const int stencil = 2 * dim_;
    neighbors_.resize(cells_.size() * stencil);
    const std::array<int, 3> stride{1, extent_[0], extent_[0] * extent_[1]};
    for (std::size_t n = 0; n < cells_.size(); ++n) {
      for (int a = 0; a < dim_; ++a) {
        neighbors_[n * stencil + 2 * a] = index_[cells_[n] - stride[a]];
        neighbors_[n * stencil + 2 * a + 1] = index_[cells_[n] + stride[a]];
      }
    }
    if (!connected()) throw DomainError("disconnected domain");
  }

  int dim() const noexcept { return dim_; }
  double spacing() const noexcept { return h_; }
  const std::array<int, 3>& extent() const noexcept { return extent_; }
  const std::array<double, 3>& origin() const noexcept { return origin_; }
  double cell_volume() const noexcept { return std::pow(h_, dim_); }
  /// Number of interior cells.
  std::size_t size() const noexcept { return cells_.size(); }
  double measure() const noexcept { return static_cast<double>(cells_.size()) * cell_volume(); }
  std::size_t box_size() const noexcept { return mask_.size(); }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  int linear(int i, int j, int k = 0) const noexcept { return i + extent_[0] * (j + extent_[1] * k); }
  std::array<int, 3> coords(int linear_index) const noexcept {
    const int i = linear_index % extent_[0];
    const int rest = linear_index / extent_[0];
    return {i, rest % extent_[1], rest / extent_[1]};
  }
  /// Linear index of interior cell n.
  int cell(int n) const noexcept { return cells_[n]; }
  /// Interior index of a linear cell, or -1 when the cell is exterior.
  int interior_index(int linear_index) const noexcept { return index_[linear_index]; }
  std::span<const int> cells() const noexcept { return cells_; }

  /// Face neighbors of interior cell n in the order -x,+x,-y,+y[,-z,+z]; -1 marks exterior.
  std::span<const int> neighbors(int n) const noexcept {
    return {neighbors_.data() + static_cast<std::size_t>(n) * 2 * dim_, static_cast<std::size_t>(2 * dim_)};
  }
  std::span<const int> neighbor_table() const noexcept { return neighbors_; }

  std::array<double, 3> center(int n) const noexcept {
    auto ijk = coords(cells_[n]);
    std::array<double, 3> x{};
    for (int a = 0; a < dim_; ++a) x[a] = origin_[a] + (ijk[a] + 0.5) * h_;
    return x;
  }

  bool touches_boundary(int n) const noexcept {
    for (int nb : neighbors(n))
      if (nb < 0) return true;
    return false;
  }

private:
  bool connected() const {
    std::vector<char> seen(cells_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      for (int nb : neighbors(n)) {
        if (nb >= 0 && !seen[nb]) {
          seen[nb] = 1;
          ++reached;
          stack.push_back(nb);
        }
      }
    }
    return reached == cells_.size();
  }

  int dim_;
  double h_;
  std::array<int, 3> extent_;
  std::array<double, 3> origin_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> cells_;
  std::vector<int> index_;
  std::vector<int> neighbors_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Radius of the ball with the same measure as the domain.
inline double equivalent_ball_radius(const GridDomain& d) {
  return std::pow(d.measure() / unit_ball_volume(d.dim()), 1.0 / d.dim());
}

/// Interior cell nearest to the centroid of the interior cell centers
/// (ties resolved to the lowest interior index).
inline int centermost_cell(const GridDomain& d) {
  std::array<double, 3> c{};
  for (std::size_t n = 0; n < d.size(); ++n) {
    auto x = d.center(static_cast<int>(n));
    for (int a = 0; a < 3; ++a) c[a] += x[a];
  }
  for (double& v : c) v /= static_cast<double>(d.size());
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < d.size(); ++n) {
    auto x = d.center(static_cast<int>(n));
    double dist = 0.0;
    for (int a = 0; a < d.dim(); ++a) dist += (x[a] - c[a]) * (x[a] - c[a]);
    // Relative slack absorbs roundoff between mirror-image cells.
    if (dist < best_dist * (1.0 - 1e-12) - 1e-300) {
      best_dist = dist;
      best = static_cast<int>(n);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Shapes

struct ShapeSpec {
  enum class Kind { disk, ball, square, cube, annulus, l_shape, mask_file };
  Kind kind = Kind::disk;
  std::vector<double> params;  // R | L | R_in,R_out
  std::string path;            // mask_file only

  int dim() const {
    switch (kind) {
      case Kind::ball:
      case Kind::cube:
        return 3;
      case Kind::mask_file:
        return 0;  // known after reading the file
      default:
        return 2;
    }
  }
};

inline std::string to_string(const ShapeSpec& s) {
  static constexpr const char* names[] = {"disk", "ball", "square", "cube", "annulus", "l_shape", "mask"};
  std::string out = names[static_cast<int>(s.kind)];
  if (s.kind == ShapeSpec::Kind::mask_file) return out + ":" + s.path;
  for (std::size_t i = 0; i < s.params.size(); ++i) out += (i == 0 ? ":" : ",") + format_double(s.params[i]);
  return out;
}

/// Parses "disk:1.0", "ball:1", "square:1", "cube:1", "annulus:0.3,1.0",
/// "l_shape:1" or "mask:<path>".
inline ShapeSpec parse_shape(std::string_view text) {
  ShapeSpec s;
  auto colon = text.find(':');
  std::string name(text.substr(0, colon));
  std::string args = colon == std::string_view::npos ? std::string() : std::string(text.substr(colon + 1));
  using K = ShapeSpec::Kind;
  std::size_t expected = 1;
  if (name == "disk") s.kind = K::disk;
  else if (name == "ball") s.kind = K::ball;
  else if (name == "square") s.kind = K::square;
  else if (name == "cube") s.kind = K::cube;
  else if (name == "annulus") { s.kind = K::annulus; expected = 2; }
  else if (name == "l_shape" || name == "lshape") s.kind = K::l_shape;
  else if (name == "mask" || name == "mask_file") {
    s.kind = K::mask_file;
    if (args.empty()) throw std::invalid_argument("mask shape needs a path");
    s.path = args;
    return s;
  } else {
    throw std::invalid_argument("unknown shape '" + name + "'");
  }
  std::stringstream ss(args);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      s.params.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad shape parameter '" + tok + "'");
    }
  }
  if (s.params.empty() && expected == 1) s.params.push_back(1.0);
  if (s.params.size() != expected) throw std::invalid_argument("wrong parameter count for shape '" + name + "'");
  for (double p : s.params)
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("shape parameters must be positive");
  if (s.kind == K::annulus && !(s.params[0] < s.params[1]))
    throw std::invalid_argument("annulus needs R_in < R_out");
  return s;
}

// ---------------------------------------------------------------------------
// Mask files
//
//   dim h nx ny [nz]
//   0/1 rows, one row per (y, z) in increasing y then z, x increasing along the row
//
// Whitespace between digits is optional; lines starting with '#' are comments.

inline DomainPtr read_mask(std::istream& in) {
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw DomainError("mask file: missing header");
  std::istringstream header(lines.front());
  int dim = 0;
  double h = 0.0;
  std::array<int, 3> n{1, 1, 1};
  header >> dim >> h >> n[0] >> n[1];
  if (dim == 3) header >> n[2];
  if (!header || (dim != 2 && dim != 3) || !(h > 0.0) || n[0] < 1 || n[1] < 1 || n[2] < 1)
    throw DomainError("mask file: bad header '" + lines.front() + "'");

  std::vector<std::uint8_t> raw;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    for (char c : lines[l]) {
      if (c == '0' || c == '1') raw.push_back(static_cast<std::uint8_t>(c - '0'));
      else if (c != ' ' && c != '\t' && c != '\r') throw DomainError(std::string("mask file: unexpected character '") + c + "'");
    }
  }
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  if (raw.size() != total)
    throw DomainError("mask file: expected " + std::to_string(total) + " cells, found " + std::to_string(raw.size()));

  // Pad with one exterior layer so interior cells never touch the box.
  std::array<int, 3> e{n[0] + 2, n[1] + 2, dim == 3 ? n[2] + 2 : 1};
  const int dz = dim == 3 ? 1 : 0;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(e[0]) * e[1] * e[2], 0);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        mask[(i + 1) + e[0] * ((j + 1) + e[1] * (k + dz))] = raw[i + n[0] * (j + n[1] * k)];
  std::array<double, 3> origin{-h, -h, dim == 3 ? -h : 0.0};
  return std::make_shared<const GridDomain>(dim, h, e, std::move(mask), origin);
}

inline DomainPtr read_mask_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open mask file '" + path + "'");
  return read_mask(in);
}

/// Writes the full bounding box, including the exterior layer.
inline void write_mask(std::ostream& out, const GridDomain& d) {
  const auto& e = d.extent();
  out << d.dim() << ' ' << format_double(d.spacing()) << ' ' << e[0] << ' ' << e[1];
  if (d.dim() == 3) out << ' ' << e[2];
  out << '\n';
  auto m = d.mask();
  for (int k = 0; k < e[2]; ++k)
    for (int j = 0; j < e[1]; ++j) {
      for (int i = 0; i < e[0]; ++i) out << static_cast<char>('0' + m[d.linear(i, j, k)]);
      out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Domain construction

namespace detail {

// Cell-center membership test, evaluated in units of h.
template <typename Inside>
DomainPtr rasterize(int dim, double h, std::array<int, 3> extent, std::array<double, 3> origin, Inside&& inside) {
  if (dim == 2) extent[2] = 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(extent[0]) * extent[1] * extent[2], 0);
  for (int k = 0; k < extent[2]; ++k)
    for (int j = 0; j < extent[1]; ++j)
      for (int i = 0; i < extent[0]; ++i) {
        std::array<double, 3> x{origin[0] + (i + 0.5) * h, origin[1] + (j + 0.5) * h,
                                dim == 3 ? origin[2] + (k + 0.5) * h : 0.0};
        mask[i + extent[0] * (j + extent[1] * k)] = inside(x) ? 1 : 0;
      }
  return std::make_shared<const GridDomain>(dim, h, extent, std::move(mask), origin);
}

inline void require_resolution(double feature, double h) {
  if (feature / h < 8.0 - 1e-9)
    throw DomainError("degenerate domain: fewer than 8 cells across the smallest feature");
}

}  // namespace detail

/// Rasterizes a shape with `resolution` cells per unit length.
///
/// Round shapes (disk, ball, annulus) are centered on a cell center at the
/// origin so the center cell is unique; box shapes cover [0, L]^n with cell
/// faces on the box faces, so L*resolution integral tiles them exactly.
inline DomainPtr make_domain(const ShapeSpec& shape, double resolution) {
  using K = ShapeSpec::Kind;
  if (shape.kind == K::mask_file) return read_mask_file(shape.path);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw DomainError("resolution must be positive");
  const double h = 1.0 / resolution;
  const int dim = shape.dim();
  const double eps = 1e-12;

  switch (shape.kind) {
    case K::disk:
    case K::ball:
    case K::annulus: {
      const double r_out = shape.params.back();
      const double r_in = shape.kind == K::annulus ? shape.params[0] : 0.0;
      detail::require_resolution(shape.kind == K::annulus ? r_out - r_in : 2.0 * r_out, h);
      const int m = static_cast<int>(std::ceil(r_out / h)) + 1;
      std::array<int, 3> ext{2 * m + 1, 2 * m + 1, dim == 3 ? 2 * m + 1 : 1};
      std::array<double, 3> origin{-(m + 0.5) * h, -(m + 0.5) * h, dim == 3 ? -(m + 0.5) * h : 0.0};
      const double out2 = r_out * r_out * (1.0 - eps), in2 = r_in * r_in * (1.0 + eps);
      return detail::rasterize(dim, h, ext, origin, [&](const std::array<double, 3>& x) {
        double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return r2 < out2 && (r_in == 0.0 || r2 > in2);
      });
    }
    case K::square:
    case K::cube:
    case K::l_shape: {
      const double L = shape.params[0];
      detail::require_resolution(shape.kind == K::l_shape ? 0.5 * L : L, h);
      const int n = static_cast<int>(std::ceil(L / h - 1e-9)) + 2;
      std::array<int, 3> ext{n, n, dim == 3 ? n : 1};
      std::array<double, 3> origin{-h, -h, dim == 3 ? -h : 0.0};
      const bool l_shape = shape.kind == K::l_shape;
      return detail::rasterize(dim, h, ext, origin, [&](const std::array<double, 3>& x) {
        for (int a = 0; a < dim; ++a)
          if (!(x[a] > 0.0 && x[a] < L)) return false;
        if (l_shape && x[0] > 0.5 * L && x[1] > 0.5 * L) return false;
        return true;
      });
    }
    default:
      break;
  }
  throw DomainError("unsupported shape");
}

inline DomainPtr make_domain(std::string_view shape, double resolution) {
  return make_domain(parse_shape(shape), resolution);
}

/// Exact measure of a built-in shape (for convergence checks).
inline double shape_measure(const ShapeSpec& s) {
  using K = ShapeSpec::Kind;
  switch (s.kind) {
    case K::disk: return std::numbers::pi * s.params[0] * s.params[0];
    case K::ball: return unit_ball_volume(3) * std::pow(s.params[0], 3);
    case K::square: return s.params[0] * s.params[0];
    case K::cube: return std::pow(s.params[0], 3);
    case K::annulus: return std::numbers::pi * (s.params[1] * s.params[1] - s.params[0] * s.params[0]);
    case K::l_shape: return 0.75 * s.params[0] * s.params[0];
    default: throw DomainError("mask shapes have no analytic measure");
  }
}

/// Grid ball with exactly `count` cells: the cells whose centers are nearest
/// to a central cell center (integer squared distance, ties by linear index).
/// The result is the equal-measure ball used for rank rearrangement.
inline DomainPtr make_rank_ball(int dim, double h, std::size_t count) {
  if (count == 0) throw DomainError("degenerate domain: empty ball");
  const double radius_cells = std::pow(static_cast<double>(count) / unit_ball_volume(dim), 1.0 / dim);
  const int m = static_cast<int>(std::ceil(radius_cells)) + 3;
  const int e = 2 * m + 1;
  std::array<int, 3> ext{e, e, dim == 3 ? e : 1};
  const int mz = dim == 3 ? m : 0;
  std::vector<std::pair<long, int>> order;
  order.reserve(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2]);
  for (int k = 0; k < ext[2]; ++k)
    for (int j = 0; j < ext[1]; ++j)
      for (int i = 0; i < ext[0]; ++i) {
        long di = i - m, dj = j - m, dk = k - mz;
        order.emplace_back(di * di + dj * dj + dk * dk, i + ext[0] * (j + ext[1] * k));
      }
  std::sort(order.begin(), order.end());
  std::vector<std::uint8_t> mask(order.size(), 0);
  for (std::size_t c = 0; c < count; ++c) mask[order[c].second] = 1;
  std::array<double, 3> origin{-(m + 0.5) * h, -(m + 0.5) * h, dim == 3 ? -(m + 0.5) * h : 0.0};
  return std::make_shared<const GridDomain>(dim, h, ext, std::move(mask), origin);
}

}  // namespace poisson_sharp
