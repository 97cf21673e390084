#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "poisson_sharp/scalar_field.hpp"

namespace poisson_sharp {

/// 64-bit linear congruential generator
///   x_{k+1} = 6364136223846793005 * x_k + 1442695040888963407  (mod 2^64)
/// with uniform doubles taken from the top 53 bits. Every random family in
/// this library is derived from it, so any implementation reproduces the
/// same suites from the same seed.
class Lcg64 {
public:
  using engine = std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL, 1442695040888963407ULL, 0ULL>;

  explicit Lcg64(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
  engine engine_;
};

namespace detail {

struct BoundingBox {
  std::array<double, 3> lo{}, hi{};
  double diameter = 0.0;
};

inline BoundingBox interior_box(const GridDomain& d) {
  BoundingBox b;
  b.lo.fill(std::numeric_limits<double>::infinity());
  b.hi.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t n = 0; n < d.size(); ++n) {
    auto x = d.center(static_cast<int>(n));
    for (int a = 0; a < d.dim(); ++a) {
      b.lo[a] = std::min(b.lo[a], x[a]);
      b.hi[a] = std::max(b.hi[a], x[a]);
    }
  }
  double s = 0.0;
  for (int a = 0; a < d.dim(); ++a) s += (b.hi[a] - b.lo[a]) * (b.hi[a] - b.lo[a]);
  b.diameter = std::sqrt(s);
  return b;
}

inline std::array<double, 3> random_point(const GridDomain& d, Lcg64& rng) {
  // A random interior cell center keeps blobs anchored inside the domain.
  return d.center(static_cast<int>(rng.index(d.size())));
}

inline double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace detail

/// Indicator of a union of 1-3 random balls centered at interior cells,
/// radius in [0.05, 0.3] x domain diameter. Values in {0, 1}.
inline ScalarField random_indicator_blobs(const DomainPtr& d, Lcg64& rng) {
  const auto box = detail::interior_box(*d);
  ScalarField f(d);
  const int blobs = 1 + static_cast<int>(rng.index(3));
  for (int b = 0; b < blobs; ++b) {
    const auto c = detail::random_point(*d, rng);
    const double r = rng.uniform(0.05, 0.3) * box.diameter;
    for (std::size_t n = 0; n < d->size(); ++n)
      if (detail::dist2(d->center(static_cast<int>(n)), c, d->dim()) < r * r) f[n] = 1.0;
  }
  return f;
}

/// Sum of 1-4 Gaussian bumps with random heights in [0.3, 2], clipped to [0, 1].
inline ScalarField random_clipped_bumps(const DomainPtr& d, Lcg64& rng) {
  const auto box = detail::interior_box(*d);
  ScalarField f(d);
  const int bumps = 1 + static_cast<int>(rng.index(4));
  for (int b = 0; b < bumps; ++b) {
    const auto c = detail::random_point(*d, rng);
    const double w = rng.uniform(0.05, 0.25) * box.diameter;
    const double height = rng.uniform(0.3, 2.0);
    for (std::size_t n = 0; n < d->size(); ++n)
      f[n] += height * std::exp(-detail::dist2(d->center(static_cast<int>(n)), c, d->dim()) / (2.0 * w * w));
  }
  for (double& v : f.values()) v = std::clamp(v, 0.0, 1.0);
  return f;
}

/// Nonnegative field with values in [0, 1]: alternates blob indicators and
/// clipped bumps, scaled by a random amplitude in [0.2, 1].
inline ScalarField random_nonnegative(const DomainPtr& d, Lcg64& rng) {
  ScalarField f = (rng.next() & 1) ? random_clipped_bumps(d, rng) : random_indicator_blobs(d, rng);
  const double amplitude = rng.uniform(0.2, 1.0);
  f *= amplitude;
  if (f.norm_linf() == 0.0) f[rng.index(d->size())] = amplitude;
  return f;
}

/// Sign-changing field: 2-4 blobs or bumps with random signs and amplitudes
/// in [0.2, 1], clipped to [-1, 1]. Redrawn until both signs are present.
inline ScalarField random_signed_blobs(const DomainPtr& d, Lcg64& rng) {
  for (;;) {
    ScalarField f(d);
    const int parts = 2 + static_cast<int>(rng.index(3));
    for (int p = 0; p < parts; ++p) {
      const double sign = p == 0 ? 1.0 : (p == 1 ? -1.0 : ((rng.next() & 1) ? 1.0 : -1.0));
      ScalarField part = (rng.next() & 1) ? random_clipped_bumps(d, rng) : random_indicator_blobs(d, rng);
      const double amplitude = rng.uniform(0.2, 1.0);
      for (std::size_t n = 0; n < d->size(); ++n) f[n] += sign * amplitude * part[n];
    }
    for (double& v : f.values()) v = std::clamp(v, -1.0, 1.0);
    if (f.max() > 0.0 && f.min() < 0.0) return f;
  }
}

}  // namespace poisson_sharp
