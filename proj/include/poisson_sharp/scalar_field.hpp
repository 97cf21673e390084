#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "poisson_sharp/grid_domain.hpp"

namespace poisson_sharp {

/// Real values on the interior cells of a GridDomain.
class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(DomainPtr domain, double value = 0.0)
      : domain_(std::move(domain)), values_(domain_->size(), value) {}
  ScalarField(DomainPtr domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->size()) throw std::invalid_argument("field size does not match domain");
  }

  const DomainPtr& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t n) noexcept { return values_[n]; }
  double operator[](std::size_t n) const noexcept { return values_[n]; }

  /// Sum of values times cell volume.
  double integral() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * domain_->cell_volume();
  }
  double norm_l1() const noexcept {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s * domain_->cell_volume();
  }
  double norm_l2() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s * domain_->cell_volume());
  }
  double norm_linf() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  /// Interior index of the largest value; ties go to the lowest index.
  int argmax() const noexcept {
    int best = 0;
    for (std::size_t n = 1; n < values_.size(); ++n)
      if (values_[n] > values_[best]) best = static_cast<int>(n);
    return best;
  }
  int argmin() const noexcept {
    int best = 0;
    for (std::size_t n = 1; n < values_.size(); ++n)
      if (values_[n] < values_[best]) best = static_cast<int>(n);
    return best;
  }
  double max() const noexcept { return values_[argmax()]; }
  double min() const noexcept { return values_[argmin()]; }
  bool all_finite() const noexcept {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  ScalarField& operator*=(double c) noexcept {
    for (double& v : values_) v *= c;
    return *this;
  }
  ScalarField& operator+=(const ScalarField& o) {
    require_same_domain(o);
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_domain(o);
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
    return *this;
  }
  friend ScalarField operator*(double c, ScalarField f) { return f *= c; }
  friend ScalarField operator*(ScalarField f, double c) { return f *= c; }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }

  void require_same_domain(const ScalarField& o) const {
    if (o.domain_.get() != domain_.get()) throw std::invalid_argument("fields live on different domains");
  }

private:
  DomainPtr domain_;
  std::vector<double> values_;
};

/// Positive and negative parts, f = f_plus - f_minus with both nonnegative.
inline std::pair<ScalarField, ScalarField> split_sign(const ScalarField& f) {
  ScalarField plus(f.domain()), minus(f.domain());
  for (std::size_t n = 0; n < f.size(); ++n) {
    plus[n] = std::max(f[n], 0.0);
    minus[n] = std::max(-f[n], 0.0);
  }
  return {std::move(plus), std::move(minus)};
}

}  // namespace poisson_sharp
