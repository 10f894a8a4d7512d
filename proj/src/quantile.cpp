#include <algorithm>
#include <cmath>

#include "monoext/gridfn.hpp"

namespace monoext {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

void check_interval(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw InvalidArgument("support must be a finite interval");
}

}  // namespace

QuantileTransform QuantileTransform::uniform(double lo, double hi) {
  check_interval(lo, hi);
  QuantileTransform t;
  t.kind_ = Kind::uniform;
  t.lo_ = lo;
  t.hi_ = hi;
  return t;
}

QuantileTransform QuantileTransform::truncated_normal(double lo, double hi, double mu, double sigma) {
  check_interval(lo, hi);
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  QuantileTransform t;
  t.kind_ = Kind::truncated_normal;
  t.lo_ = lo;
  t.hi_ = hi;
  t.mu_ = mu;
  t.sigma_ = sigma;
  t.mass_lo_ = t.raw_cdf(lo);
  t.mass_hi_ = t.raw_cdf(hi);
  if (!(t.mass_hi_ > t.mass_lo_)) throw InvalidArgument("truncation leaves no mass");
  return t;
}

QuantileTransform QuantileTransform::truncated_lognormal(double lo, double hi, double mu, double sigma) {
  check_interval(lo, hi);
  if (lo < 0.0) throw InvalidArgument("lognormal support must be nonnegative");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  QuantileTransform t;
  t.kind_ = Kind::truncated_lognormal;
  t.lo_ = lo;
  t.hi_ = hi;
  t.mu_ = mu;
  t.sigma_ = sigma;
  t.mass_lo_ = t.raw_cdf(lo);
  t.mass_hi_ = t.raw_cdf(hi);
  if (!(t.mass_hi_ > t.mass_lo_)) throw InvalidArgument("truncation leaves no mass");
  return t;
}

QuantileTransform QuantileTransform::tabulated(std::vector<double> xs, std::vector<double> cdf) {
  if (xs.size() != cdf.size() || xs.size() < 2) throw LengthMismatch("tabulated CDF needs matching columns of length >= 2");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidArgument("tabulated abscissae must increase");
    if (cdf[i] < cdf[i - 1]) throw NotMonotone("tabulated CDF decreases");
  }
  if (std::abs(cdf.front()) > 1e-12 || std::abs(cdf.back() - 1.0) > 1e-12) {
    throw InvalidArgument("tabulated CDF must run from 0 to 1");
  }
  QuantileTransform t;
  t.kind_ = Kind::tabulated;
  t.lo_ = xs.front();
  t.hi_ = xs.back();
  t.xs_ = std::move(xs);
  t.table_ = std::move(cdf);
  return t;
}

double QuantileTransform::raw_cdf(double x) const {
  switch (kind_) {
    case Kind::truncated_normal:
      return normal_cdf((x - mu_) / sigma_);
    case Kind::truncated_lognormal:
      return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - mu_) / sigma_);
    default:
      return 0.0;
  }
}

double QuantileTransform::raw_density(double x) const {
  switch (kind_) {
    case Kind::truncated_normal:
      return normal_pdf((x - mu_) / sigma_) / sigma_;
    case Kind::truncated_lognormal:
      return x <= 0.0 ? 0.0 : normal_pdf((std::log(x) - mu_) / sigma_) / (sigma_ * x);
    default:
      return 0.0;
  }
}

double QuantileTransform::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  switch (kind_) {
    case Kind::uniform:
      return (x - lo_) / (hi_ - lo_);
    case Kind::tabulated: {
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t i = static_cast<std::size_t>(it - xs_.begin());
      double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
      return table_[i - 1] + w * (table_[i] - table_[i - 1]);
    }
    default:
      return std::clamp((raw_cdf(x) - mass_lo_) / (mass_hi_ - mass_lo_), 0.0, 1.0);
  }
}

double QuantileTransform::density(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  switch (kind_) {
    case Kind::uniform:
      return 1.0 / (hi_ - lo_);
    case Kind::tabulated: {
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t i = std::min(static_cast<std::size_t>(it - xs_.begin()), xs_.size() - 1);
      return (table_[i] - table_[i - 1]) / (xs_[i] - xs_[i - 1]);
    }
    default:
      return raw_density(x) / (mass_hi_ - mass_lo_);
  }
}

double QuantileTransform::inverse(double z) const {
  if (z < 0.0) return lo_;
  if (z >= 1.0) return hi_;
  if (kind_ == Kind::uniform) return lo_ + z * (hi_ - lo_);
  // Smallest x with G(x) > z, found by bisection on the monotone predicate.
  double a = lo_, b = hi_;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    double mid = 0.5 * (a + b);
    if (cdf(mid) > z) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return b;
}

std::vector<double> QuantileTransform::cell_masses(int cells) const {
  if (cells < 1) throw InvalidArgument("need at least one cell");
  std::vector<double> m(cells);
  double prev = 0.0;
  for (int k = 0; k < cells; ++k) {
    double edge = k + 1 == cells ? hi_ : lo_ + (hi_ - lo_) * (k + 1) / cells;
    double c = cdf(edge);
    m[k] = c - prev;
    prev = c;
  }
  return m;
}

}  // namespace monoext
