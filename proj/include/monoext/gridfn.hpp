#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoext/errors.hpp"

namespace monoext {

// Dimensions of a product grid; cells are stored row-major with axis 0 slowest.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> dims);

  int rank() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int axis) const { return dims_[axis]; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  int coord(std::size_t index, int axis) const {
    return static_cast<int>((index / strides_[axis]) % static_cast<std::size_t>(dims_[axis]));
  }
  std::vector<int> coords(std::size_t index) const;
  std::size_t index(std::span<const int> coords) const;

  std::string to_string() const;  // "3x4"
  static Shape parse(std::string_view text);

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

// Pairs (lo, hi) of cells with hi = lo + e_axis, in axis-major order. These are
// exactly the comparisons that generate the product order.
struct CoverPair {
  std::size_t lo;
  std::size_t hi;
  int axis;
};
std::vector<CoverPair> cover_pairs(const Shape& shape);

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Shape shape, std::vector<double> values);

  static GridFunction constant(const Shape& shape, double value);

  const Shape& shape() const { return shape_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::initializer_list<int> coords) const;

  double mean() const;
  double max_abs_diff(const GridFunction& other) const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

class UpSet {
 public:
  UpSet() = default;
  // Throws NotMonotone when the mask is not upward closed.
  UpSet(Shape shape, std::vector<char> mask);

  static UpSet empty(const Shape& shape);
  static UpSet full(const Shape& shape);
  static UpSet closure(const Shape& shape, std::span<const std::size_t> generators);
  // Two-dimensional up-set given by the lowest included axis-1 index in every
  // axis-0 column (dim(1) when the column is empty). g must be nonincreasing.
  static UpSet from_boundary(const Shape& shape, std::span<const int> g);

  const Shape& shape() const { return shape_; }
  bool contains(std::size_t cell) const { return mask_[cell] != 0; }
  const std::vector<char>& mask() const { return mask_; }
  std::size_t count() const;
  bool subset_of(const UpSet& other) const;
  std::vector<int> boundary() const;  // rank-2 only
  GridFunction indicator() const;

  bool operator==(const UpSet& other) const { return shape_ == other.shape_ && mask_ == other.mask_; }

 private:
  Shape shape_;
  std::vector<char> mask_;
};

// f = sum_j weights[j] * 1{sets[j]}, sets decreasing, levels[j] = value on sets[j] \ sets[j+1].
struct NestingRepresentation {
  Shape shape;
  std::vector<double> levels;
  std::vector<double> weights;
  std::vector<UpSet> sets;

  GridFunction reconstruct() const;
  // Floating point evaluation of the mixture sum, for comparisons that do not
  // need bitwise agreement.
  std::vector<double> mixture_sum() const;
};

class StepFunction1D {
 public:
  StepFunction1D() = default;
  // Values must lie in [0, 1] and be nondecreasing up to tol.
  explicit StepFunction1D(std::vector<double> values, double tol = 1e-12);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  double mean() const;
  // Integral of the step function over [x, 1] with cells of width 1/size.
  double tail_integral(double x) const;

 private:
  std::vector<double> values_;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

class QuantileTransform {
 public:
  enum class Kind { uniform, truncated_normal, truncated_lognormal, tabulated };

  static QuantileTransform uniform(double lo, double hi);
  static QuantileTransform truncated_normal(double lo, double hi, double mu, double sigma);
  // mu and sigma are the mean and standard deviation of log(x).
  static QuantileTransform truncated_lognormal(double lo, double hi, double mu, double sigma);
  // Piecewise linear CDF through (xs[i], cdf[i]); cdf must start at 0 and end at 1.
  static QuantileTransform tabulated(std::vector<double> xs, std::vector<double> cdf);

  Kind kind() const { return kind_; }
  Interval support() const { return {lo_, hi_}; }
  double cdf(double x) const;
  // inf{x : G(x) > z}, clamped to the support.
  double inverse(double z) const;
  double density(double x) const;
  // Probability of each of `cells` equal-width cells partitioning the support.
  std::vector<double> cell_masses(int cells) const;

 private:
  double raw_cdf(double x) const;
  double raw_density(double x) const;

  Kind kind_ = Kind::uniform;
  double lo_ = 0.0, hi_ = 1.0;
  double mu_ = 0.0, sigma_ = 1.0;
  double mass_lo_ = 0.0, mass_hi_ = 1.0;
  std::vector<double> xs_, table_;
};

bool is_monotone(const GridFunction& f, double tol = 1e-9);
// First violated cover pair, or none.
std::optional<CoverPair> first_monotonicity_violation(const GridFunction& f, double tol);

// Values closer than merge_tol are merged into one level (the largest of them);
// with merge_tol = 0 the reconstruction is bitwise exact.
NestingRepresentation nesting_decompose(const GridFunction& f, double merge_tol = 0.0);

// Slice means along every axis; these need not be monotone for general f.
std::vector<std::vector<double>> marginals(const GridFunction& f);
std::vector<std::vector<double>> marginals(const UpSet& a);
// Marginals of a monotone f as step functions. Throws NotMonotone otherwise.
std::vector<StepFunction1D> monotone_marginals(const GridFunction& f);

// Re-expresses f, defined on value cells over `domains`, in quantile coordinates.
// Throws SupportMismatch when a transform's support differs from its domain.
GridFunction to_quantile_space(const GridFunction& f, std::span<const QuantileTransform> transforms,
                               std::span<const Interval> domains);
GridFunction from_quantile_space(const GridFunction& f, std::span<const QuantileTransform> transforms,
                                 std::span<const Interval> domains);

// Average over all permutations of the axes. Throws DimsUnequal.
GridFunction symmetrize(const GridFunction& f);
std::vector<double> symmetrize_values(const Shape& shape, std::span<const double> values);
bool is_exchangeable(const Shape& shape, std::span<const double> values, double tol = 0.0);

// Joint densities evaluated at cell centres and renormalized to unit mass. The
// correlation is shared by every pair of axes.
enum class DensityKind { uniform, truncated_normal, truncated_lognormal };
struct DensitySpec {
  DensityKind kind = DensityKind::uniform;
  double mu = 0.0;     // log-scale for lognormal
  double sigma = 1.0;  // log-scale for lognormal
  double rho = 0.0;
};
std::vector<double> density_table(const Shape& shape, std::span<const Interval> domains, const DensitySpec& spec);

double cell_center(const Interval& domain, int cells, int k);

}  // namespace monoext
