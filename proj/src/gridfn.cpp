#include "monoext/gridfn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace monoext {

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > 4) throw InvalidArgument("grid rank must be between 1 and 4");
  strides_.assign(dims_.size(), 1);
  size_ = 1;
  for (int a = static_cast<int>(dims_.size()) - 1; a >= 0; --a) {
    if (dims_[a] < 1) throw InvalidArgument("grid dimensions must be positive");
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(dims_[a]);
  }
}

std::vector<int> Shape::coords(std::size_t index) const {
  std::vector<int> c(dims_.size());
  for (int a = 0; a < rank(); ++a) c[a] = coord(index, a);
  return c;
}

std::size_t Shape::index(std::span<const int> coords) const {
  std::size_t idx = 0;
  for (int a = 0; a < rank(); ++a) idx += strides_[a] * static_cast<std::size_t>(coords[a]);
  return idx;
}

std::string Shape::to_string() const {
  std::string s;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (a) s += 'x';
    s += std::to_string(dims_[a]);
  }
  return s;
}

Shape Shape::parse(std::string_view text) {
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('x', pos);
    if (end == std::string_view::npos) end = text.size();
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, v);
    if (ec != std::errc() || ptr != text.data() + end) throw InvalidArgument("bad dims '" + std::string(text) + "'");
    dims.push_back(v);
    pos = end + 1;
  }
  return Shape(dims);
}

std::vector<CoverPair> cover_pairs(const Shape& shape) {
  std::vector<CoverPair> pairs;
  for (int a = 0; a < shape.rank(); ++a) {
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (shape.coord(i, a) + 1 < shape.dim(a)) pairs.push_back({i, i + shape.stride(a), a});
    }
  }
  return pairs;
}

GridFunction::GridFunction(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_.size()) throw LengthMismatch("grid function has wrong number of values");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("grid function value outside [0,1]");
  }
}

GridFunction GridFunction::constant(const Shape& shape, double value) {
  return GridFunction(shape, std::vector<double>(shape.size(), value));
}

double GridFunction::at(std::initializer_list<int> coords) const {
  return values_[shape_.index(std::span<const int>(coords.begin(), coords.size()))];
}

double GridFunction::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double GridFunction::max_abs_diff(const GridFunction& other) const {
  if (!(shape_ == other.shape_)) throw LengthMismatch("shapes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) d = std::max(d, std::abs(values_[i] - other.values_[i]));
  return d;
}

UpSet::UpSet(Shape shape, std::vector<char> mask) : shape_(std::move(shape)), mask_(std::move(mask)) {
  if (mask_.size() != shape_.size()) throw LengthMismatch("up-set mask has wrong size");
  for (auto& m : mask_) m = m ? 1 : 0;
  for (const auto& p : cover_pairs(shape_)) {
    if (mask_[p.lo] && !mask_[p.hi]) throw NotMonotone("mask is not upward closed");
  }
}

UpSet UpSet::empty(const Shape& shape) { return UpSet(shape, std::vector<char>(shape.size(), 0)); }
UpSet UpSet::full(const Shape& shape) { return UpSet(shape, std::vector<char>(shape.size(), 1)); }

UpSet UpSet::closure(const Shape& shape, std::span<const std::size_t> generators) {
  std::vector<char> mask(shape.size(), 0);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    for (std::size_t g : generators) {
      bool above = true;
      for (int a = 0; a < shape.rank() && above; ++a) above = shape.coord(i, a) >= shape.coord(g, a);
      if (above) {
        mask[i] = 1;
        break;
      }
    }
  }
  return UpSet(shape, std::move(mask));
}

UpSet UpSet::from_boundary(const Shape& shape, std::span<const int> g) {
  if (shape.rank() != 2) throw InvalidArgument("boundary profiles need a 2-d grid");
  if (g.size() != static_cast<std::size_t>(shape.dim(0))) throw LengthMismatch("boundary has wrong length");
  std::vector<char> mask(shape.size(), 0);
  for (int i = 0; i < shape.dim(0); ++i) {
    if (g[i] < 0 || g[i] > shape.dim(1)) throw InvalidArgument("boundary value out of range");
    for (int j = g[i]; j < shape.dim(1); ++j) mask[i * shape.stride(0) + j] = 1;
  }
  return UpSet(shape, std::move(mask));
}

std::size_t UpSet::count() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1)); }

bool UpSet::subset_of(const UpSet& other) const {
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] && !other.mask_[i]) return false;
  }
  return true;
}

std::vector<int> UpSet::boundary() const {
  if (shape_.rank() != 2) throw InvalidArgument("boundary profiles need a 2-d grid");
  std::vector<int> g(shape_.dim(0), shape_.dim(1));
  for (int i = 0; i < shape_.dim(0); ++i) {
    for (int j = 0; j < shape_.dim(1); ++j) {
      if (mask_[i * shape_.stride(0) + j]) {
        g[i] = j;
        break;
      }
    }
  }
  return g;
}

GridFunction UpSet::indicator() const {
  std::vector<double> v(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) v[i] = mask_[i] ? 1.0 : 0.0;
  return GridFunction(shape_, std::move(v));
}

GridFunction NestingRepresentation::reconstruct() const {
  std::vector<double> v(shape.size(), 0.0);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    std::size_t depth = 0;
    while (depth < sets.size() && sets[depth].contains(i)) ++depth;
    if (depth > 0) v[i] = levels[depth - 1];
  }
  return GridFunction(shape, std::move(v));
}

std::vector<double> NestingRepresentation::mixture_sum() const {
  std::vector<double> v(shape.size(), 0.0);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (sets[j].contains(i)) v[i] += weights[j];
    }
  }
  return v;
}

StepFunction1D::StepFunction1D(std::vector<double> values, double tol) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("step function needs at least one cell");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= -tol && values_[i] <= 1.0 + tol)) throw InvalidArgument("step function value outside [0,1]");
    if (i > 0 && values_[i] < values_[i - 1] - tol) throw NotMonotone("step function decreases at cell " + std::to_string(i));
  }
}

double StepFunction1D::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double StepFunction1D::tail_integral(double x) const {
  const double m = static_cast<double>(values_.size());
  if (x <= 0.0) return mean();
  if (x >= 1.0) return 0.0;
  double k = std::floor(x * m);
  std::size_t cell = static_cast<std::size_t>(k);
  double s = 0.0;
  for (std::size_t i = values_.size(); i-- > cell + 1;) s += values_[i];
  s /= m;
  s += values_[cell] * ((k + 1.0) / m - x);
  return s;
}

std::optional<CoverPair> first_monotonicity_violation(const GridFunction& f, double tol) {
  for (const auto& p : cover_pairs(f.shape())) {
    if (f[p.lo] > f[p.hi] + tol) return p;
  }
  return std::nullopt;
}

bool is_monotone(const GridFunction& f, double tol) { return !first_monotonicity_violation(f, tol).has_value(); }

NestingRepresentation nesting_decompose(const GridFunction& f, double merge_tol) {
  if (auto bad = first_monotonicity_violation(f, 1e-9)) {
    throw NotMonotone("value drops between cells " + std::to_string(bad->lo) + " and " + std::to_string(bad->hi));
  }
  std::vector<double> vals(f.data().begin(), f.data().end());
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  // Cluster values whose consecutive gaps are within merge_tol; the cluster is
  // represented by its lower edge for membership and its upper edge as level.
  std::vector<std::pair<double, double>> clusters;
  for (double v : vals) {
    if (!clusters.empty() && v - clusters.back().second <= merge_tol) {
      clusters.back().second = v;
    } else {
      clusters.push_back({v, v});
    }
  }

  NestingRepresentation rep;
  rep.shape = f.shape();
  double prev = 0.0;
  for (const auto& [lo, hi] : clusters) {
    if (hi <= merge_tol) continue;  // zero level
    std::vector<char> mask(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) mask[i] = f[i] >= lo ? 1 : 0;
    rep.sets.emplace_back(f.shape(), std::move(mask));
    rep.levels.push_back(hi);
    rep.weights.push_back(hi - prev);
    prev = hi;
  }
  return rep;
}

std::vector<std::vector<double>> marginals(const GridFunction& f) {
  const Shape& s = f.shape();
  std::vector<std::vector<double>> out(s.rank());
  for (int a = 0; a < s.rank(); ++a) out[a].assign(s.dim(a), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a < s.rank(); ++a) out[a][s.coord(i, a)] += f[i];
  }
  for (int a = 0; a < s.rank(); ++a) {
    const double slice = static_cast<double>(s.size() / s.dim(a));
    for (double& v : out[a]) v /= slice;
  }
  return out;
}

std::vector<std::vector<double>> marginals(const UpSet& a) { return marginals(a.indicator()); }

std::vector<StepFunction1D> monotone_marginals(const GridFunction& f) {
  std::vector<StepFunction1D> out;
  for (auto& q : marginals(f)) {
    for (std::size_t i = 1; i < q.size(); ++i) {
      if (q[i] < q[i - 1] - 1e-12) throw NotMonotone("marginal decreases");
      q[i] = std::max(q[i], q[i - 1]);
    }
    for (double& v : q) v = std::clamp(v, 0.0, 1.0);
    out.emplace_back(std::move(q));
  }
  return out;
}

namespace {

void check_supports(std::span<const QuantileTransform> transforms, std::span<const Interval> domains, int rank) {
  if (transforms.size() != static_cast<std::size_t>(rank) || domains.size() != static_cast<std::size_t>(rank)) {
    throw LengthMismatch("need one transform and one domain per axis");
  }
  for (int a = 0; a < rank; ++a) {
    const Interval s = transforms[a].support();
    const double scale = std::max(1.0, std::abs(domains[a].hi - domains[a].lo));
    if (std::abs(s.lo - domains[a].lo) > 1e-12 * scale || std::abs(s.hi - domains[a].hi) > 1e-12 * scale) {
      throw SupportMismatch("axis " + std::to_string(a) + " transform support differs from its domain");
    }
  }
}

GridFunction gather(const GridFunction& f, const std::vector<std::vector<int>>& maps) {
  const Shape& s = f.shape();
  std::vector<double> out(s.size());
  std::vector<int> c(s.rank());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a < s.rank(); ++a) c[a] = maps[a][s.coord(i, a)];
    out[i] = f[s.index(c)];
  }
  return GridFunction(s, std::move(out));
}

int cell_of(double t, int cells) {
  int k = static_cast<int>(std::floor(t * cells));
  return std::clamp(k, 0, cells - 1);
}

}  // namespace

double cell_center(const Interval& domain, int cells, int k) {
  return domain.lo + (domain.hi - domain.lo) * (static_cast<double>(k) + 0.5) / cells;
}

GridFunction to_quantile_space(const GridFunction& f, std::span<const QuantileTransform> transforms,
                               std::span<const Interval> domains) {
  const Shape& s = f.shape();
  check_supports(transforms, domains, s.rank());
  std::vector<std::vector<int>> maps(s.rank());
  for (int a = 0; a < s.rank(); ++a) {
    const int m = s.dim(a);
    for (int k = 0; k < m; ++k) {
      double x = transforms[a].inverse((k + 0.5) / m);
      maps[a].push_back(cell_of((x - domains[a].lo) / (domains[a].hi - domains[a].lo), m));
    }
  }
  return gather(f, maps);
}

GridFunction from_quantile_space(const GridFunction& f, std::span<const QuantileTransform> transforms,
                                 std::span<const Interval> domains) {
  const Shape& s = f.shape();
  check_supports(transforms, domains, s.rank());
  std::vector<std::vector<int>> maps(s.rank());
  for (int a = 0; a < s.rank(); ++a) {
    const int m = s.dim(a);
    for (int k = 0; k < m; ++k) maps[a].push_back(cell_of(transforms[a].cdf(cell_center(domains[a], m, k)), m));
  }
  return gather(f, maps);
}

std::vector<double> symmetrize_values(const Shape& s, std::span<const double> values) {
  for (int a = 1; a < s.rank(); ++a) {
    if (s.dim(a) != s.dim(0)) throw DimsUnequal("symmetrization needs equal dimensions, got " + s.to_string());
  }
  std::vector<int> perm(s.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<double> out(s.size());
  std::vector<double> terms(perms.size());
  std::vector<int> c(s.rank()), pc(s.rank());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a < s.rank(); ++a) c[a] = s.coord(i, a);
    for (std::size_t p = 0; p < perms.size(); ++p) {
      for (int a = 0; a < s.rank(); ++a) pc[a] = c[perms[p][a]];
      terms[p] = values[s.index(pc)];
    }
    // Sorted summation makes the result exactly invariant under axis swaps.
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    out[i] = sum / static_cast<double>(terms.size());
  }
  return out;
}

GridFunction symmetrize(const GridFunction& f) {
  auto v = symmetrize_values(f.shape(), f.values());
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return GridFunction(f.shape(), std::move(v));
}

bool is_exchangeable(const Shape& s, std::span<const double> values, double tol) {
  for (int a = 1; a < s.rank(); ++a) {
    if (s.dim(a) != s.dim(0)) return false;
  }
  std::vector<int> c(s.rank());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int a = 0; a + 1 < s.rank(); ++a) {
      for (int b = 0; b < s.rank(); ++b) c[b] = s.coord(i, b);
      std::swap(c[a], c[a + 1]);
      if (std::abs(values[i] - values[s.index(c)]) > tol) return false;
    }
  }
  return true;
}

std::vector<double> density_table(const Shape& s, std::span<const Interval> domains, const DensitySpec& spec) {
  if (domains.size() != static_cast<std::size_t>(s.rank())) throw LengthMismatch("need one domain per axis");
  const int n = s.rank();
  if (spec.kind != DensityKind::uniform) {
    if (!(spec.sigma > 0.0)) throw InvalidArgument("density scale must be positive");
    if (!(spec.rho > -1.0 / std::max(1, n - 1) && spec.rho < 1.0)) throw InvalidArgument("correlation out of range");
  }
  std::vector<double> w(s.size(), 1.0);
  const double shrink = n > 1 ? spec.rho / (1.0 + (n - 1) * spec.rho) : 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (spec.kind == DensityKind::uniform) continue;
    double sum_sq = 0.0, sum = 0.0, jac = 1.0;
    for (int a = 0; a < n; ++a) {
      double x = cell_center(domains[a], s.dim(a), s.coord(i, a));
      double z;
      if (spec.kind == DensityKind::truncated_lognormal) {
        if (x <= 0.0) throw InvalidArgument("lognormal density needs a positive domain");
        z = (std::log(x) - spec.mu) / spec.sigma;
        jac *= x;
      } else {
        z = (x - spec.mu) / spec.sigma;
      }
      sum_sq += z * z;
      sum += z;
    }
    double quad = (sum_sq - shrink * sum * sum) / (1.0 - spec.rho);
    w[i] = std::exp(-0.5 * quad) / jac;
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

}  // namespace monoext
