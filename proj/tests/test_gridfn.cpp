#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "monoext/gridfn.hpp"

using namespace monoext;

namespace {

GridFunction random_monotone(std::mt19937_64& rng, const Shape& s, int levels) {
  std::uniform_int_distribution<int> pick(0, levels);
  std::vector<double> v(s.size());
  for (double& x : v) x = pick(rng) / static_cast<double>(levels);
  // running maxima along every axis make the function monotone
  for (const auto& p : cover_pairs(s)) v[p.hi] = std::max(v[p.hi], v[p.lo]);
  for (int pass = 0; pass < s.rank(); ++pass)
    for (const auto& p : cover_pairs(s)) v[p.hi] = std::max(v[p.hi], v[p.lo]);
  return GridFunction(s, v);
}

}  // namespace

TEST_CASE("shape indexing is row major") {
  Shape s({2, 3, 4});
  CHECK(s.size() == 24);
  std::vector<int> c{1, 2, 3};
  CHECK(s.index(c) == 23);
  CHECK(s.coords(13) == std::vector<int>{1, 0, 1});
  CHECK(Shape::parse("3x4") == Shape({3, 4}));
  CHECK_THROWS_AS(Shape::parse("3y4"), InvalidArgument);
}

TEST_CASE("grid function rejects values outside the unit interval") {
  CHECK_THROWS_AS(GridFunction(Shape({2}), {0.0, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(GridFunction(Shape({2}), {0.0}), LengthMismatch);
}

TEST_CASE("monotonicity on a 2x2 grid") {
  Shape s({2, 2});
  CHECK(is_monotone(GridFunction(s, {0, 0, 0, 1})));
  CHECK_FALSE(is_monotone(GridFunction(s, {1, 0, 0, 0})));
  CHECK(is_monotone(GridFunction(s, {0.5, 0.5, 0.5, 0.5 - 1e-10})));
  CHECK_FALSE(is_monotone(GridFunction(s, {0.5, 0.5, 0.5, 0.5 - 1e-10}), 0.0));
}

TEST_CASE("up-sets reject masks that are not upward closed") {
  Shape s({2, 2});
  CHECK_THROWS_AS(UpSet(s, {1, 0, 0, 0}), NotMonotone);
  UpSet a = UpSet::from_boundary(Shape({3, 3}), std::vector<int>{3, 1, 0});
  CHECK(a.count() == 5);
  CHECK(a.boundary() == std::vector<int>{3, 1, 0});
  std::vector<std::size_t> gen{4};
  CHECK(UpSet::closure(Shape({3, 3}), gen).count() == 4);
}

TEST_CASE("three-level nesting decomposition") {
  Shape s({3, 3});
  UpSet a1 = UpSet::from_boundary(s, std::vector<int>{2, 1, 0});
  UpSet a2 = UpSet::from_boundary(s, std::vector<int>{3, 2, 1});
  UpSet a3 = UpSet::from_boundary(s, std::vector<int>{3, 3, 2});
  std::vector<double> v(9, 0.0);
  for (std::size_t i = 0; i < 9; ++i) v[i] = 0.2 * a1.contains(i) + 0.3 * a2.contains(i) + 0.5 * a3.contains(i);
  GridFunction f(s, v);
  auto rep = nesting_decompose(f);
  REQUIRE(rep.sets.size() == 3);
  CHECK(rep.sets[0] == a1);
  CHECK(rep.sets[1] == a2);
  CHECK(rep.sets[2] == a3);
  CHECK(rep.weights[0] == doctest::Approx(0.2));
  CHECK(rep.weights[1] == doctest::Approx(0.3));
  CHECK(rep.weights[2] == doctest::Approx(0.5));
  CHECK(rep.reconstruct().data() == f.data());
}

TEST_CASE("nesting decomposition rejects non-monotone input") {
  CHECK_THROWS_AS(nesting_decompose(GridFunction(Shape({2, 2}), {1, 0, 0, 0})), NotMonotone);
}

TEST_CASE("nesting round trip is bitwise on random monotone grids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + trial % 3;
    std::vector<int> dims;
    for (int a = 0; a < n; ++a) dims.push_back(1 + static_cast<int>(rng() % 7));
    Shape s(dims);
    GridFunction f = random_monotone(rng, s, 1 + static_cast<int>(rng() % 9));
    REQUIRE(is_monotone(f, 0.0));
    auto rep = nesting_decompose(f);
    CHECK(rep.reconstruct().data() == f.data());
    for (std::size_t j = 1; j < rep.sets.size(); ++j) CHECK(rep.sets[j].subset_of(rep.sets[j - 1]));
    double total = 0.0;
    for (double w : rep.weights) {
      CHECK(w > 0.0);
      total += w;
    }
    CHECK(total <= 1.0 + 1e-12);
    auto mix = rep.mixture_sum();
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(mix[i] == doctest::Approx(f[i]).epsilon(1e-14));
  }
}

TEST_CASE("marginals of the anti-diagonal up-set") {
  const int m = 8;
  Shape s({m, m});
  std::vector<double> v(s.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) v[i * m + j] = (i + j >= m - 1) ? 1.0 : 0.0;
  auto q = marginals(GridFunction(s, v));
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < m; ++k) {
      CHECK(q[a][k] == doctest::Approx((k + 1.0) / m));
      CHECK(std::abs(q[a][k] - (k + 0.5) / m) <= 0.5 / m + 1e-12);
    }
}

TEST_CASE("marginals of a constant and of a 3-d function") {
  auto q = marginals(GridFunction::constant(Shape({3, 4}), 0.25));
  for (const auto& qa : q)
    for (double x : qa) CHECK(x == doctest::Approx(0.25));
  Shape s({2, 2, 2});
  std::vector<double> v(8, 0.0);
  v[7] = 1.0;
  auto q3 = marginals(GridFunction(s, v));
  for (const auto& qa : q3) {
    CHECK(qa[0] == 0.0);
    CHECK(qa[1] == doctest::Approx(0.25));
  }
}

TEST_CASE("quantile space transforms") {
  Shape s({4, 4});
  std::mt19937_64 rng(3);
  GridFunction f = random_monotone(rng, s, 5);
  std::vector<QuantileTransform> g{QuantileTransform::uniform(0, 1), QuantileTransform::uniform(0, 1)};
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  CHECK(to_quantile_space(f, g, dom).data() == f.data());

  std::vector<double> xs, cs;
  for (int k = 0; k <= 4; ++k) {
    xs.push_back(k / 4.0);
    cs.push_back(k / 4.0);
  }
  std::vector<QuantileTransform> tab{QuantileTransform::tabulated(xs, cs), QuantileTransform::tabulated(xs, cs)};
  CHECK(to_quantile_space(f, tab, dom).data() == f.data());

  std::vector<Interval> bad{{0, 2}, {0, 1}};
  CHECK_THROWS_AS(to_quantile_space(f, g, bad), SupportMismatch);
}

TEST_CASE("quantile round trip moves values by at most one cell") {
  const int m = 12;
  Shape s({m, m});
  std::vector<double> v(s.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) v[i * m + j] = (i + j) / (2.0 * (m - 1));
  GridFunction f(s, v);
  auto t = QuantileTransform::truncated_normal(0, 1, 0.4, 0.3);
  std::vector<QuantileTransform> g{t, t};
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  GridFunction back = from_quantile_space(to_quantile_space(f, g, dom), g, dom);
  const double step = 1.0 / (2.0 * (m - 1));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back[i] - f[i]) <= 2 * step + 1e-12);
}

TEST_CASE("quantile transforms invert their CDF") {
  auto ln = QuantileTransform::truncated_lognormal(0, 4, std::log(2.0), 0.4);
  for (double z : {0.1, 0.5, 0.9}) CHECK(ln.cdf(ln.inverse(z)) == doctest::Approx(z).epsilon(1e-9));
  // median 2 before truncation; only the upper tail above 4 is cut away
  const double upper = 0.5 * std::erfc(-(std::log(2.0) / 0.4) / std::sqrt(2.0));
  CHECK(ln.cdf(2.0) == doctest::Approx(0.5 / upper).epsilon(1e-12));
  auto masses = ln.cell_masses(30);
  double total = 0.0;
  for (double m : masses) total += m;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("symmetrization") {
  Shape s({3, 3});
  std::mt19937_64 rng(11);
  GridFunction f = random_monotone(rng, s, 4);
  GridFunction g = symmetrize(f);
  CHECK(is_exchangeable(s, g.values()));
  CHECK(symmetrize(g).data() == g.data());
  CHECK(is_monotone(g));
  CHECK_THROWS_AS(symmetrize(GridFunction::constant(Shape({2, 3}), 0.0)), DimsUnequal);
}

TEST_CASE("density tables are normalized and exchangeable") {
  Shape s({30, 30});
  std::vector<Interval> dom{{0, 4}, {0, 4}};
  DensitySpec spec{DensityKind::truncated_lognormal, std::log(2.0), 0.4, 0.5};
  auto w = density_table(s, dom, spec);
  double total = 0.0;
  for (double x : w) total += x;
  CHECK(total == doctest::Approx(1.0));
  CHECK(is_exchangeable(s, w));
}
