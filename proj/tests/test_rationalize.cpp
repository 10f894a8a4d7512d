#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "monoext/oracle.hpp"
#include "monoext/rationalize.hpp"

using namespace monoext;

namespace {

GridFunction random_monotone(std::mt19937_64& rng, const Shape& s, int levels) {
  std::uniform_int_distribution<int> pick(0, levels);
  std::vector<double> v(s.size());
  for (double& x : v) x = pick(rng) / static_cast<double>(levels);
  for (int pass = 0; pass <= s.rank(); ++pass)
    for (const auto& p : cover_pairs(s)) v[p.hi] = std::max(v[p.hi], v[p.lo]);
  return GridFunction(s, v);
}

std::vector<double> random_nondecreasing(std::mt19937_64& rng, std::size_t m, double top) {
  std::uniform_real_distribution<double> u(0.0, top);
  std::vector<double> v(m);
  for (double& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<StepFunction1D> steps(const std::vector<std::vector<double>>& q) {
  std::vector<StepFunction1D> out;
  for (const auto& qa : q) out.emplace_back(qa);
  return out;
}

GridFunction anti_diagonal(int m) {
  Shape s({m, m});
  std::vector<double> v(s.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) v[i * m + j] = i + j >= m - 1 ? 1.0 : 0.0;
  return GridFunction(s, v);
}

std::vector<double> ramp(int m) {
  std::vector<double> r(m);
  for (int k = 0; k < m; ++k) r[k] = (k + 1.0) / m;
  return r;
}

// Piecewise constant conjugate used by the pooled-interval tests, in cells of 1/100.
std::vector<double> staircase(const std::vector<std::pair<int, double>>& pieces) {
  std::vector<double> v;
  for (auto [len, val] : pieces) v.insert(v.end(), len, val);
  return v;
}

}  // namespace

TEST_CASE("conjugate of simple step functions") {
  auto c = conjugate(StepFunction1D({0.5, 0.5, 0.5, 0.5}));
  CHECK(c.values() == std::vector<double>{0, 0, 1, 1});
  auto one = conjugate(StepFunction1D(std::vector<double>(5, 1.0)));
  for (double v : one.values()) CHECK(v == doctest::Approx(1.0));
  auto r = conjugate(StepFunction1D(ramp(10)));
  for (int k = 0; k < 10; ++k) CHECK(r[k] == doctest::Approx((k + 1.0) / 10));
  auto zero = conjugate(StepFunction1D(std::vector<double>(4, 0.0)));
  for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("conjugate is an involution on lattice-valued step functions") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 12);
    std::uniform_int_distribution<int> pick(0, m);
    std::vector<double> v(m);
    for (double& x : v) x = pick(rng) / static_cast<double>(m);
    std::sort(v.begin(), v.end());
    StepFunction1D q(v);
    auto back = conjugate(conjugate(q));
    for (int k = 0; k < m; ++k) CHECK(back[k] == doctest::Approx(q[k]).epsilon(1e-12));
  }
}

TEST_CASE("conjugate tails match the inverse-function definition") {
  // Direct evaluation of 1 - q^{-1}(1 - z) on a fine sub-grid, averaged per cell.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 6);
    StepFunction1D q(random_nondecreasing(rng, m, 1.0));
    auto inv = [&](double y) {
      for (int k = 0; k < m; ++k)
        if (q[k] > y) return static_cast<double>(k) / m;
      return 1.0;
    };
    auto c = conjugate(q);
    const int sub = 4000;
    for (int k = 0; k < m; ++k) {
      double s = 0.0;
      for (int t = 0; t < sub; ++t) {
        double z = (k + (t + 0.5) / sub) / m;
        s += 1.0 - inv(1.0 - z);
      }
      CHECK(c[k] == doctest::Approx(s / sub).epsilon(2e-3));
    }
  }
}

TEST_CASE("majorization examples") {
  StepFunction1D half(std::vector<double>(10, 0.5));
  auto rep = check_majorization(half, conjugate(half));
  CHECK(rep.holds);
  CHECK(rep.equal_at_zero);

  StepFunction1D q(ramp(6));
  auto same = check_majorization(q, q);
  CHECK(same.holds);
  CHECK(same.binding.size() == 7);

  StepFunction1D one(std::vector<double>(4, 1.0)), zero(std::vector<double>(4, 0.0));
  auto bad = check_majorization(one, conjugate(zero));
  CHECK_FALSE(bad.holds);
  CHECK(bad.gaps[0] == doctest::Approx(-1.0));
  CHECK_THROWS_AS(check_majorization(one, StepFunction1D({0.0})), LengthMismatch);
}

TEST_CASE("rationalizability examples") {
  std::vector<double> step(10, 0.0);
  std::fill(step.begin() + 5, step.end(), 1.0);
  // Both marginals equal to the 0/1 step would need f = 1 on every row of the
  // top half and on no row of the bottom half, which forces q2 = 1/2.
  CHECK_FALSE(is_rationalizable(steps({step, step})));
  CHECK_FALSE(oracle::brute_force_rationalizable({step, step}));
  // The corner up-set {x1 >= .5, x2 >= .5} has marginals 0.5 times the step.
  std::vector<double> half_step(step);
  for (double& v : half_step) v *= 0.5;
  CHECK(is_rationalizable(steps({half_step, half_step})));
  CHECK(oracle::brute_force_rationalizable({half_step, half_step}));

  CHECK_FALSE(is_rationalizable(steps({std::vector<double>(3, 1.0), std::vector<double>(3, 0.0)})));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction f = random_monotone(rng, Shape({3, 4, 2}), 5);
    auto rep = rationalizability(steps(marginals(f)));
    CHECK(rep.rationalizable);
    REQUIRE(rep.witness.has_value());
    auto qw = marginals(*rep.witness), qf = marginals(f);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t k = 0; k < qf[a].size(); ++k) CHECK(qw[a][k] == doctest::Approx(qf[a][k]).epsilon(1e-9));
  }
}

TEST_CASE("majorization test agrees with max-flow and LP feasibility") {
  std::mt19937_64 rng(1234);
  int yes = 0, no = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 6;
    std::vector<double> q1 = random_nondecreasing(rng, m, 1.0), q2 = random_nondecreasing(rng, m, 1.0);
    if (trial % 2 == 0) {
      // marginals of a random monotone function are always feasible
      auto q = marginals(random_monotone(rng, Shape({m, m}), 7));
      q1 = q[0];
      q2 = q[1];
    } else {
      double s1 = 0, s2 = 0;
      for (int k = 0; k < m; ++k) {
        s1 += q1[k];
        s2 += q2[k];
      }
      auto& big = s1 > s2 ? q1 : q2;
      for (double& v : big) v *= std::min(s1, s2) / std::max(s1, s2);
    }
    const bool maj = is_rationalizable(steps({q1, q2}));
    const bool flow = oracle::brute_force_rationalizable({q1, q2});
    const bool lp = solve_lp(marginal_polytope(Shape({m, m}), {q1, q2}, false)).optimal();
    CHECK(maj == flow);
    CHECK(maj == lp);
    (maj ? yes : no)++;
  }
  CHECK(yes > 20);
  CHECK(no > 20);
}

TEST_CASE("three-axis rationalizability agrees with the oracle") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> q;
    for (int a = 0; a < 3; ++a) q.push_back(random_nondecreasing(rng, 3, 1.0));
    double target = 0;
    for (double v : q[0]) target += v / 3;
    for (int a = 1; a < 3; ++a) {
      double s = 0;
      for (double v : q[a]) s += v / 3;
      for (double& v : q[a]) v = std::min(1.0, v * target / s);
    }
    bool exact = true;
    for (int a = 1; a < 3; ++a) {
      double s = 0;
      for (double v : q[a]) s += v / 3;
      exact = exact && std::abs(s - target) < 1e-12;
    }
    if (!exact) continue;
    CHECK(is_rationalizable(steps(q)) == oracle::brute_force_rationalizable(q));
  }
}

TEST_CASE("Dykstra rationalizer examples") {
  const int m = 6;
  auto res = monotone_rationalizer_run(steps({ramp(m), ramp(m)}));
  GridFunction ad = anti_diagonal(m);
  CHECK(res.f.max_abs_diff(ad) <= 1e-6);

  auto c = monotone_rationalizer(steps({std::vector<double>(4, 0.3), std::vector<double>(5, 0.3)}));
  for (double v : c.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-8));

  UpSet a = UpSet::from_boundary(Shape({5, 5}), std::vector<int>{5, 3, 3, 1, 0});
  GridFunction ind = a.indicator();
  CHECK(monotone_rationalizer(steps(marginals(ind))).max_abs_diff(ind) <= 1e-6);

  CHECK_THROWS_AS(monotone_rationalizer(steps({std::vector<double>(3, 1.0), std::vector<double>(3, 0.0)})),
                  NotRationalizable);
  RationalizerOptions tight{2, 1e-14};
  CHECK_THROWS_AS(monotone_rationalizer_run(steps({ramp(m), ramp(m)}), tight), NoConvergence);
}

TEST_CASE("Dykstra output is monotone with the requested marginals") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Shape s = trial % 3 == 0 ? Shape({3, 4, 3}) : Shape({5, 7});
    auto q = marginals(random_monotone(rng, s, 6));
    GridFunction f = monotone_rationalizer(steps(q));
    CHECK(is_monotone(f, 1e-6));
    auto qf = marginals(f);
    for (std::size_t a = 0; a < q.size(); ++a)
      for (std::size_t k = 0; k < q[a].size(); ++k) CHECK(std::abs(qf[a][k] - q[a][k]) <= 1e-6);
  }
}

TEST_CASE("uniqueness of rationalization") {
  UpSet a = UpSet::from_boundary(Shape({4, 4}), std::vector<int>{4, 2, 1, 1});
  CHECK(unique_rationalization_check(a.indicator(), false).unique);

  auto flat = unique_rationalization_check(GridFunction::constant(Shape({2, 2}), 0.5), false);
  CHECK_FALSE(flat.unique);
  REQUIRE(flat.witness.has_value());
  auto qw = marginals(GridFunction(Shape({2, 2}), *flat.witness));
  for (const auto& qa : qw)
    for (double v : qa) CHECK(v == doctest::Approx(0.5));

  // rectangle mixture: rows 2-4, columns 2-4 of a 6x6 grid at 0.5
  Shape s({6, 6});
  std::vector<double> v(s.size(), 0.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == 5 || j == 5) v[i * 6 + j] = 1.0;
      else if (i >= 2 && j >= 2) v[i * 6 + j] = 0.5;
    }
  GridFunction rect(s, v);
  REQUIRE(is_monotone(rect));
  CHECK(unique_rationalization_check(rect, true).unique);
  CHECK_FALSE(unique_rationalization_check(rect, false).unique);
}

TEST_CASE("uniqueness check agrees with the brute-force cell ranges") {
  std::mt19937_64 rng(2024);
  int uniq = 0, not_uniq = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Shape s = trial % 2 ? Shape({3, 3}) : Shape({3, 4});
    GridFunction f = random_monotone(rng, s, 2 + trial % 3);
    for (bool mono : {true, false}) {
      bool fast = unique_rationalization_check(f, mono).unique;
      CHECK(fast == oracle::brute_force_unique(f, mono));
      (fast ? uniq : not_uniq)++;
    }
  }
  CHECK(uniq > 5);
  CHECK(not_uniq > 5);
}

TEST_CASE("rectangle structure detection") {
  Shape s({6, 6});
  auto build = [&](auto&& value) {
    std::vector<double> v(s.size());
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) v[i * 6 + j] = value(i, j);
    return GridFunction(s, v);
  };
  GridFunction box = build([](int i, int j) { return i >= 4 ? 1.0 : (i >= 2 && j >= 3 ? 0.4 : 0.0); });
  auto d = detect_rectangle_structure(box);
  CHECK(d.valid);
  CHECK(d.has_rectangle);
  CHECK(d.lambda == doctest::Approx(0.4));
  CHECK(d.lo[0] == 2);
  CHECK(d.hi[0] == 3);
  CHECK(d.lo[1] == 3);
  CHECK(d.hi[1] == 5);
  CHECK(d.inner.count() == 12);
  CHECK(d.outer.count() == 18);

  GridFunction ell = build([](int i, int j) {
    if (i >= 4) return 1.0;
    if ((i == 2 && j == 5) || (i == 3 && j >= 4)) return 0.4;
    return 0.0;
  });
  auto e = detect_rectangle_structure(ell);
  CHECK_FALSE(e.valid);

  GridFunction two = build([](int i, int j) { return i >= 4 ? 1.0 : (i >= 2 && j >= 3 ? (j == 5 ? 0.6 : 0.4) : 0.0); });
  CHECK_FALSE(detect_rectangle_structure(two).valid);

  UpSet a = UpSet::from_boundary(s, std::vector<int>{6, 4, 3, 3, 0, 0});
  auto plain = detect_rectangle_structure(a.indicator());
  CHECK(plain.valid);
  CHECK_FALSE(plain.has_rectangle);

  CHECK_THROWS_AS(detect_rectangle_structure(build([](int i, int) { return i == 0 ? 1.0 : 0.0; })), NotMonotone);
}

TEST_CASE("joint majorization extreme points") {
  CHECK(extreme_check_joint_majorization(StepFunction1D(ramp(8)), StepFunction1D(ramp(8))));
  StepFunction1D half(std::vector<double>(8, 0.5));
  CHECK_FALSE(extreme_check_joint_majorization(half, half));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    Shape s({1 + static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 7)});
    GridFunction f = random_monotone(rng, s, 1);
    auto q = marginals(f);
    CHECK(extreme_check_joint_majorization(StepFunction1D(q[0]), StepFunction1D(q[1])));
  }
}

TEST_CASE("pooled interval structure") {
  // conjugate: 0.1 below 0.3, 0.2 on (0.3, 0.5], 0.8 on (0.5, 0.7], 0.9 above
  std::vector<double> ghat = staircase({{30, 0.1}, {20, 0.2}, {20, 0.8}, {30, 0.9}});
  StepFunction1D q2 = conjugate(StepFunction1D(ghat));
  for (std::size_t k = 0; k < ghat.size(); ++k) REQUIRE(conjugate(q2)[k] == doctest::Approx(ghat[k]).epsilon(1e-12));
  std::vector<double> q1 = ghat;
  std::fill(q1.begin() + 30, q1.begin() + 70, 0.5 * 0.8 + 0.5 * 0.2);
  auto sq = square_majorization_structure(StepFunction1D(q1), q2);
  CHECK_FALSE(sq.empty);
  CHECK(std::abs(sq.z_lo - 0.3) <= 0.01);
  CHECK(std::abs(sq.z_hi - 0.7) <= 0.01);
  CHECK(sq.gamma_lo == doctest::Approx(0.2));
  CHECK(sq.gamma_hi == doctest::Approx(0.8));
  CHECK(sq.lambda == doctest::Approx(0.5));
  CHECK(check_majorization(StepFunction1D(q1), conjugate(q2)).holds);

  CHECK(square_majorization_structure(StepFunction1D(ghat), q2).empty);

  std::vector<double> g5 = staircase({{20, 0.1}, {20, 0.3}, {20, 0.5}, {20, 0.7}, {20, 0.9}});
  StepFunction1D q2b = conjugate(StepFunction1D(g5));
  std::vector<double> twice = g5;
  std::fill(twice.begin(), twice.begin() + 40, 0.2);
  std::fill(twice.begin() + 60, twice.end(), 0.8);
  try {
    square_majorization_structure(StepFunction1D(twice), q2b);
    FAIL("expected NotOfForm");
  } catch (const NotOfForm& e) {
    CHECK(e.index() == 40);
  }
}

TEST_CASE("weak majorization extreme points") {
  std::vector<double> ghat = staircase({{30, 0.1}, {20, 0.2}, {20, 0.8}, {30, 0.9}});
  StepFunction1D q2 = conjugate(StepFunction1D(ghat));
  auto full = extreme_check_weak_majorization(StepFunction1D(ghat), q2);
  CHECK(full.extreme);
  CHECK(full.k_index == 0);

  auto none = extreme_check_weak_majorization(StepFunction1D(std::vector<double>(100, 0.0)), q2);
  CHECK(none.extreme);
  CHECK(none.k == doctest::Approx(1.0));

  std::vector<double> cut = ghat;
  std::fill(cut.begin(), cut.begin() + 40, 0.0);
  auto part = extreme_check_weak_majorization(StepFunction1D(cut), q2);
  CHECK(part.extreme);
  CHECK(part.k == doctest::Approx(0.4));
  CHECK(check_majorization(StepFunction1D(cut), conjugate(q2), true).holds);

  std::vector<double> pooled = ghat;
  std::fill(pooled.begin() + 30, pooled.begin() + 70, 0.5);
  CHECK_FALSE(extreme_check_weak_majorization(StepFunction1D(pooled), q2).extreme);
}

TEST_CASE("non-extreme pairs admit a symmetric perturbation") {
  StepFunction1D half(std::vector<double>(4, 0.5));
  CHECK_FALSE(majorization_perturbation(StepFunction1D(ramp(4)), StepFunction1D(ramp(4))).has_value());

  std::mt19937_64 rng(8);
  std::vector<std::pair<StepFunction1D, StepFunction1D>> cases{{half, half}};
  for (int trial = 0; trial < 40; ++trial) {
    auto q = marginals(random_monotone(rng, Shape({5, 4}), 4));
    cases.emplace_back(StepFunction1D(q[0]), StepFunction1D(q[1]));
  }
  int tested = 0;
  for (auto& [q1, q2] : cases) {
    if (extreme_check_joint_majorization(q1, q2)) continue;
    ++tested;
    auto pert = majorization_perturbation(q1, q2);
    REQUIRE(pert.has_value());
    auto& [plus, minus] = *pert;
    CHECK(is_rationalizable(plus));
    CHECK(is_rationalizable(minus));
    double dist = 0.0;
    for (int a = 0; a < 2; ++a) {
      const StepFunction1D& orig = a == 0 ? q1 : q2;
      for (std::size_t k = 0; k < orig.size(); ++k) {
        CHECK(0.5 * (plus[a][k] + minus[a][k]) == doctest::Approx(orig[k]).epsilon(1e-12));
        dist = std::max(dist, std::abs(plus[a][k] - orig[k]));
      }
    }
    CHECK(dist > 1e-6);
  }
  CHECK(tested > 10);
}

TEST_CASE("additive sets") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    Shape s({1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6)});
    std::vector<char> mask(s.size(), 0);
    GridFunction f = random_monotone(rng, s, 1);
    for (std::size_t i = 0; i < s.size(); ++i) mask[i] = f[i] > 0.5;
    UpSet a(s, mask);
    auto cert = is_additive_set(a);
    CHECK(cert.additive);
    CHECK(cert.margin >= 1.0 - 1e-9);
  }
  CHECK(is_additive_set(UpSet::full(Shape({3, 3, 3}))).additive);

  // Three cells of A and three cells outside A with the same coordinate
  // multisets on every axis rule out any additive representation.
  Shape s3({3, 3, 3});
  auto has_trade = [&](const UpSet& a) {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < s3.size(); ++i)
      if (a.contains(i)) in.push_back(i);
    std::vector<std::array<int, 3>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (std::size_t x = 0; x < in.size(); ++x)
      for (std::size_t y = x + 1; y < in.size(); ++y)
        for (std::size_t z = y + 1; z < in.size(); ++z) {
          std::array<std::vector<int>, 3> pts{s3.coords(in[x]), s3.coords(in[y]), s3.coords(in[z])};
          for (const auto& p0 : perms)
            for (const auto& p1 : perms)
              for (const auto& p2 : perms) {
                bool outside = true;
                for (int t = 0; t < 3 && outside; ++t) {
                  std::vector<int> c{pts[p0[t]][0], pts[p1[t]][1], pts[p2[t]][2]};
                  outside = !a.contains(s3.index(c));
                }
                if (outside) return true;
              }
        }
    return false;
  };
  int non_additive = 0, two_generator_non_additive = 0;
  for (std::size_t g1 = 0; g1 < s3.size(); ++g1)
    for (std::size_t g2 = g1 + 1; g2 < s3.size(); ++g2) {
      UpSet two = UpSet::closure(s3, std::vector<std::size_t>{g1, g2});
      if (!is_additive_set(two).additive) ++two_generator_non_additive;
      for (std::size_t g3 = g2 + 1; g3 < s3.size(); ++g3) {
        UpSet a = UpSet::closure(s3, std::vector<std::size_t>{g1, g2, g3});
        if (!is_additive_set(a).additive) {
          ++non_additive;
          CHECK(has_trade(a));
        }
      }
    }
  CHECK(two_generator_non_additive == 0);
  CHECK(non_additive == 2);
  std::vector<std::size_t> cyclic{s3.index(std::vector<int>{0, 1, 2}), s3.index(std::vector<int>{1, 2, 0}),
                                  s3.index(std::vector<int>{2, 0, 1})};
  CHECK_FALSE(is_additive_set(UpSet::closure(s3, cyclic)).additive);
}

TEST_CASE("additive certificates separate the set") {
  for (const auto& mask : oracle::enumerate_upsets(Shape({2, 2, 3}))) {
    UpSet a(Shape({2, 2, 3}), mask);
    auto cert = is_additive_set(a);
    if (!cert.additive) continue;
    for (std::size_t i = 0; i < a.shape().size(); ++i) {
      double v = 0.0;
      for (int ax = 0; ax < 3; ++ax) v += cert.phi[ax][a.shape().coord(i, ax)];
      if (a.contains(i)) CHECK(v >= -1e-9);
      else CHECK(v <= -1.0 + 1e-9);
    }
  }
}

TEST_CASE("exposing functional") {
  const int m = 4;
  UpSet half = UpSet::from_boundary(Shape({m, m}), std::vector<int>(m, 2));
  auto e = exposing_functional(half);
  for (double v : e.phi1) CHECK(v == doctest::Approx(-0.5));
  for (int j = 0; j < m; ++j) CHECK(e.phi2[j] == doctest::Approx(j / 4.0));

  std::vector<char> mask(m * m);
  GridFunction adf = anti_diagonal(m);
  for (int i = 0; i < m * m; ++i) mask[i] = adf[i] > 0.5;
  UpSet anti(Shape({m, m}), mask);
  auto ea = exposing_functional(anti);
  for (int i = 0; i < m; ++i) CHECK(ea.phi1[i] == doctest::Approx(-(m - 1.0 - i) / m));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    Shape s({2 + static_cast<int>(rng() % 5), 2 + static_cast<int>(rng() % 5)});
    GridFunction f = random_monotone(rng, s, 1);
    std::vector<char> mk(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mk[i] = f[i] > 0.5;
    UpSet a(s, mk);
    auto ex = exposing_functional(a);
    LpProblem p = LpProblem::over_grid(s, false);
    for (std::size_t i = 0; i < s.size(); ++i) p.objective[i] = ex.phi1[s.coord(i, 0)] + ex.phi2[s.coord(i, 1)];
    LpSolution sol = solve_lp(p);
    REQUIRE(sol.optimal());
    double at_a = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      at_a += p.objective[i] * a.contains(i);
      if (p.objective[i] != 0.0) CHECK(sol.x[i] == doctest::Approx(a.contains(i) ? 1.0 : 0.0));
      if (!a.contains(i)) CHECK(p.objective[i] <= -1.0 / s.dim(1) + 1e-12);
      else CHECK(p.objective[i] >= 0.0);
    }
    CHECK(sol.objective == doctest::Approx(at_a));
  }
}

TEST_CASE("up-set indicators are vertices of their marginal polytope") {
  for (const auto& mask : oracle::enumerate_upsets(Shape({3, 3}))) {
    UpSet a(Shape({3, 3}), mask);
    LpProblem p = marginal_polytope(a.shape(), marginals(a), true);
    CHECK(is_vertex(a.indicator().values(), p).vertex);
  }
}
