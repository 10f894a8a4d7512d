#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "monoext/pubgood.hpp"

using namespace monoext;

namespace {

PublicGoodScenario lognormal_scenario() {
  Shape s({30, 30});
  std::vector<Interval> dom{{0, 4}, {0, 4}};
  auto w = density_table(s, dom, {DensityKind::truncated_lognormal, std::log(2.0), 0.4, 0.5});
  return PublicGoodScenario::linear_externality(s, dom, w, 0.1, 3.0);
}

std::vector<double> random_density(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) total += (x = u(rng));
  for (double& x : w) x /= total;
  return w;
}

// Mechanism LP with free transfers and every ex-post IC and IR constraint
// written out; allocation monotonicity is not imposed.
double brute_force_public_good(const PublicGoodScenario& s) {
  const Shape& shape = s.shape;
  const std::size_t n = shape.size();
  const int agents = shape.rank();
  LpProblem p = LpProblem::with_variables(n, 0.0, 1.0);
  std::vector<std::vector<std::size_t>> t(agents);
  for (int i = 0; i < agents; ++i)
    for (std::size_t x = 0; x < n; ++x) t[i].push_back(p.add_variable(-kInf, kInf));
  for (std::size_t x = 0; x < n; ++x) {
    double total = -s.cost;
    for (int i = 0; i < agents; ++i) total += s.values[i][x];
    p.objective[x] = s.density[x] * total;
  }
  for (int i = 0; i < agents; ++i) {
    for (std::size_t x = 0; x < n; ++x) {
      const double v = s.values[i][x];
      p.add_constraint({{{x, v}, {t[i][x], -1.0}}, Relation::ge, 0.0});
      for (std::size_t y = 0; y < n; ++y) {
        bool same_others = y != x;
        for (int a = 0; a < agents; ++a)
          if (a != i && shape.coord(x, a) != shape.coord(y, a)) same_others = false;
        if (!same_others) continue;
        p.add_constraint({{{x, v}, {t[i][x], -1.0}, {y, -v}, {t[i][y], 1.0}}, Relation::ge, 0.0});
      }
    }
  }
  LinearConstraint budget;
  budget.relation = Relation::ge;
  for (std::size_t x = 0; x < n; ++x) {
    budget.terms.emplace_back(x, -s.cost * s.density[x]);
    for (int i = 0; i < agents; ++i) budget.terms.emplace_back(t[i][x], s.density[x]);
  }
  p.add_constraint(budget);
  LpSolution sol = solve_lp(p);
  REQUIRE(sol.optimal());
  return sol.objective;
}

std::set<long long> distinct_levels(const GridFunction& f) {
  std::set<long long> out;
  for (double v : f.values()) out.insert(std::llround(v * 1e9));
  return out;
}

}  // namespace

TEST_CASE("correlated lognormal signals give a three-region allocation") {
  PublicGoodScenario s = lognormal_scenario();
  REQUIRE(s.symmetric);
  MechanismResult r = solve_public_good(s);
  auto levels = distinct_levels(r.allocation);
  CHECK(levels.size() == 3);
  CHECK(r.policy.p > 0.0);
  CHECK(r.policy.p < 1.0);
  CHECK(r.allocation.at({29, 29}) == 1.0);
  CHECK(r.allocation.at({0, 0}) == 0.0);
  CHECK(is_monotone(r.allocation, 0.0));
  CHECK(r.budget_slack >= -1e-7);
  CHECK(r.surplus > 0.0);
  CHECK(r.surplus == doctest::Approx(r.unrestricted_objective).epsilon(1e-8));
  auto ic = verify_expost_ic(r.allocation, r.transfers, s, 2.0 / 30.0);
  CHECK(ic.ok);
  CHECK(ic.worst_ir >= -1e-12);
  for (std::size_t x = 0; x < r.allocation.size(); ++x) {
    auto c = s.shape.coords(x);
    CHECK(r.allocation[x] == r.allocation.at({c[1], c[0]}));
  }
}

TEST_CASE("cost extremes") {
  Shape s({5, 5});
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  std::vector<double> w(25, 1.0 / 25);
  auto expensive = PublicGoodScenario::linear_externality(s, dom, w, 0.1, 10.0);
  MechanismResult r = solve_public_good(expensive);
  for (double v : r.allocation.values()) CHECK(v == 0.0);
  CHECK(r.surplus == 0.0);

  auto free_good = PublicGoodScenario::linear_externality(s, dom, w, 0.1, -0.5);
  MechanismResult f = solve_public_good(free_good);
  for (double v : f.allocation.values()) CHECK(v == 1.0);
  CHECK(f.surplus == doctest::Approx(brute_force_public_good(free_good)).epsilon(1e-9));
}

TEST_CASE("structured LP matches the brute-force mechanism LP") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> wd(0.0, 0.4), cd(0.6, 1.6);
  for (int trial = 0; trial < 8; ++trial) {
    Shape s({5, 5});
    std::vector<Interval> dom{{0, 1}, {0, 1}};
    auto scen = PublicGoodScenario::linear_externality(s, dom, random_density(rng, 25), wd(rng), cd(rng));
    MechanismResult r = solve_public_good(scen);
    CHECK(r.unrestricted_objective == doctest::Approx(brute_force_public_good(scen)).epsilon(1e-7));
    CHECK(r.budget_slack >= -1e-7);
    CHECK(distinct_levels(r.allocation).size() <= 3);
    CHECK(verify_expost_ic(r.allocation, r.transfers, scen, 1e-12).ok);
  }
}

TEST_CASE("envelope transfers") {
  const int m = 10;
  Shape s({m});
  std::vector<Interval> dom{{0, 1}};
  auto scen = PublicGoodScenario::linear_externality(s, dom, std::vector<double>(m, 0.1), 0.0, 0.5);
  for (const auto& t : compute_transfers(GridFunction::constant(s, 0.0), scen))
    for (double v : t) CHECK(v == 0.0);
  auto full = compute_transfers(GridFunction::constant(s, 1.0), scen);
  for (double v : full[0]) CHECK(std::abs(v) <= 1.0 / m);

  const int k = 6;
  std::vector<double> a(m, 0.0);
  std::fill(a.begin() + k, a.end(), 1.0);
  auto t = compute_transfers(GridFunction(s, a), scen)[0];
  for (int i = 0; i < m; ++i) {
    if (i < k) CHECK(t[i] == 0.0);
    else CHECK(std::abs(t[i] - static_cast<double>(k) / m) <= 1.0 / m);
  }
}

TEST_CASE("ex-post IC verification") {
  const int m = 6;
  Shape s({m});
  std::vector<Interval> dom{{0, 1}};
  auto scen = PublicGoodScenario::linear_externality(s, dom, std::vector<double>(m, 1.0 / m), 0.0, 0.5);
  std::vector<double> inc(m);
  for (int i = 0; i < m; ++i) inc[i] = (i + 1.0) / m;
  std::vector<std::vector<double>> zero{std::vector<double>(m, 0.0)};
  CHECK_FALSE(verify_expost_ic(GridFunction(s, inc), zero, scen, 1e-9).ok);
  CHECK(verify_expost_ic(GridFunction::constant(s, 0.4), zero, scen, 1e-9).ok);
  GridFunction g(s, inc);
  CHECK(verify_expost_ic(g, compute_transfers(g, scen), scen, 1e-12).ok);
}

TEST_CASE("hazard condition") {
  Shape s({8, 8});
  CHECK(check_hazard_condition(s, std::vector<double>(64, 1.0 / 64)).passes());
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  auto normal = density_table(s, dom, {DensityKind::truncated_normal, 0.5, 0.3, 0.5});
  CHECK(check_hazard_condition(s, normal).passes());

  // row-major (s1, s2): at s2 = 0 the mass sits at high s1
  std::vector<double> bad{0.01, 0.1, 0.1, 0.01, 0.1, 0.1, 0.38, 0.1, 0.1};
  auto rep = check_hazard_condition(Shape({3, 3}), bad);
  CHECK_FALSE(rep.passes());
  CHECK_THROWS_AS(check_hazard_condition(Shape({2, 2}), {0.5, 0.0, 0.5, 0.0}), DegenerateConditional);
}

TEST_CASE("limited negative externalities give max-threshold refunds") {
  const int m = 20;
  Shape s({m, m});
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  auto w = density_table(s, dom, {DensityKind::truncated_normal, 0.5, 0.3, 0.2});
  REQUIRE(check_hazard_condition(s, w).passes());
  RefundMechanism r = solve_limited_negative_externality(m, w, 0.2);
  CHECK(r.k1 <= r.k2);
  CHECK(r.p > 0.0);
  CHECK(r.p <= 1.0);
  for (std::size_t x = 0; x < s.size(); ++x) {
    const double mx = std::max(s.coord(x, 0), s.coord(x, 1)) / static_cast<double>(m);
    const double want = r.p * (mx >= r.k1 - 1e-12) + (1.0 - r.p) * (mx >= r.k2 - 1e-12);
    CHECK(r.result.allocation[x] == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(r.result.budget_slack >= -1e-7);

  RefundMechanism none = solve_limited_negative_externality(m, w, 1.0);
  for (double v : none.result.allocation.values()) CHECK(v == 0.0);
  CHECK(none.k1 == 1.0);

}

TEST_CASE("weak correlation posts one price up to one cell") {
  // A binding budget on a grid needs a mix of adjacent thresholds, so the
  // single-price regime shows up as k2 - k1 <= 1/m, shrinking with m.
  for (int m : {20, 30}) {
    Shape s({m, m});
    std::vector<Interval> dom{{0, 1}, {0, 1}};
    auto w = density_table(s, dom, {DensityKind::truncated_normal, 0.5, 0.3, 0.05});
    RefundMechanism r = solve_limited_negative_externality(m, w, 0.2);
    CHECK(r.k1 < 1.0);
    CHECK(r.k2 - r.k1 <= 1.0 / m + 1e-12);
  }
}

TEST_CASE("scenario validation") {
  Shape s({3, 3});
  std::vector<Interval> dom{{0, 1}, {0, 1}};
  CHECK_THROWS_AS(PublicGoodScenario::linear_externality(s, dom, std::vector<double>(9, 0.2), 0.1, 1.0).validate(),
                  InvalidArgument);
  auto ok = PublicGoodScenario::linear_externality(s, dom, std::vector<double>(9, 1.0 / 9), 0.1, 1.0);
  ok.values[0][3] = -1.0;
  CHECK_THROWS_AS(ok.validate(), NotMonotone);
}
