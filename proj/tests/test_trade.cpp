#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "monoext/oracle.hpp"
#include "monoext/trade.hpp"

using namespace monoext;

namespace {

std::vector<double> uniform_masses(int m) { return std::vector<double>(m, 1.0 / m); }

// Welfare LP with cell-level trade probabilities and payments, every interim
// IC pair checked at both edges of each type cell, and IR at the worst edge.
// Nothing about envelopes, virtual values or monotone rules is used.
double brute_force_trade(const TradeScenario& s) {
  const int mv = s.value_cells(), mc = s.cost_cells();
  const double dv = (s.v_domain.hi - s.v_domain.lo) / mv, dc = (s.c_domain.hi - s.c_domain.lo) / mc;
  const std::size_t n = static_cast<std::size_t>(mv) * mc;
  LpProblem lp = LpProblem::with_variables(n, 0.0, 1.0);
  for (std::size_t x = 0; x < n; ++x) lp.add_variable(-kInf, kInf);
  auto p = [&](int i, int j) { return static_cast<std::size_t>(i) * mc + j; };
  auto t = [&](int i, int j) { return n + p(i, j); };

  // buyer of value v reporting cell k: sum_j g_s[j] (p(k, j) v - t(k, j))
  auto buyer = [&](int k, double v, double sign, LinearConstraint& c) {
    for (int j = 0; j < mc; ++j) {
      c.terms.emplace_back(p(k, j), sign * s.g_s[j] * v);
      c.terms.emplace_back(t(k, j), -sign * s.g_s[j]);
    }
  };
  auto seller = [&](int k, double cost, double sign, LinearConstraint& c) {
    for (int i = 0; i < mv; ++i) {
      c.terms.emplace_back(t(i, k), sign * s.g_b[i]);
      c.terms.emplace_back(p(i, k), -sign * s.g_b[i] * cost);
    }
  };
  for (int i = 0; i < mv; ++i) {
    for (double v : {s.v_domain.lo + i * dv, s.v_domain.lo + (i + 1) * dv}) {
      for (int k = 0; k < mv; ++k) {
        if (k == i) continue;
        LinearConstraint c{{}, Relation::ge, 0.0};
        buyer(i, v, 1.0, c);
        buyer(k, v, -1.0, c);
        lp.add_constraint(c);
      }
    }
    LinearConstraint ir{{}, Relation::ge, 0.0};
    buyer(i, s.v_domain.lo + i * dv, 1.0, ir);
    lp.add_constraint(ir);
    for (int j = 0; j < mc; ++j) {
      const double v = s.v_domain.lo + (i + 0.5) * dv;
      lp.objective[p(i, j)] += s.weight_b[i] * s.g_s[j] * v;
      lp.objective[t(i, j)] -= s.weight_b[i] * s.g_s[j];
    }
  }
  for (int j = 0; j < mc; ++j) {
    for (double cost : {s.c_domain.lo + j * dc, s.c_domain.lo + (j + 1) * dc}) {
      for (int k = 0; k < mc; ++k) {
        if (k == j) continue;
        LinearConstraint c{{}, Relation::ge, 0.0};
        seller(j, cost, 1.0, c);
        seller(k, cost, -1.0, c);
        lp.add_constraint(c);
      }
    }
    LinearConstraint ir{{}, Relation::ge, 0.0};
    seller(j, s.c_domain.lo + (j + 1) * dc, 1.0, ir);
    lp.add_constraint(ir);
    for (int i = 0; i < mv; ++i) {
      const double cost = s.c_domain.lo + (j + 0.5) * dc;
      lp.objective[t(i, j)] += s.weight_s[j] * s.g_b[i];
      lp.objective[p(i, j)] -= s.weight_s[j] * s.g_b[i] * cost;
    }
  }
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  return sol.objective;
}

}  // namespace

TEST_CASE("virtual values for uniform types") {
  const int m = 10;
  auto s = TradeScenario::total_surplus({0, 1}, {0, 1}, uniform_masses(m), uniform_masses(m));
  auto mr = s.marginal_revenue();
  auto mc = s.marginal_cost();
  for (int i = 0; i < m; ++i) {
    CHECK(mr[i] == doctest::Approx(2 * (i + 0.5) / m - 1).epsilon(1e-12));
    CHECK(mc[i] == doctest::Approx(2 * (i + 0.5) / m).epsilon(1e-12));
  }
  CHECK(s.buyer_weight_tail().front() == doctest::Approx(1.0));
  CHECK(s.seller_weight_head().back() == doctest::Approx(1.0));
}

TEST_CASE("no gains from trade") {
  auto s = TradeScenario::total_surplus({0, 1}, {2, 3}, uniform_masses(6), uniform_masses(6));
  TradeSolution r = solve_interim_efficient(s);
  for (double v : r.p.values()) CHECK(v == 0.0);
  CHECK(r.z == 0.0);
  CHECK(r.welfare == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(r.mechanism.pooled());
}

TEST_CASE("uniform second best trades iff v >= c + 1/4") {
  const int m = 50;
  auto s = TradeScenario::total_surplus({0, 1}, {0, 1}, uniform_masses(m), uniform_masses(m));
  TradeSolution r = solve_interim_efficient(s);
  const auto lagrangian = oracle::uniform_trade_lagrangian_thresholds(m);
  for (int j = 0; j < m; ++j) {
    int lp_first = m;
    for (int i = m; i-- > 0;)
      if (r.p.at({i, j}) > 0.5) lp_first = i;
    // first cell whose centre clears c + 1/4
    const int closed = std::min(m, static_cast<int>(std::ceil((j + 0.5) / m * m + 0.25 * m - 0.5 - 1e-9)));
    CHECK(std::abs(lp_first - closed) <= 1);
    CHECK(std::abs(lagrangian[j] - closed) <= 1);
  }
  CHECK(r.pi == doctest::Approx(r.z + r.seller_top_utility).epsilon(1e-12));
  CHECK(r.pi >= -1e-9);
  CHECK(r.z == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.seller_top_utility <= 1e-7);
}

TEST_CASE("structured LP matches the brute-force mechanism LP") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto s = TradeScenario::random_instance(8, 8, seed);
    TradeSolution r = solve_interim_efficient(s);
    CHECK(r.welfare == doctest::Approx(brute_force_trade(s)).epsilon(1e-7));
  }
  auto u = TradeScenario::total_surplus({0, 1}, {0, 1}, uniform_masses(8), uniform_masses(8));
  CHECK(solve_interim_efficient(u).welfare == doctest::Approx(brute_force_trade(u)).epsilon(1e-7));
}

TEST_CASE("budget identity from interim payments") {
  auto s = TradeScenario::random_instance(20, 20, 11);
  TradeSolution r = solve_interim_efficient(s);
  const int m = 20;
  const double d = 1.0 / m;
  // Interim payments implied by utilities at cell midpoints must balance ex ante.
  double paid = 0.0, received = 0.0;
  for (int i = 0; i < m; ++i) {
    const double u = 0.5 * (r.buyer_utility[i] + r.buyer_utility[i + 1]);
    paid += s.g_b[i] * (r.q1[i] * (i + 0.5) * d - u);
  }
  for (int j = 0; j < m; ++j) {
    const double u = 0.5 * (r.seller_utility[j] + r.seller_utility[j + 1]);
    received += s.g_s[j] * (u + r.q2[j] * (j + 0.5) * d);
  }
  CHECK(paid == doctest::Approx(received).epsilon(1e-7));
  CHECK(r.pi == doctest::Approx(r.z + r.seller_top_utility).epsilon(1e-7));
  CHECK(r.z >= 0.0);
  CHECK(r.seller_top_utility >= -1e-9);
  for (int i = 1; i < m; ++i) CHECK(r.q1[i] >= r.q1[i - 1] - 1e-12);
  for (int j = 1; j < m; ++j) CHECK(r.q2[j] <= r.q2[j - 1] + 1e-12);
}

TEST_CASE("random instance has one fractional level on one rectangle") {
  auto s = TradeScenario::random_instance(50, 50, 2024);
  TradeSolution r = solve_interim_efficient(s);
  std::vector<double> levels;
  for (double v : r.p.values())
    if (v > 0.0 && v < 1.0 && std::find(levels.begin(), levels.end(), v) == levels.end()) levels.push_back(v);
  CHECK(levels.size() <= 1);
  CHECK(r.p.data() == r.mechanism.simulate(50).data());
  for (std::size_t j = 1; j < r.mechanism.phi.size(); ++j) CHECK(r.mechanism.phi[j] >= r.mechanism.phi[j - 1]);
}

TEST_CASE("markup-pooling extraction") {
  const int m = 20;
  std::vector<double> diag(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) diag[i * m + j] = i >= j ? 1.0 : 0.0;
  MarkupPooling id = extract_markup_pooling(GridFunction(Shape({m, m}), diag));
  CHECK_FALSE(id.pooled());
  for (int j = 0; j < m; ++j) CHECK(id.phi[j] == j);

  // phi(c) = c + 0.2 in cells, pooling cost cells 6..9 ([0.3, 0.5]), k = 0.4
  MarkupPooling made;
  made.phi.resize(m);
  for (int j = 0; j < m; ++j) made.phi[j] = std::min(m, j + 4);
  made.pool_first = 6;
  made.pool_last = 9;
  made.phi_low = 10;
  made.phi_high = 13;
  made.k = 0.4;
  for (int j = 6; j <= 9; ++j) made.phi[j] = made.phi_low;
  GridFunction p = made.simulate(m);
  MarkupPooling got = extract_markup_pooling(p);
  CHECK(got.pool_first == 6);
  CHECK(got.pool_last == 9);
  CHECK(got.phi_low == 10);
  CHECK(got.phi_high == 13);
  CHECK(got.k == 0.4);
  CHECK(got.phi == made.phi);
  CHECK(got.simulate(m).data() == p.data());

  std::vector<double> two = p.data();
  for (int j = 14; j <= 15; ++j) two[18 * m + j] = 0.4;  // second box, same level
  CHECK_THROWS_AS(extract_markup_pooling(GridFunction(Shape({m, m}), two)), NotMarkupPooling);
  std::vector<double> mixed = p.data();
  mixed[12 * m + 6] = 0.7;
  CHECK_THROWS_AS(extract_markup_pooling(GridFunction(Shape({m, m}), mixed)), NotMarkupPooling);
}

TEST_CASE("optimal DIC vertices are markup-pooling and unique") {
  auto s = TradeScenario::random_instance(30, 30, 77);
  DicReport rep = verify_dic_vertex_is_markup_pooling(s, 50, 5);
  CHECK(rep.passed == 50);
  CHECK(rep.ok());
  for (const auto& f : rep.failures) MESSAGE(f);

  // All welfare on the lowest buyer: the planner maximizes the broker's surplus.
  TradeScenario low = s;
  std::fill(low.weight_b.begin(), low.weight_b.end(), 0.0);
  std::fill(low.weight_s.begin(), low.weight_s.end(), 0.0);
  low.weight_b[0] = 1.0;
  TradeSolution r = solve_interim_efficient(low);
  CHECK(r.z == doctest::Approx(r.pi).epsilon(1e-9));
  CHECK(unique_among_monotone_trade_rules(r.p, low).unique);
}

TEST_CASE("all welfare on the lowest buyer gives the broker markup v >= c + 1/2") {
  const int m = 20;
  auto s = TradeScenario::total_surplus({0, 1}, {0, 1}, uniform_masses(m), uniform_masses(m));
  std::fill(s.weight_b.begin(), s.weight_b.end(), 0.0);
  std::fill(s.weight_s.begin(), s.weight_s.end(), 0.0);
  s.weight_b[0] = 1.0;
  TradeSolution r = solve_interim_efficient(s);
  for (int j = 0; j < m; ++j) CHECK(std::abs(r.mechanism.phi[j] - std::min(m, j + m / 2)) <= 1);
  CHECK(r.z == doctest::Approx(r.pi).epsilon(1e-9));
  CHECK(r.seller_top_utility == doctest::Approx(0.0).epsilon(1e-9));
}
