#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "monoext/oracle.hpp"
#include "monoext/rfauction.hpp"

using namespace monoext;

namespace {

// Second-price auction with reserve cell rho, ties to bidder 1.
std::pair<StepFunction1D, StepFunction1D> spa_with_reserve(int m, int rho) {
  std::vector<double> a(m, 0.0), b(m, 0.0);
  for (int k = rho; k < m; ++k) {
    a[k] = (k + 1.0) / m;
    b[k] = static_cast<double>(k) / m;
  }
  return {StepFunction1D(a), StepFunction1D(b)};
}

// Offer bidder 1 at quantile alpha/m, then bidder 2 at beta/m.
std::pair<StepFunction1D, StepFunction1D> posted_prices(int m, int alpha, int beta) {
  std::vector<double> a(m, 0.0), b(m, 0.0);
  for (int k = alpha; k < m; ++k) a[k] = 1.0;
  for (int k = beta; k < m; ++k) b[k] = static_cast<double>(alpha) / m;
  return {StepFunction1D(a), StepFunction1D(b)};
}

void check_implementation(const AuctionImplementation& impl, const StepFunction1D& q1, const StepFunction1D& q2) {
  for (std::size_t c = 0; c < impl.p1.size(); ++c) {
    CHECK(impl.p1[c] >= 0.0);
    CHECK(impl.p2[c] >= 0.0);
    CHECK(impl.p1[c] + impl.p2[c] <= 1.0 + 1e-12);
  }
  const auto m1 = marginals(impl.p1), m2 = marginals(impl.p2);
  for (std::size_t i = 0; i < q1.size(); ++i) CHECK(std::abs(m1[0][i] - q1[i]) <= 1e-9);
  for (std::size_t j = 0; j < q2.size(); ++j) CHECK(std::abs(m2[1][j] - q2[j]) <= 1e-9);
  CHECK(impl.residual <= 1e-9);
}

// Same objective over (p1, p2) cells directly, with nondecreasing marginals.
double cell_level_optimum(int m, const std::vector<double>& c1, const std::vector<double>& c2) {
  const std::size_t n = static_cast<std::size_t>(m) * m;
  LpProblem lp = LpProblem::with_variables(2 * n, 0.0, 1.0);
  for (std::size_t c = 0; c < n; ++c) lp.add_constraint({{{c, 1.0}, {n + c, 1.0}}, Relation::le, 1.0});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      lp.objective[i * m + j] = c1[i] / n;
      lp.objective[n + i * m + j] = c2[j] / n;
    }
  }
  for (int k = 0; k + 1 < m; ++k) {
    LinearConstraint r1{{}, Relation::le, 0.0}, r2{{}, Relation::le, 0.0};
    for (int l = 0; l < m; ++l) {
      r1.terms.emplace_back(k * m + l, 1.0);
      r1.terms.emplace_back((k + 1) * m + l, -1.0);
      r2.terms.emplace_back(n + l * m + k, 1.0);
      r2.terms.emplace_back(n + l * m + k + 1, -1.0);
    }
    lp.add_constraint(r1);
    lp.add_constraint(r2);
  }
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  return sol.objective;
}

}  // namespace

TEST_CASE("weak majorization against the generalized inverse") {
  const int m = 12;
  std::vector<double> ramp(m);
  for (int k = 0; k < m; ++k) ramp[k] = (k + 0.5) / m;
  const StepFunction1D r(ramp);
  // A ramp is its own inverse up to the half-cell shift, tails equal.
  CHECK(std::abs(inverse_tail(r, 0.0) - r.tail_integral(0.0)) < 1e-15);
  auto rep = check_reduced_form(r, r);
  CHECK(rep.feasible);
  CHECK(rep.feasible_swapped);
  CHECK(rep.min_gap >= -1e-12);

  const StepFunction1D one(std::vector<double>(m, 1.0));
  CHECK_FALSE(check_reduced_form(one, one).feasible);
  const StepFunction1D zero(std::vector<double>(m, 0.0));
  CHECK(check_reduced_form(one, zero).feasible);

  // Marginals of monotone witnesses are always feasible.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int m1 = 3 + trial % 5, m2 = 2 + trial % 7;
    std::vector<double> f(m1), h(m2), wc(m2), wr(m1);
    for (auto& v : f) v = u(rng);
    for (auto& v : h) v = u(rng);
    for (auto& v : wc) v = u(rng);
    for (auto& v : wr) v = u(rng);
    std::sort(f.begin(), f.end());
    std::sort(h.begin(), h.end());
    const double t = u(rng);
    std::vector<double> q1(m1, 0.0), q2(m2, 0.0);
    for (int i = 0; i < m1; ++i)
      for (int j = 0; j < m2; ++j) {
        q1[i] += t * f[i] * wc[j] / m2;
        q2[j] += (1 - t) * h[j] * wr[i] / m1;
      }
    CHECK(check_reduced_form(StepFunction1D(q1), StepFunction1D(q2)).feasible);
  }
}

TEST_CASE("second price with reserve is extreme and implemented in closed form") {
  const int m = 10, rho = 3;
  auto [q1, q2] = spa_with_reserve(m, rho);
  const auto ext = extreme_reduced_form_check(q1, q2);
  REQUIRE(ext.extreme);
  CHECK(ext.k1 == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(ext.k2 == doctest::Approx(0.3).epsilon(1e-12));
  const auto impl = construct_implementation(q1, q2);
  CHECK(impl.closed_form);
  check_implementation(impl, q1, q2);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      CHECK(impl.p1.at({i, j}) == (i >= std::max(rho, j) ? 1.0 : 0.0));
      CHECK(impl.p2.at({i, j}) == (j >= rho && i < j ? 1.0 : 0.0));
    }
  }

  auto [n1, n2] = spa_with_reserve(m, 0);
  const auto none = extreme_reduced_form_check(n1, n2);
  REQUIRE(none.extreme);
  CHECK(none.k1 == 0.0);
  CHECK(none.k2 == 0.0);
}

TEST_CASE("sequential posted prices recover deterministic rules") {
  const int m = 10, alpha = 4, beta = 6;
  auto [q1, q2] = posted_prices(m, alpha, beta);
  const auto ext = extreme_reduced_form_check(q1, q2);
  REQUIRE(ext.extreme);
  CHECK(ext.k1 == doctest::Approx(0.4));
  CHECK(ext.k2 == doctest::Approx(0.6));
  const auto impl = construct_implementation(q1, q2);
  CHECK(impl.closed_form);
  check_implementation(impl, q1, q2);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      CHECK(impl.p1.at({i, j}) == (i >= alpha ? 1.0 : 0.0));
      CHECK(impl.p2.at({i, j}) == (i < alpha && j >= beta ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("zero allocations and mixtures") {
  const int m = 8;
  const StepFunction1D zero(std::vector<double>(m, 0.0));
  const auto impl = construct_implementation(zero, zero);
  for (std::size_t c = 0; c < impl.p1.size(); ++c) {
    CHECK(impl.p1[c] == 0.0);
    CHECK(impl.p2[c] == 0.0);
  }

  auto [a1, a2] = spa_with_reserve(m, 2);
  auto [b1, b2] = posted_prices(m, 3, 5);
  std::vector<double> c1(m), c2(m);
  for (int k = 0; k < m; ++k) {
    c1[k] = 0.5 * (a1[k] + b1[k]);
    c2[k] = 0.5 * (a2[k] + b2[k]);
  }
  const StepFunction1D mix1(c1), mix2(c2);
  CHECK_FALSE(extreme_reduced_form_check(mix1, mix2).extreme);
  const auto lp = construct_implementation(mix1, mix2);
  CHECK_FALSE(lp.closed_form);
  check_implementation(lp, mix1, mix2);

  // Ties split evenly: a strict average of the two tie-breaking orders.
  std::vector<double> half(m);
  for (int k = 0; k < m; ++k) half[k] = (k + 0.5) / m;
  const StepFunction1D h(half);
  CHECK_FALSE(extreme_reduced_form_check(h, h).extreme);
  check_implementation(construct_implementation(h, h), h, h);

  const StepFunction1D one(std::vector<double>(m, 1.0));
  CHECK_THROWS_AS(construct_implementation(one, one), Infeasible);
}

TEST_CASE("feasibility agrees with the max-flow oracle on 6x6") {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> q1(6), q2(6);
    const double s1 = u(rng), s2 = u(rng);
    for (int k = 0; k < 6; ++k) {
      if (trial % 3 == 0) {
        q1[k] = std::floor(u(rng) * 13) / 12;
        q2[k] = std::floor(u(rng) * 13) / 12;
      } else {
        q1[k] = s1 * u(rng);
        q2[k] = s2 * u(rng);
      }
    }
    std::sort(q1.begin(), q1.end());
    std::sort(q2.begin(), q2.end());
    const StepFunction1D f1(q1), f2(q2);
    const auto rep = check_reduced_form(f1, f2);
    const bool truth = oracle::reduced_form_feasible(q1, q2);
    CHECK_MESSAGE(rep.feasible == truth, "trial " << trial);
    if (truth) {
      ++feasible;
      check_implementation(construct_implementation(f1, f2), f1, f2);
    } else {
      ++infeasible;
    }
  }
  CHECK(feasible >= 50);
  CHECK(infeasible >= 50);
}

TEST_CASE("linear probes return extreme reduced forms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 6;
    std::vector<double> c1(m), c2(m);
    for (auto& v : c1) v = u(rng);
    for (auto& v : c2) v = u(rng);
    const LpSolution sol = solve_lp(reduced_form_lp(m, m, c1, c2));
    REQUIRE(sol.optimal());
    // The top-set cuts describe the same polytope as the cell-level program.
    CHECK(sol.objective == doctest::Approx(cell_level_optimum(m, c1, c2)).epsilon(1e-9));
    std::vector<double> a(sol.x.begin(), sol.x.begin() + m), b(sol.x.begin() + m, sol.x.end());
    for (auto* v : {&a, &b})
      for (auto& x : *v) x = std::clamp(x, 0.0, 1.0);
    const StepFunction1D q1(a, 1e-9), q2(b, 1e-9);
    CHECK_MESSAGE(extreme_reduced_form_check(q1, q2).extreme, "trial " << trial);
  }

  // A zero objective ties everything; the solver still returns a vertex.
  const LpSolution flat = solve_lp(reduced_form_lp(5, 5, std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)));
  REQUIRE(flat.optimal());
  std::vector<double> a(flat.x.begin(), flat.x.begin() + 5), b(flat.x.begin() + 5, flat.x.end());
  CHECK(extreme_reduced_form_check(StepFunction1D(a, 1e-9), StepFunction1D(b, 1e-9)).extreme);
}

TEST_CASE("without investment the optimum is the symmetric reserve at the median") {
  const int m = 20;
  const auto g = QuantileTransform::uniform(0.0, 1.0);
  const InvestmentSpec spec{kInf};
  const auto res = solve_investment_auction(spec, g, m);
  const auto psi = quantile_virtual_values(g, m);
  double myerson = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) myerson += std::max({psi[i], psi[j], 0.0}) / (m * m);
  CHECK(res.objective == doctest::Approx(myerson).epsilon(1e-9));
  REQUIRE(res.structure.extreme);
  CHECK(res.structure.k1 == doctest::Approx(0.5));
  CHECK(res.structure.k2 == doctest::Approx(0.5));
  check_implementation(res.implementation, res.q1, res.q2);
}

TEST_CASE("moderate investment costs favour an asymmetric mechanism") {
  const int m = 30;
  const auto g = QuantileTransform::uniform(0.0, 1.0);
  const InvestmentSpec spec{0.4};
  const auto res = solve_investment_auction(spec, g, m);
  const auto sym = best_symmetric_reserve(spec, quantile_virtual_values(g, m));
  MESSAGE("asymmetric " << res.objective << " symmetric " << sym.objective << " probes " << res.probes);
  CHECK(res.objective > sym.objective + 1e-6);
  CHECK(res.probes <= 64);
  CHECK(res.q1.values() != res.q2.values());
  CHECK(res.structure.extreme);
  check_implementation(res.implementation, res.q1, res.q2);

  // Always selling to bidder 1 is a feasible candidate.
  const StepFunction1D one(std::vector<double>(m, 1.0)), zero(std::vector<double>(m, 0.0));
  CHECK(res.objective >= investment_revenue(spec, quantile_virtual_values(g, m), one, zero) - 1e-12);
}

TEST_CASE("value-space allocations map to quantile cells") {
  ReducedForm rf{{0.0, 0.2, 0.5, 0.9}, {0.1, 0.1, 0.4, 1.0}, QuantileTransform::uniform(0.0, 2.0),
                 QuantileTransform::uniform(1.0, 3.0)};
  CHECK(rf.quantile(1, 4).values() == rf.q1);
  CHECK(rf.quantile(2, 4).values() == rf.q2);
  CHECK(rf.quantile(1, 8)[3] == 0.2);
}
