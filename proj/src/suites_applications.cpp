#include <algorithm>
#include <cmath>

#include "monoext/oracle.hpp"
#include "monoext/ppi.hpp"
#include "monoext/pubgood.hpp"
#include "monoext/rfauction.hpp"
#include "monoext/trade.hpp"
#include "suites_internal.hpp"

namespace monoext::suite_detail {

namespace {

std::vector<double> distinct_values(std::span<const double> v, double tol) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  for (double x : s)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

// Largest marginal mismatch and smallest slack of p1 + p2 <= 1.
void check_implementation(SuiteReport& r, const std::string& tag, const AuctionImplementation& impl,
                          const StepFunction1D& q1, const StepFunction1D& q2) {
  double worst = 0.0;
  bool bounded = true;
  for (std::size_t c = 0; c < impl.p1.size(); ++c)
    bounded = bounded && impl.p1[c] >= 0.0 && impl.p2[c] >= 0.0 && impl.p1[c] + impl.p2[c] <= 1.0 + 1e-12;
  const auto m1 = marginals(impl.p1), m2 = marginals(impl.p2);
  for (std::size_t i = 0; i < q1.size(); ++i) worst = std::max(worst, std::abs(m1[0][i] - q1[i]));
  for (std::size_t j = 0; j < q2.size(); ++j) worst = std::max(worst, std::abs(m2[1][j] - q2[j]));
  r.expect_lazy(bounded, [&] { return tag + ": implementation leaves the simplex"; });
  r.expect_lazy(worst <= 1e-9, [&] { return tag + ": implementation marginals off by " + fmt(worst); });
}

}  // namespace

void pubgood(SuiteReport& r) {
  constexpr int kCells = 30;
  constexpr double kW = 0.1, kCost = 3.0, kIcTol = 2.0 / kCells, kBudgetTol = -1e-7;
  const Shape shape({kCells, kCells});
  const std::vector<Interval> dom{{0.0, 4.0}, {0.0, 4.0}};
  const auto density = density_table(shape, dom, {DensityKind::truncated_lognormal, std::log(2.0), 0.4, 0.5});
  const auto s = PublicGoodScenario::linear_externality(shape, dom, density, kW, kCost);
  const MechanismResult res = solve_public_good(s);
  const GridFunction& a = res.allocation;

  const auto levels = distinct_values(a.values(), 1e-9);
  const bool three = levels.size() == 3 && levels.front() == 0.0 && levels.back() == 1.0;
  r.expect(three, "allocation should take exactly the values 0, p, 1 (got " + std::to_string(levels.size()) + ")");
  r.expect(is_monotone(a, 0.0), "allocation is not monotone");
  // {a = 1} is an up-set at the top corner and {a = 0} a down-set at the origin.
  std::vector<char> top(a.size()), positive(a.size());
  for (std::size_t x = 0; x < a.size(); ++x) {
    top[x] = a[x] == 1.0;
    positive[x] = a[x] > 0.0;
  }
  bool corners = a.at({kCells - 1, kCells - 1}) == 1.0 && a.at({0, 0}) == 0.0;
  try {
    UpSet(shape, top);
    UpSet(shape, positive);
  } catch (const NotMonotone&) {
    corners = false;
  }
  r.expect(corners, "regions are not up-set and down-set corners");
  bool symmetric = true;
  for (std::size_t x = 0; x < a.size(); ++x) {
    const auto c = shape.coords(x);
    symmetric = symmetric && a[x] == a.at({c[1], c[0]});
  }
  r.expect(symmetric, "allocation is not symmetric");

  TwoThresholdPolicy policy;
  try {
    policy = extract_two_threshold(a);
    r.expect(policy.p > 0.0 && policy.p < 1.0, "middle level should be strictly fractional");
  } catch (const StructureViolation& e) {
    r.expect(false, e.what());
  }
  const IcReport ic = verify_expost_ic(a, res.transfers, s, kIcTol);
  r.expect(ic.ok, "ex-post IC residual " + fmt(ic.worst) + " above " + fmt(kIcTol));
  r.expect(ic.worst_ir >= -1e-12, "ex-post IR fails by " + fmt(-ic.worst_ir));
  r.expect(res.budget_slack >= kBudgetTol, "budget slack " + fmt(res.budget_slack));
  r.expect(res.surplus > 0.0, "no surplus");
  r.expect(std::abs(res.surplus - res.unrestricted_objective) <= 1e-8 * std::max(1.0, std::abs(res.surplus)),
           "symmetry restriction changed the optimum");

  // Independent budget: E[sum_i t_i - c a].
  double budget = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) budget += density[x] * (res.transfers[0][x] + res.transfers[1][x] - kCost * a[x]);
  r.expect(budget >= kBudgetTol, "recomputed budget " + fmt(budget));

  r.metrics = {{"p", policy.p}, {"cells_one", std::count(top.begin(), top.end(), 1)},
               {"cells_positive", std::count(positive.begin(), positive.end(), 1)}, {"ic_residual", ic.worst},
               {"budget_slack", res.budget_slack}, {"surplus", res.surplus}};
}

void trade(SuiteReport& r) {
  constexpr int kM = 50;
  const std::vector<double> uniform(kM, 1.0 / kM);
  const auto s = TradeScenario::total_surplus({0, 1}, {0, 1}, uniform, uniform);
  const TradeSolution sol = solve_interim_efficient(s);
  const auto lagrangian = oracle::uniform_trade_lagrangian_thresholds(kM);
  int worst_closed = 0, worst_oracle = 0;
  for (int j = 0; j < kM; ++j) {
    int first = kM;
    for (int i = kM; i-- > 0;)
      if (sol.p.at({i, j}) > 0.5) first = i;
    // first value cell whose centre clears c + 1/4, c at the cost cell centre
    const int closed = std::min(kM, static_cast<int>(std::ceil(j + 0.25 * kM - 1e-9)));
    worst_closed = std::max(worst_closed, std::abs(first - closed));
    worst_oracle = std::max(worst_oracle, std::abs(first - lagrangian[j]));
  }
  r.expect(worst_closed <= 1, "uniform trade region differs from v >= c + 1/4 by " + std::to_string(worst_closed) + " cells");
  r.expect(worst_oracle <= 1, "uniform trade region differs from the Lagrangian oracle by " + std::to_string(worst_oracle) + " cells");
  r.expect(std::abs(sol.pi - (sol.z + sol.seller_top_utility)) <= 1e-9, "budget identity fails");
  r.expect(std::abs(sol.z) <= 1e-9, "lowest buyer keeps positive utility");

  // Random instances: one fractional level on one box.
  auto rng = make_rng(r.seed(), 8);
  constexpr int kRandom = 20;
  int pooled = 0;
  for (int t = 0; t < kRandom; ++t) {
    const int m = t == 0 ? 50 : 15;
    const std::uint64_t seed = rng();
    const auto tag = [&] { return "instance " + std::to_string(t) + " seed " + std::to_string(seed); };
    const TradeSolution ts = solve_interim_efficient(TradeScenario::random_instance(m, m, seed));
    std::vector<double> frac;
    for (double v : ts.p.values())
      if (v > 0.0 && v < 1.0) frac.push_back(v);
    const auto levels = distinct_values(frac, 0.0);
    r.expect_lazy(levels.size() <= 1, [&] { return tag() + ": " + std::to_string(levels.size()) + " fractional levels"; });
    r.expect_lazy(ts.p.data() == ts.mechanism.simulate(m).data(),
                  [&] { return tag() + ": mechanism does not reproduce the trade rule"; });
    try {
      const MarkupPooling mp = extract_markup_pooling(ts.p);
      pooled += mp.pooled();
      bool box = true;
      for (std::size_t x = 0; x < ts.p.size(); ++x) {
        if (!(ts.p[x] > 0.0 && ts.p[x] < 1.0)) continue;
        const int j = ts.p.shape().coord(x, 1);
        box = box && j >= mp.pool_first && j <= mp.pool_last;
      }
      r.expect_lazy(box, [&] { return tag() + ": fractional cells outside the pooled cost interval"; });
    } catch (const NotMarkupPooling& e) {
      r.expect(false, tag() + ": " + e.what());
    }
  }
  r.metrics = {{"uniform_cells", kM}, {"closed_form_max_cell_error", worst_closed},
               {"oracle_max_cell_error", worst_oracle}, {"random_instances", kRandom},
               {"pooled_instances", pooled}};
}

void rfauction(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kPairs = 300, kCells = 6;
  int feasible = 0, infeasible = 0, agree = 0;
  for (int t = 0; t < kPairs; ++t) {
    std::vector<double> q1(kCells), q2(kCells);
    const double s1 = u(rng), s2 = u(rng);
    for (int k = 0; k < kCells; ++k) {
      if (t % 3 == 0) {
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
    const std::string tag = "pair " + std::to_string(t);
    const bool truth = oracle::reduced_form_feasible(q1, q2);
    const ReducedFormReport rep = check_reduced_form(f1, f2);
    agree += rep.feasible == truth;
    r.expect_lazy(rep.feasible == truth, [&] { return tag + ": majorization verdict differs from max-flow"; });
    if (!truth) {
      ++infeasible;
      continue;
    }
    ++feasible;
    check_implementation(r, tag, construct_implementation(f1, f2), f1, f2);
  }
  r.expect(feasible >= 50 && infeasible >= 50, "both verdicts need at least 50 pairs");

  // Second price with reserve cell rho: bidder 1 wins ties.
  {
    constexpr int m = 10, rho = 3;
    std::vector<double> a(m, 0.0), b(m, 0.0);
    for (int k = rho; k < m; ++k) {
      a[k] = (k + 1.0) / m;
      b[k] = static_cast<double>(k) / m;
    }
    const StepFunction1D q1(a), q2(b);
    const auto ext = extreme_reduced_form_check(q1, q2);
    r.expect(ext.extreme && std::abs(ext.k1 - 0.3) <= 1e-12 && std::abs(ext.k2 - 0.3) <= 1e-12,
             "second price with reserve: thresholds not recovered");
    const auto impl = construct_implementation(q1, q2);
    bool exact = impl.closed_form;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        exact = exact && impl.p1.at({i, j}) == (i >= std::max(rho, j) ? 1.0 : 0.0) &&
                impl.p2.at({i, j}) == (j >= rho && i < j ? 1.0 : 0.0);
    r.expect(exact, "second price with reserve: allocation rule not reconstructed");
    check_implementation(r, "second price", impl, q1, q2);
  }
  // Offer bidder 1 at alpha/m, then bidder 2 at beta/m.
  {
    constexpr int m = 10, alpha = 4, beta = 6;
    std::vector<double> a(m, 0.0), b(m, 0.0);
    for (int k = alpha; k < m; ++k) a[k] = 1.0;
    for (int k = beta; k < m; ++k) b[k] = static_cast<double>(alpha) / m;
    const StepFunction1D q1(a), q2(b);
    const auto ext = extreme_reduced_form_check(q1, q2);
    r.expect(ext.extreme && std::abs(ext.k1 - 0.4) <= 1e-12 && std::abs(ext.k2 - 0.6) <= 1e-12,
             "posted prices: thresholds not recovered");
    const auto impl = construct_implementation(q1, q2);
    bool exact = impl.closed_form;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        exact = exact && impl.p1.at({i, j}) == (i >= alpha ? 1.0 : 0.0) &&
                impl.p2.at({i, j}) == (i < alpha && j >= beta ? 1.0 : 0.0);
    r.expect(exact, "posted prices: allocation rule not reconstructed");
    check_implementation(r, "posted prices", impl, q1, q2);
  }

  // Investment with b = 0.4 on 30 cells.
  constexpr int kInvestCells = 30;
  const auto g = QuantileTransform::uniform(0.0, 1.0);
  const InvestmentSpec spec{0.4};
  const auto psi = quantile_virtual_values(g, kInvestCells);
  const auto inv = solve_investment_auction(spec, g, kInvestCells, {64, 8, r.seed()});
  const auto sym = best_symmetric_reserve(spec, psi);
  r.expect(inv.objective > sym.objective + 1e-6,
           "investment optimum " + fmt(inv.objective) + " does not beat the symmetric " + fmt(sym.objective));
  r.expect(inv.q1.values() != inv.q2.values(), "investment optimum is symmetric");
  r.expect(inv.structure.extreme, "investment optimum is not an extreme reduced form");
  r.expect(std::abs(investment_revenue(spec, psi, inv.q1, inv.q2) - inv.objective) <= 1e-12,
           "reported investment objective does not match its reduced form");
  check_implementation(r, "investment", inv.implementation, inv.q1, inv.q2);

  r.metrics = {{"pairs", kPairs}, {"agree", agree}, {"feasible", feasible}, {"infeasible", infeasible},
               {"investment_objective", inv.objective}, {"symmetric_objective", sym.objective},
               {"symmetric_reserve_cell", sym.reserve_cell}, {"probes", inv.probes}};
}

void ppi(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double kPrior = 0.3, kTol = 1e-9;
  int solved = 0, pooled_checked = 0;
  for (const Shape& shape : {Shape({8, 8}), Shape({10, 10}), Shape({5, 5, 5})}) {
    for (int t = 0; t < 10; ++t) {
      const std::string tag = shape.to_string() + " trial " + std::to_string(t);
      std::vector<std::vector<double>> w(shape.rank());
      for (int a = 0; a < shape.rank(); ++a) {
        w[a].resize(shape.dim(a));
        for (double& x : w[a]) x = u(rng);
      }
      const auto res = solve_ppi_linear(shape, w, kPrior);
      ++solved;
      const GridFunction f = res.signal.signal();
      const auto levels = distinct_values(f.values(), kTol);
      bool shape_ok = res.signal.a1.subset_of(res.signal.a2) && res.signal.lambda >= 0.0 && res.signal.lambda <= 1.0;
      for (double v : levels)
        shape_ok = shape_ok && (std::abs(v) <= kTol || std::abs(v - 1.0) <= kTol ||
                                std::abs(v - res.signal.lambda) <= kTol);
      r.expect_lazy(shape_ok, [&] { return tag + ": optimum is not a nested bi-upset"; });
      r.expect_lazy(std::abs(f.mean() - kPrior) <= kTol, [&] { return tag + ": mean " + fmt(f.mean()); });
      if (shape.rank() != 2) continue;
      try {
        const auto pool = pooling_implementation(res.signal);
        const auto want = marginals(f), got = marginals(pool.pooled);
        double err = 0.0;
        for (int a = 0; a < 2; ++a)
          for (std::size_t k = 0; k < want[a].size(); ++k) err = std::max(err, std::abs(want[a][k] - got[a][k]));
        r.expect_lazy(err <= kTol, [&] { return tag + ": pooling changes beliefs by " + fmt(err); });
        ++pooled_checked;
      } catch (const NotRectangle& e) {
        r.expect(false, tag + ": " + e.what());
      }
    }
  }

  constexpr int kM = 20;
  nlohmann::json threshold = nlohmann::json::array();
  for (double t : {0.45, 0.6, 0.8}) {
    const ThresholdObjective obj{{t}, {1.0}};
    const auto res = solve_ppi_threshold(Shape({kM}), obj, kPrior, {64, r.seed()});
    r.expect(std::abs(res.objective - kPrior / t) <= 1.0 / kM,
             "threshold " + fmt(t) + ": value " + fmt(res.objective) + ", expected " + fmt(kPrior / t));
    r.expect(std::abs(res.signal.signal().mean() - kPrior) <= kTol, "threshold " + fmt(t) + ": mean off the prior");
    threshold.push_back({{"t", t}, {"value", res.objective}, {"target", kPrior / t}});
  }
  r.metrics = {{"linear_instances", solved}, {"pooling_round_trips", pooled_checked}, {"threshold", threshold}};
}

}  // namespace monoext::suite_detail
