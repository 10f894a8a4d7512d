#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

namespace monoext {

// Bilateral trade with independent private values. Types are binned into
// equal-width cells; within a cell the density is uniform, so interim utilities
// are piecewise linear and the envelope formulas hold exactly on the grid.
// Trade rules p live on Shape{value_cells, cost_cells}, axis 0 = v, axis 1 = c.
struct TradeScenario {
  Interval v_domain{0.0, 1.0};
  Interval c_domain{0.0, 1.0};
  std::vector<double> g_b, g_s;            // type cell masses, positive, sum 1
  std::vector<double> weight_b, weight_s;  // welfare weight cell masses, nonnegative

  int value_cells() const { return static_cast<int>(g_b.size()); }
  int cost_cells() const { return static_cast<int>(g_s.size()); }
  Shape shape() const { return Shape({value_cells(), cost_cells()}); }
  void validate() const;

  // Cell averages of v - (1 - G_B)/g_B and c + G_S/g_S.
  std::vector<double> marginal_revenue() const;
  std::vector<double> marginal_cost() const;
  // Lambda_B([lower edge of cell i, vbar]) and Lambda_S([cbar lower end, upper edge of cell j]).
  std::vector<double> buyer_weight_tail() const;
  std::vector<double> seller_weight_head() const;

  static TradeScenario from_distributions(Interval v_domain, Interval c_domain, int value_cells, int cost_cells,
                                          const QuantileTransform& g_b, const QuantileTransform& g_s,
                                          std::vector<double> weight_b, std::vector<double> weight_s);
  // Welfare weights equal to the type masses: maximizes expected gains from trade.
  static TradeScenario total_surplus(Interval v_domain, Interval c_domain, std::vector<double> g_b,
                                     std::vector<double> g_s);
  // i.i.d. uniform cell masses, renormalized, for both densities and both weights.
  static TradeScenario random_instance(int value_cells, int cost_cells, std::uint64_t seed);
};

// Trade iff the value cell index is >= phi[j]; phi[j] == value_cells means no
// trade. For costs in the pooling cells [pool_first, pool_last] the cost is
// resampled: with probability k the markup is phi_low, otherwise phi_high.
struct MarkupPooling {
  std::vector<int> phi;
  int pool_first = 0, pool_last = -1;
  int phi_low = 0, phi_high = 0;
  double k = 1.0;

  bool pooled() const { return pool_first <= pool_last; }
  GridFunction simulate(int value_cells) const;
};

struct TradeSolution {
  GridFunction p;
  std::vector<double> q1;  // nondecreasing in v
  std::vector<double> q2;  // nonincreasing in c
  double z = 0.0;                   // U_B at the lowest value
  double seller_top_utility = 0.0;  // U_S at the highest cost
  double pi = 0.0;                  // expected virtual surplus
  double welfare = 0.0;
  MarkupPooling mechanism;
  std::vector<double> buyer_utility;   // U_B at the value cell edges (cells + 1 entries)
  std::vector<double> seller_utility;  // U_S at the cost cell edges
  std::size_t lp_iterations = 0;
};

LpProblem interim_efficient_lp(const TradeScenario& s);
// Throws Infeasible when the LP fails and StructureViolation when the optimum is
// not markup-pooling even after a tiny random objective perturbation.
TradeSolution solve_interim_efficient(const TradeScenario& s, const SolveOptions& opt = {});

// Reverses the cost axis so that monotone trade rules become nondecreasing on
// both axes.
GridFunction flip_cost_axis(const GridFunction& p);

// Values within tol of 0 or 1 are snapped; the remaining values must share one
// level (up to 1e-7) on a single box. Throws NotMarkupPooling.
MarkupPooling extract_markup_pooling(const GridFunction& p, double tol = 1e-9);

// Uniqueness of p among monotone trade rules with the same type-weighted
// interim marginals.
UniquenessReport unique_among_monotone_trade_rules(const GridFunction& p, const TradeScenario& s);

struct DicReport {
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::vector<std::string> failures;  // "trial <t> seed <s>: <reason>"
  bool ok() const { return passed == trials; }
};
// Redraws both welfare weights `trials` times, keeping the densities of s, and
// checks each optimum is markup-pooling and uniquely rationalized.
DicReport verify_dic_vertex_is_markup_pooling(const TradeScenario& s, std::size_t trials, std::uint64_t seed);

}  // namespace monoext
