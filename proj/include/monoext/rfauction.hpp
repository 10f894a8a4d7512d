#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

namespace monoext {

// Two-bidder interim allocations. All checks work on the quantile-space step
// functions qt_i(s) = q_i(G_i^{-1}(s)) over equal-mass cells.
struct ReducedForm {
  std::vector<double> q1, q2;  // per value cell over each bidder's support
  QuantileTransform g1, g2;

  // Samples q_i at G_i^{-1} of each quantile cell centre; exact when every
  // quantile cell falls inside a single value cell.
  StepFunction1D quantile(int bidder, int cells) const;
};

// Integral over [x, 1] of q^{-1}(y) = inf{s : q(s) > y}: mean_j (1 - max(x, q_j)).
double inverse_tail(const StepFunction1D& q, double x);

struct ReducedFormReport {
  bool feasible = false;          // qt1 weakly majorized by qt2^{-1}
  bool feasible_swapped = false;  // qt2 weakly majorized by qt1^{-1}
  double min_gap = 0.0;           // min over breakpoints of tail(qt2^{-1}) - tail(qt1)
};
// Throws TheoremViolation if the two orderings disagree.
ReducedFormReport check_reduced_form(const StepFunction1D& qt1, const StepFunction1D& qt2, double tol = 1e-9);

struct AuctionImplementation {
  GridFunction p1, p2;  // over (x1, x2) quantile cells
  bool closed_form = false;
  double residual = 0.0;  // largest marginal mismatch
};
// Closed form for extreme pairs, transport LP otherwise. Throws Infeasible.
AuctionImplementation construct_implementation(const StepFunction1D& qt1, const StepFunction1D& qt2);

struct ExtremeReducedForm {
  bool extreme = false;
  double k1 = 1.0, k2 = 1.0;
};
// qt1 == 1{s >= k1} qt2^{-1}(s) and qt2 == 1{s >= k2} qt1^{-1}(s) as functions.
ExtremeReducedForm extreme_reduced_form_check(const StepFunction1D& qt1, const StepFunction1D& qt2, double tol = 1e-9);

// Feasible reduced forms over (p1, p2) with both interim rules nondecreasing;
// the objective is sum_i mean_k c_i[k] qt_i[k].
LpProblem reduced_form_lp(int m1, int m2, const std::vector<double>& c1, const std::vector<double>& c2);

// Quadratic investment cost b a^2 / 2, so w(q) = q^2 / (2b).
struct InvestmentSpec {
  double b = 1.0;  // infinite b drops the investment term
  double w(double q) const { return std::isinf(b) ? 0.0 : q * q / (2.0 * b); }
  double dw(double q) const { return std::isinf(b) ? 0.0 : q / b; }
};

// Virtual values psi = s - (1 - G)/g at quantile cell centres.
std::vector<double> quantile_virtual_values(const QuantileTransform& g, int cells);
double investment_revenue(const InvestmentSpec& spec, const std::vector<double>& psi, const StepFunction1D& qt1,
                          const StepFunction1D& qt2);

struct InvestmentResult {
  StepFunction1D q1, q2;
  AuctionImplementation implementation;
  double objective = 0.0;
  std::size_t probes = 0;
  ExtremeReducedForm structure;
};
struct ProbeOptions {
  std::size_t budget = 64;
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
};
// Linearize at the incumbent, solve the LP, repeat while the revenue improves
// by more than 1e-9. Inexact: convex maximization has no certificate here.
InvestmentResult solve_investment_auction(const InvestmentSpec& spec, const QuantileTransform& g, int cells,
                                          const ProbeOptions& opt = {});

struct SymmetricBenchmark {
  int reserve_cell = 0;
  double objective = 0.0;
};
// Efficient auction with ties split and a reserve at each cell boundary.
SymmetricBenchmark best_symmetric_reserve(const InvestmentSpec& spec, const std::vector<double>& psi);

}  // namespace monoext
