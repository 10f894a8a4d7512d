#pragma once

#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

namespace monoext {

// Ex-post IC/IR provision of a public good under an ex-ante budget constraint.
// Signals live on a grid; values and their own-signal increments are arrays in
// currency units.
struct PublicGoodScenario {
  Shape shape;
  std::vector<Interval> domains;
  std::vector<double> density;             // cell probabilities, sum 1
  std::vector<std::vector<double>> values;  // v_i per agent
  // dv_i(x) = v_i(x + e_i) - v_i(x); zero on the top slice of axis i.
  std::vector<std::vector<double>> increments;
  double cost = 0.0;
  bool symmetric = false;

  int agents() const { return shape.rank(); }
  void validate() const;

  // v_i = s_i + w * sum_{j != i} s_j at cell centres.
  static PublicGoodScenario linear_externality(const Shape& shape, std::vector<Interval> domains,
                                               std::vector<double> density, double w, double cost);
  // Two agents with v_i = max(s_i - s_{-i}, 0) on [0,1]^2; the increments are
  // the exact indicator 1{s_i >= s_{-i}} times the cell width.
  static PublicGoodScenario limited_negative(int cells, std::vector<double> density, double cost);
};

struct TwoThresholdPolicy {
  GridFunction score;  // monotone aggregator
  double k_low = 1.0, k_high = 1.0;
  double p = 0.0;

  // 1 when score >= k_high, p when score >= k_low, else 0.
  GridFunction allocation() const;
};

struct MechanismResult {
  GridFunction allocation;
  std::vector<std::vector<double>> transfers;
  double surplus = 0.0;
  double budget_slack = 0.0;
  TwoThresholdPolicy policy;
  double unrestricted_objective = 0.0;  // LP value before any symmetry restriction
};

// Budget coefficient of each cell: E[sum_i t_i - c alpha] = sum_x alpha(x) b(x).
std::vector<double> budget_coefficients(const PublicGoodScenario& s);
LpProblem public_good_lp(const PublicGoodScenario& s);

MechanismResult solve_public_good(const PublicGoodScenario& s, const SolveOptions& opt = {});

// Envelope transfers t_i = alpha v_i - U_i with U_i(0, s_-i) = 0 and
// U_i(k) = sum_{k' < k} alpha(k') dv_i(k').
std::vector<std::vector<double>> compute_transfers(const GridFunction& alpha, const PublicGoodScenario& s);

struct IcReport {
  bool ok = false;
  double worst = 0.0;  // largest gain from a unilateral misreport
  double worst_ir = 0.0;  // most negative interim utility
};
IcReport verify_expost_ic(const GridFunction& alpha, const std::vector<std::vector<double>>& t,
                          const PublicGoodScenario& s, double tol);

struct HazardReport {
  bool increasing_in_s1 = false;
  bool decreasing_in_s2 = false;
  bool passes() const { return increasing_in_s1 && decreasing_in_s2; }
  std::vector<double> hazard;  // h(s1 | s2) per cell, NaN where the survival mass is zero
};
HazardReport check_hazard_condition(const Shape& shape, const std::vector<double>& density, double tol = 1e-12);

struct RefundMechanism {
  MechanismResult result;
  // alpha = p 1{max(s1, s2) >= k1} + (1 - p) 1{max(s1, s2) >= k2}, prices as
  // signal values at cell lower edges.
  double k1 = 1.0, k2 = 1.0, p = 1.0;
};
RefundMechanism solve_limited_negative_externality(int cells, const std::vector<double>& density, double cost);

// Snaps LP noise and returns the two-threshold form; throws StructureViolation
// when alpha is not a mixture of at most two nested up-sets with top level 1.
TwoThresholdPolicy extract_two_threshold(const GridFunction& alpha);

}  // namespace monoext
