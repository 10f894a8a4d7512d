#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

namespace monoext {

// Independent signals s_i ~ U[0,1] on a grid of equal cells; f(s) is the
// probability of state 1 and q_i the belief quantile of receiver i.

// q is feasible iff it is rationalizable and q_1 integrates to the prior.
bool check_feasible_beliefs(const std::vector<StepFunction1D>& q, double prior);

// f = 1 on a1, lambda on a2 \ a1, 0 elsewhere, with a1 inside a2.
struct BiUpsetSignal {
  UpSet a1, a2;
  double lambda = 1.0;

  // lambda solved in closed form from the cell counts so that mean(f) = prior.
  // Throws InvalidArgument when the sets are not nested or no lambda in [0,1]
  // matches the prior.
  static BiUpsetSignal with_prior(UpSet a1, UpSet a2, double prior);

  GridFunction signal() const;
  std::vector<StepFunction1D> beliefs() const;
};

struct PpiLinearResult {
  BiUpsetSignal signal;
  std::vector<StepFunction1D> beliefs;
  double objective = 0.0;  // sum_i mean_k w_i[k] q_i[k]
  bool symmetric = false;  // solved under the exchangeability restriction
};
// Maximizes sum_i mean_k w_i[k] q_i[k] over monotone f with mean(f) = prior.
// Identical weights on a cubic grid add the exchangeability rows. Throws
// StructureViolation when the vertex is not a bi-upset even after a tiny
// random tiebreak.
PpiLinearResult solve_ppi_linear(const Shape& shape, const std::vector<std::vector<double>>& weights, double prior);

// Pooled signals on one axis: the up-set A* (fractional cells where its
// boundary cuts through) plus an interval of axis-1 cells merged into one signal.
struct PoolingImplementation {
  std::vector<double> boundary;  // g*(i), in axis-1 cell units, per axis-0 cell
  GridFunction base;             // cell averages of 1_{A*}
  int pooled_axis = 1;
  int pool_first = 0, pool_last = -1;  // axis-1 cells merged into one signal
  Interval pool{0.0, 0.0};
  GridFunction pooled;  // the A* signal after pooling

  bool empty() const { return pool_first > pool_last; }
};
// Two axes only. Throws NotRectangle when a2 \ a1 is not a box.
PoolingImplementation pooling_implementation(const BiUpsetSignal& sig);

// Receiver i counts when its belief is at least thresholds[i] (ties count).
struct ThresholdObjective {
  std::vector<double> thresholds;
  std::vector<double> weights;
  double evaluate(const std::vector<StepFunction1D>& beliefs) const;
};

struct PpiProbe {
  std::string direction;
  double objective = 0.0;
};
struct PpiThresholdResult {
  BiUpsetSignal signal;
  std::vector<StepFunction1D> beliefs;
  double objective = 0.0;
  std::vector<PpiProbe> log;
};
struct PpiProbeOptions {
  std::size_t budget = 64;
  std::uint64_t seed = 0;
};
// Linear probes: per receiver either a step reward on the top cells (started at
// the single-receiver optimum floor(prior m / t) and its neighbours) or
// nothing, each with a small downward tilt; then seeded random profiles. The
// objective is quasiconvex, so this is a heuristic without a certificate.
PpiThresholdResult solve_ppi_threshold(const Shape& shape, const ThresholdObjective& obj, double prior,
                                       const PpiProbeOptions& opt = {});

}  // namespace monoext
