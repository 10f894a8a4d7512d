#pragma once

#include <tuple>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

// Brute-force reference computations. Everything here is assembled from
// scratch (own comparisons, own elimination, own flow network) so that the
// structured code paths can be checked against it.
namespace monoext::oracle {

// All upward-closed subsets of a grid with at most 25 cells, as 0/1 masks.
std::vector<std::vector<char>> enumerate_upsets(const Shape& shape);

// Every vertex of the feasible region of an LP with at most 12 variables.
std::vector<std::vector<double>> brute_force_vertices(const LpProblem& problem);

// Feasibility of {0 <= f <= 1, marginals = q}: max-flow for two axes, a freshly
// assembled LP otherwise.
bool brute_force_rationalizable(const std::vector<std::vector<double>>& q);

// Range of every cell over all functions sharing f's marginals (and
// monotonicity when asked); unique when every range is degenerate. <= 12 cells.
bool brute_force_unique(const GridFunction& f, bool among_monotone);

// Existence of p1, p2 >= 0 with p1 + p2 <= 1 on an m1 x m2 grid and interim
// allocations q1 (over axis 0) and q2 (over axis 1), by max-flow.
bool reduced_form_feasible(const std::vector<double>& q1, const std::vector<double>& q2);

// Uniform buyer and seller on [0,1], total-surplus weights, m x m cells: for
// every cost cell, the first value cell that trades under the pointwise
// Lagrangian (v - c) + lambda (MR(v) - MC(c)) >= 0 at cell centres, with
// lambda found by bisection as the smallest multiplier whose trade region
// balances the budget. m means no trade in that column.
std::vector<int> uniform_trade_lagrangian_thresholds(int m);

// Dinic max-flow on a dense capacity description; exposed for tests.
double max_flow(int nodes, const std::vector<std::tuple<int, int, double>>& edges, int source, int sink);

}  // namespace monoext::oracle
