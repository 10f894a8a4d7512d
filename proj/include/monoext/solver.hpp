#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monoext/gridfn.hpp"

namespace monoext {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

struct LinearConstraint {
  std::vector<std::pair<std::size_t, double>> terms;
  Relation relation = Relation::le;
  double rhs = 0.0;

  static LinearConstraint from_dense(std::span<const double> coeffs, Relation relation, double rhs);
  double activity(std::span<const double> x) const;
};

// Maximize objective . x subject to box bounds, optional monotonicity of the
// leading grid block (x[lo] <= x[hi] for every cover pair) and affine rows.
struct LpProblem {
  Shape grid;  // may be empty when the problem has no grid block
  bool include_monotonicity = false;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearConstraint> constraints;

  static LpProblem over_grid(const Shape& grid, bool monotone);
  static LpProblem with_variables(std::size_t count, double lo, double hi);

  std::size_t num_vars() const { return objective.size(); }
  std::size_t grid_cells() const { return grid.size(); }
  std::size_t add_variable(double lo, double hi, double cost = 0.0);
  void add_constraint(LinearConstraint c) { constraints.push_back(std::move(c)); }
  std::vector<CoverPair> monotone_rows() const;

  // Largest violation of any bound, monotone row or affine row at x.
  double max_violation(std::span<const double> x) const;
  void dump_csv(const std::string& path) const;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };
const char* to_string(LpStatus s);

struct SolveOptions {
  double pivot_tol = 1e-7;
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-10;
  std::size_t max_iterations = 0;  // 0 picks a size-based limit
  std::size_t degenerate_switch = 64;
  std::string dump_path;  // when set, the problem is written there as CSV
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Dual values for the monotone rows followed by the affine rows, sign
  // convention: reduced cost d_j = c_j - sum_r dual_r * a_rj.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  std::size_t iterations = 0;

  bool optimal() const { return status == LpStatus::optimal; }
};

LpSolution solve_lp(const LpProblem& problem, const SolveOptions& options = {});

// Objective gap between the primal value and the dual bound implied by the
// returned duals, plus the largest dual sign violation.
struct DualityCheck {
  double gap = 0.0;
  double dual_infeasibility = 0.0;
};
DualityCheck check_duality(const LpProblem& problem, const LpSolution& solution);

struct TightSet {
  std::vector<std::size_t> at_bound;  // variables at a box bound
  std::vector<std::size_t> monotone;  // indices into monotone_rows()
  std::vector<std::size_t> constraints;
};
TightSet tight_set(const LpProblem& problem, std::span<const double> x, double tol = 1e-8);

struct VertexReport {
  bool vertex = false;
  std::size_t rank = 0;
  std::size_t degrees_of_freedom = 0;
  // When not a vertex: x +/- perturbation are both feasible.
  std::vector<double> perturbation;
};
VertexReport is_vertex(std::span<const double> x, const LpProblem& problem);

struct UniquenessReport {
  bool unique = false;
  std::size_t degrees_of_freedom = 0;
  std::size_t probes = 0;
  std::optional<std::vector<double>> witness;
};
UniquenessReport is_unique_feasible(std::span<const double> x, const LpProblem& problem);

struct SeparableObjective {
  std::vector<std::vector<double>> profiles;
  std::vector<double> array;
};
// profiles[i][k] ~ U[-1, 1]; array(x) = sum_i profiles[i][x_i] * prod_i w_i(x_i),
// with unit weights when axis_weights is empty.
SeparableObjective random_separable_objective(std::uint64_t seed, const Shape& shape,
                                              std::span<const std::vector<double>> axis_weights = {});

// Row-space dimension test shared by the vertex and uniqueness checks.
std::size_t numeric_rank(const std::vector<std::vector<double>>& rows, std::size_t cols, double threshold = 1e-8);

}  // namespace monoext
