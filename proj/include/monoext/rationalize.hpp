#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/solver.hpp"

namespace monoext {

// Integral over [x, 1] of the conjugate of q, computed exactly from the values
// of q: mean_j min(q_j, 1 - x).
double conjugate_tail(const StepFunction1D& q, double x);

// Cell averages of qhat(z) = 1 - q^{-1}(1 - z), q^{-1}(y) = inf{x : q(x) > y},
// on a grid of m_out cells (default: the grid of q). On functions whose values
// are multiples of 1/m_out the conjugate is an exact involution.
StepFunction1D conjugate(const StepFunction1D& q, std::size_t m_out = 0);

struct MajorizationReport {
  bool holds = false;
  bool equal_at_zero = false;
  std::vector<double> gaps;  // tail(ghat) - tail(q1) at x = i/m, i = 0..m
  std::vector<std::size_t> binding;
  double min_gap = 0.0;
};
// q1 majorized by ghat: tails of q1 never exceed those of ghat, and when
// weak == false the total masses agree.
MajorizationReport check_majorization(const StepFunction1D& q1, const StepFunction1D& ghat, bool weak = false,
                                      double tol = 1e-9);

struct RationalizabilityReport {
  bool rationalizable = false;
  std::optional<GridFunction> witness;  // filled on the LP path
};
RationalizabilityReport rationalizability(const std::vector<StepFunction1D>& q);
bool is_rationalizable(const std::vector<StepFunction1D>& q);

struct RationalizerOptions {
  std::size_t max_sweeps = 50000;
  double residual_tol = 1e-8;
};
struct RationalizerResult {
  GridFunction f;
  std::size_t sweeps = 0;
  double residual = 0.0;
};
// Minimum-norm f with the given marginals and 0 <= f <= 1, by cyclic Dykstra.
RationalizerResult monotone_rationalizer_run(const std::vector<StepFunction1D>& q, const RationalizerOptions& opt = {});
GridFunction monotone_rationalizer(const std::vector<StepFunction1D>& q);

// Grid LP feasible set {0 <= f <= 1, marginal_a(f) = q_a}, optionally monotone.
LpProblem marginal_polytope(const Shape& shape, const std::vector<std::vector<double>>& q, bool monotone);

UniquenessReport unique_rationalization_check(const GridFunction& f, bool among_monotone);

struct RectangleDecomposition {
  bool valid = false;
  std::string reason;
  UpSet inner;  // {f = 1}
  UpSet outer;  // {f > 0}
  double lambda = 0.0;
  bool has_rectangle = false;
  int lo[2] = {0, 0};  // inclusive cell ranges of the fractional box
  int hi[2] = {-1, -1};
};
RectangleDecomposition detect_rectangle_structure(const GridFunction& f, double tol = 1e-6);

bool extreme_check_joint_majorization(const StepFunction1D& q1, const StepFunction1D& q2);

struct SquareStructure {
  bool empty = true;
  std::size_t first = 0, last = 0;  // cells of the interval (first..last inclusive)
  double z_lo = 0.0, z_hi = 0.0;    // cell boundaries
  double gamma_lo = 0.0, gamma_hi = 0.0;
  double lambda = 0.0;
};
// Throws NotOfForm with the first cell that breaks the structure.
SquareStructure square_majorization_structure(const StepFunction1D& q1, const StepFunction1D& q2, double tol = 1e-9);

struct WeakExtremeReport {
  bool extreme = false;
  std::size_t k_index = 0;
  double k = 0.0;
};
WeakExtremeReport extreme_check_weak_majorization(const StepFunction1D& q1, const StepFunction1D& q2,
                                                  double tol = 1e-9);

// Two rationalizable pairs whose average is (q1, q2), or nothing when the pair
// is extreme.
std::optional<std::pair<std::vector<StepFunction1D>, std::vector<StepFunction1D>>> majorization_perturbation(
    const StepFunction1D& q1, const StepFunction1D& q2);

struct AdditiveCertificate {
  bool additive = false;
  std::vector<std::vector<double>> phi;
  double margin = 0.0;  // min over A minus max over the complement
};
AdditiveCertificate is_additive_set(const UpSet& a);

struct ExposingFunctional {
  std::vector<double> phi1;
  std::vector<double> phi2;
};
// Profiles in unit-interval coordinates: phi1(i) = -g(i)/m2 with g the boundary,
// phi2(j) = j/m2. The sum is >= 0 exactly on A and <= -1/m2 elsewhere.
ExposingFunctional exposing_functional(const UpSet& a);

}  // namespace monoext
