#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "monoext/solver.hpp"

namespace monoext {

LinearConstraint LinearConstraint::from_dense(std::span<const double> coeffs, Relation relation, double rhs) {
  LinearConstraint c;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0) c.terms.emplace_back(j, coeffs[j]);
  }
  c.relation = relation;
  c.rhs = rhs;
  return c;
}

double LinearConstraint::activity(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [j, a] : terms) s += a * x[j];
  return s;
}

LpProblem LpProblem::over_grid(const Shape& grid, bool monotone) {
  LpProblem p;
  p.grid = grid;
  p.include_monotonicity = monotone;
  p.objective.assign(grid.size(), 0.0);
  p.lower.assign(grid.size(), 0.0);
  p.upper.assign(grid.size(), 1.0);
  return p;
}

LpProblem LpProblem::with_variables(std::size_t count, double lo, double hi) {
  LpProblem p;
  p.objective.assign(count, 0.0);
  p.lower.assign(count, lo);
  p.upper.assign(count, hi);
  return p;
}

std::size_t LpProblem::add_variable(double lo, double hi, double cost) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

std::vector<CoverPair> LpProblem::monotone_rows() const {
  if (!include_monotonicity || grid.size() == 0) return {};
  return cover_pairs(grid);
}

double LpProblem::max_violation(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < num_vars(); ++j) v = std::max({v, lower[j] - x[j], x[j] - upper[j]});
  for (const auto& p : monotone_rows()) v = std::max(v, x[p.lo] - x[p.hi]);
  for (const auto& c : constraints) {
    double a = c.activity(x);
    if (c.relation != Relation::ge) v = std::max(v, a - c.rhs);
    if (c.relation != Relation::le) v = std::max(v, c.rhs - a);
  }
  return v;
}

void LpProblem::dump_csv(const std::string& path) const {
  std::ofstream out(path);
  out.precision(17);
  out << "kind,index,relation,rhs,terms\n";
  for (std::size_t j = 0; j < num_vars(); ++j) {
    out << "var," << j << ",[" << lower[j] << ";" << upper[j] << "]," << objective[j] << ",\n";
  }
  std::size_t r = 0;
  for (const auto& p : monotone_rows()) out << "mono," << r++ << ",le,0," << p.lo << ":1 " << p.hi << ":-1\n";
  r = 0;
  for (const auto& c : constraints) {
    const char* rel = c.relation == Relation::le ? "le" : c.relation == Relation::eq ? "eq" : "ge";
    out << "row," << r++ << "," << rel << "," << c.rhs << ",";
    for (const auto& [j, a] : c.terms) out << j << ":" << a << " ";
    out << "\n";
  }
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
    case LpStatus::iteration_limit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

// `between` marks a nonbasic variable strictly inside its bounds (or free), held at its value.
enum class VarState : unsigned char { basic, at_lower, at_upper, between };

// Dense tableau over the homogeneous system  s_r - a_r . x = 0, where the row
// activity s_r carries the row bounds. Artificial columns are appended for rows
// whose initial activity falls outside its bounds.
class Tableau {
 public:
  Tableau(const LpProblem& p, const SolveOptions& opt) : opt_(opt), n_(p.num_vars()) {
    const auto mono = p.monotone_rows();
    rows_ = mono.size() + p.constraints.size();

    std::vector<std::vector<std::pair<std::size_t, double>>> a(rows_);
    std::vector<double> rlo(rows_), rhi(rows_);
    for (std::size_t r = 0; r < mono.size(); ++r) {
      a[r] = {{mono[r].lo, 1.0}, {mono[r].hi, -1.0}};
      rlo[r] = -kInf;
      rhi[r] = 0.0;
    }
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
      const auto& c = p.constraints[k];
      std::size_t r = mono.size() + k;
      a[r] = c.terms;
      rlo[r] = c.relation == Relation::le ? -kInf : c.rhs;
      rhi[r] = c.relation == Relation::ge ? kInf : c.rhs;
    }

    std::vector<double> x0(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (p.lower[j] > p.upper[j]) throw InvalidArgument("variable bounds cross");
      // Start at zero when allowed: homogeneous problems then need no artificials.
      x0[j] = std::clamp(0.0, p.lower[j], p.upper[j]);
    }
    std::vector<double> act(rows_, 0.0);
    std::vector<int> sigma(rows_, 0);
    std::size_t artificials = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      for (const auto& [j, v] : a[r]) act[r] += v * x0[j];
      if (act[r] < rlo[r] - opt_.feasibility_tol) {
        sigma[r] = 1;  // act - beta > 0 with beta = rlo
        ++artificials;
      } else if (act[r] > rhi[r] + opt_.feasibility_tol) {
        sigma[r] = 1;
        ++artificials;
      }
    }

    cols_ = n_ + rows_ + artificials;
    t_.assign(rows_ * cols_, 0.0);
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, 0.0);
    x_.assign(cols_, 0.0);
    state_.assign(cols_, VarState::at_lower);
    basis_.assign(rows_, 0);
    artificial_begin_ = n_ + rows_;

    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = p.lower[j];
      hi_[j] = p.upper[j];
      x_[j] = x0[j];
      state_[j] = x0[j] == lo_[j] ? VarState::at_lower : x0[j] == hi_[j] ? VarState::at_upper : VarState::between;
    }
    std::size_t next_art = artificial_begin_;
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::size_t s = n_ + r;
      lo_[s] = rlo[r];
      hi_[s] = rhi[r];
      double* row = &t_[r * cols_];
      if (sigma[r] == 0) {
        for (const auto& [j, v] : a[r]) row[j] -= v;
        row[s] = 1.0;
        basis_[r] = s;
        state_[s] = VarState::basic;
        x_[s] = act[r];
      } else {
        double beta = act[r] < rlo[r] ? rlo[r] : rhi[r];
        double sg = act[r] > beta ? 1.0 : -1.0;
        const std::size_t art = next_art++;
        for (const auto& [j, v] : a[r]) row[j] -= sg * v;
        row[s] = sg;
        row[art] = 1.0;
        x_[s] = beta;
        state_[s] = beta == rlo[r] ? VarState::at_lower : VarState::at_upper;
        lo_[art] = 0.0;
        hi_[art] = kInf;
        x_[art] = sg * (act[r] - beta);
        basis_[r] = art;
        state_[art] = VarState::basic;
      }
    }
    max_iter_ = opt_.max_iterations ? opt_.max_iterations : 20 * (rows_ + cols_) + 1000;
  }

  bool has_artificials() const { return cols_ > artificial_begin_; }

  LpStatus run_phase(const std::vector<double>& cost) {
    cost_ = cost;
    compute_reduced_costs();
    perturbations_ = 0;
    for (;;) {
      LpStatus st = iterate();
      if (perturbed_) {
        restore_bounds();
        if (st == LpStatus::optimal) st = dual_cleanup();
      }
      if (st != LpStatus::optimal) return st;
      // Refresh from scratch and confirm nothing improving was hidden by drift.
      refresh_basic_values();
      compute_reduced_costs();
      if (choose_entering(false) < 0) return LpStatus::optimal;
    }
  }

  LpStatus solve_phase_one() {
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = artificial_begin_; j < cols_; ++j) cost[j] = -1.0;
    LpStatus st = run_phase(cost);
    if (st != LpStatus::optimal) return st;
    double worst = 0.0;
    for (std::size_t j = artificial_begin_; j < cols_; ++j) worst = std::max(worst, x_[j]);
    if (worst > opt_.feasibility_tol) return LpStatus::infeasible;
    for (std::size_t j = artificial_begin_; j < cols_; ++j) {
      hi_[j] = 0.0;
      if (state_[j] != VarState::basic) {
        x_[j] = 0.0;
        state_[j] = VarState::at_lower;
      }
    }
    drive_out_artificials();
    return LpStatus::optimal;
  }

  LpStatus solve_phase_two(const std::vector<double>& objective) {
    std::vector<double> cost(cols_, 0.0);
    std::copy(objective.begin(), objective.end(), cost.begin());
    return run_phase(cost);
  }

  std::vector<double> structural() const { return {x_.begin(), x_.begin() + static_cast<long>(n_)}; }
  double reduced_cost(std::size_t j) const { return d_[j]; }
  std::size_t slack_column(std::size_t r) const { return n_ + r; }
  std::size_t iterations() const { return iterations_; }

 private:
  double& at(std::size_t r, std::size_t c) { return t_[r * cols_ + c]; }

  void compute_reduced_costs() {
    d_ = cost_;
    for (std::size_t r = 0; r < rows_; ++r) {
      double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &t_[r * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t r = 0; r < rows_; ++r) d_[basis_[r]] = 0.0;
  }

  void refresh_basic_values() {
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* row = &t_[r * cols_];
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] != VarState::basic && x_[j] != 0.0 && row[j] != 0.0) s -= row[j] * x_[j];
      }
      x_[basis_[r]] = s;
    }
  }

  bool can_increase(std::size_t j) const {
    return (state_[j] == VarState::at_lower || state_[j] == VarState::between) && hi_[j] > x_[j];
  }
  bool can_decrease(std::size_t j) const {
    return (state_[j] == VarState::at_upper || state_[j] == VarState::between) && x_[j] > lo_[j];
  }

  // Largest improving reduced cost with ties to the lowest index; under
  // Bland's rule the lowest improving index.
  long choose_entering(bool bland) const {
    long q = -1;
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] == VarState::basic) continue;
      double score = 0.0;
      if (d_[j] > opt_.optimality_tol && can_increase(j)) score = d_[j];
      else if (d_[j] < -opt_.optimality_tol && can_decrease(j)) score = -d_[j];
      if (score <= 0.0) continue;
      if (bland) return static_cast<long>(j);
      if (score > best) {
        best = score;
        q = static_cast<long>(j);
      }
    }
    return q;
  }

  LpStatus iterate() {
    std::size_t degenerate_run = 0;
    bool bland = false;
    for (;;) {
      if (iterations_ >= max_iter_) return LpStatus::iteration_limit;
      long qi = choose_entering(bland);
      if (qi < 0) return LpStatus::optimal;
      const std::size_t q = static_cast<std::size_t>(qi);
      const double dir = d_[q] > 0.0 ? 1.0 : -1.0;

      // Minimum ratio test; near-ties go to the larger pivot, or under Bland's
      // rule to the lowest basic index.
      const double flip = dir > 0 ? hi_[q] - x_[q] : x_[q] - lo_[q];  // may be inf
      double theta = flip;
      long leave = -1;
      double leave_alpha = 0.0;
      bool leave_to_upper = false;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double alpha = t_[r * cols_ + q];
        if (std::abs(alpha) <= opt_.pivot_tol) continue;
        const double rate = -alpha * dir;
        const std::size_t b = basis_[r];
        double lim;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[b])) continue;
          lim = std::max(0.0, (x_[b] - lo_[b]) / -rate);
          to_upper = false;
        } else {
          if (!std::isfinite(hi_[b])) continue;
          lim = std::max(0.0, (hi_[b] - x_[b]) / rate);
          to_upper = true;
        }
        const double tie = 1e-12 * std::max(1.0, theta);
        bool take;
        if (lim < theta - tie) take = true;
        else if (lim > theta + tie || leave < 0) take = leave < 0 && lim <= theta;
        else if (bland) take = b < basis_[static_cast<std::size_t>(leave)];
        else take = std::abs(alpha) > std::abs(leave_alpha);
        if (take) {
          theta = lim;
          leave = static_cast<long>(r);
          leave_alpha = alpha;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::unbounded;
      ++iterations_;

      const double step = dir * theta;
      bool snapped = false;
      if (theta > 0.0) {
        for (std::size_t r = 0; r < rows_; ++r) {
          const double alpha = t_[r * cols_ + q];
          if (alpha != 0.0) x_[basis_[r]] -= alpha * step;
        }
      }
      if (leave < 0) {
        x_[q] = dir > 0 ? hi_[q] : lo_[q];
        state_[q] = dir > 0 ? VarState::at_upper : VarState::at_lower;
      } else {
        const std::size_t p = static_cast<std::size_t>(leave);
        const std::size_t b = basis_[p];
        x_[q] += step;
        const double bound = leave_to_upper ? hi_[b] : lo_[b];
        snapped = std::abs(x_[b] - bound) > 1e-12;
        x_[b] = bound;
        state_[b] = leave_to_upper && hi_[b] != lo_[b] ? VarState::at_upper : VarState::at_lower;
        pivot(p, q);
        basis_[p] = q;
        state_[q] = VarState::basic;
      }

      if (theta <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_switch) {
          if (!perturbed_ && perturbations_ < 3) {
            perturb_bounds();
            degenerate_run = 0;
          } else {
            bland = true;
          }
        }
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (snapped || iterations_ % 2000 == 0) refresh_basic_values();
    }
  }

  // Moves the bounds of basic variables sitting on them outward by a random
  // amount, so the current vertex becomes nondegenerate.
  void perturb_bounds() {
    saved_lo_ = lo_;
    saved_hi_ = hi_;
    perturbed_ = true;
    ++perturbations_;
    std::uniform_real_distribution<double> u(1.0, 2.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::size_t b = basis_[r];
      if (b >= artificial_begin_) continue;
      if (std::isfinite(lo_[b]) && x_[b] - lo_[b] <= opt_.feasibility_tol)
        lo_[b] -= kPerturbation * u(rng_) * (1.0 + std::abs(lo_[b]));
      if (std::isfinite(hi_[b]) && hi_[b] - x_[b] <= opt_.feasibility_tol)
        hi_[b] += kPerturbation * u(rng_) * (1.0 + std::abs(hi_[b]));
    }
  }

  void restore_bounds() {
    lo_ = saved_lo_;
    hi_ = saved_hi_;
    perturbed_ = false;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] == VarState::at_lower) x_[j] = lo_[j];
      else if (state_[j] == VarState::at_upper) x_[j] = hi_[j];
    }
    refresh_basic_values();
  }

  // Bounded dual simplex from a dual feasible basis: repairs the small primal
  // infeasibilities left after removing a bound perturbation.
  LpStatus dual_cleanup() {
    for (;;) {
      long r = -1;
      double worst = opt_.feasibility_tol;
      for (std::size_t k = 0; k < rows_; ++k) {
        const std::size_t b = basis_[k];
        const double v = std::max(lo_[b] - x_[b], x_[b] - hi_[b]);
        if (v > worst) {
          worst = v;
          r = static_cast<long>(k);
        }
      }
      if (r < 0) return LpStatus::optimal;
      if (iterations_ >= max_iter_) return LpStatus::iteration_limit;
      const std::size_t row = static_cast<std::size_t>(r);
      const std::size_t b = basis_[row];
      const bool up = x_[b] < lo_[b];
      const double target = up ? lo_[b] : hi_[b];
      const double* t = &t_[row * cols_];
      long q = -1;
      double best = kInf, best_alpha = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] == VarState::basic || std::abs(t[j]) <= opt_.pivot_tol) continue;
        // x_b changes by -t[j] per unit of x_j
        const bool increase = (up ? -t[j] : t[j]) > 0.0;
        if (increase ? !can_increase(j) : !can_decrease(j)) continue;
        const double ratio = std::abs(d_[j]) / std::abs(t[j]);
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && std::abs(t[j]) > std::abs(best_alpha))) {
          best = ratio;
          best_alpha = t[j];
          q = static_cast<long>(j);
        }
      }
      if (q < 0) return LpStatus::infeasible;
      const std::size_t j = static_cast<std::size_t>(q);
      const double dx = -(target - x_[b]) / t[j];
      for (std::size_t k = 0; k < rows_; ++k) {
        const double a = t_[k * cols_ + j];
        if (a != 0.0) x_[basis_[k]] -= a * dx;
      }
      x_[j] += dx;
      x_[b] = target;
      state_[b] = up || lo_[b] == hi_[b] ? VarState::at_lower : VarState::at_upper;
      pivot(row, j);
      basis_[row] = j;
      state_[j] = VarState::basic;
      ++iterations_;
    }
  }

  void pivot(std::size_t p, std::size_t q) {
    double* prow = &t_[p * cols_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == p) continue;
      double* row = &t_[r * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) {
        double v = row[j] - f * prow[j];
        row[j] = std::abs(v) < 1e-14 ? 0.0 : v;
      }
      row[q] = 0.0;
    }
    const double f = d_[q];
    if (f != 0.0) {
      for (std::size_t j : nz_) d_[j] -= f * prow[j];
    }
    d_[q] = 0.0;
  }

  // Basic artificials at zero are swapped for any structural or slack column
  // with a usable entry in their row; rows without one are redundant.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < artificial_begin_) continue;
      const double* row = &t_[r * cols_];
      std::size_t best = cols_;
      double mag = opt_.pivot_tol * 100;
      for (std::size_t j = 0; j < artificial_begin_; ++j) {
        if (state_[j] != VarState::basic && std::abs(row[j]) > mag) {
          mag = std::abs(row[j]);
          best = j;
        }
      }
      if (best == cols_) continue;
      const std::size_t b = basis_[r];
      x_[b] = 0.0;
      state_[b] = VarState::at_lower;
      d_.assign(cols_, 0.0);
      pivot(r, best);
      basis_[r] = best;
      state_[best] = VarState::basic;
    }
    refresh_basic_values();
  }

  SolveOptions opt_;
  std::size_t n_ = 0, rows_ = 0, cols_ = 0, artificial_begin_ = 0;
  std::vector<double> t_, lo_, hi_, x_, cost_, d_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
  std::size_t iterations_ = 0, max_iter_ = 0;
  static constexpr double kPerturbation = 1e-7;
  bool perturbed_ = false;
  int perturbations_ = 0;
  std::vector<double> saved_lo_, saved_hi_;
  std::mt19937_64 rng_{0x5eed};
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const SolveOptions& options) {
  const std::size_t n = problem.num_vars();
  if (problem.lower.size() != n || problem.upper.size() != n) throw LengthMismatch("bounds and objective differ in length");
  if (problem.grid.size() > n) throw LengthMismatch("grid block larger than the variable count");
  for (const auto& c : problem.constraints) {
    for (const auto& [j, a] : c.terms) {
      if (j >= n) throw LengthMismatch("constraint refers to a missing variable");
    }
  }
  if (!options.dump_path.empty()) problem.dump_csv(options.dump_path);

  Tableau tab(problem, options);
  LpSolution sol;
  if (tab.has_artificials()) {
    LpStatus st = tab.solve_phase_one();
    if (st != LpStatus::optimal) {
      sol.status = st == LpStatus::unbounded ? LpStatus::infeasible : st;
      sol.iterations = tab.iterations();
      return sol;
    }
  }
  sol.status = tab.solve_phase_two(problem.objective);
  sol.iterations = tab.iterations();
  sol.x = tab.structural();
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];
  const std::size_t rows = problem.monotone_rows().size() + problem.constraints.size();
  sol.row_duals.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) sol.row_duals[r] = tab.reduced_cost(tab.slack_column(r));
  sol.reduced_costs.resize(n);
  for (std::size_t j = 0; j < n; ++j) sol.reduced_costs[j] = tab.reduced_cost(j);
  return sol;
}

DualityCheck check_duality(const LpProblem& p, const LpSolution& s) {
  DualityCheck out;
  const std::size_t n = p.num_vars();
  const auto mono = p.monotone_rows();
  // Recompute reduced costs from the original data.
  std::vector<double> d(p.objective);
  std::vector<double> act;
  for (std::size_t r = 0; r < mono.size(); ++r) {
    d[mono[r].lo] -= s.row_duals[r];
    d[mono[r].hi] += s.row_duals[r];
  }
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    for (const auto& [j, a] : p.constraints[k].terms) d[j] -= s.row_duals[mono.size() + k] * a;
  }
  double bound = 0.0;
  auto term = [&](double dual, double lo, double hi) {
    if (dual > 0.0) {
      if (!std::isfinite(hi)) out.dual_infeasibility = std::max(out.dual_infeasibility, dual);
      else bound += dual * hi;
    } else if (dual < 0.0) {
      if (!std::isfinite(lo)) out.dual_infeasibility = std::max(out.dual_infeasibility, -dual);
      else bound += dual * lo;
    }
  };
  for (std::size_t r = 0; r < mono.size(); ++r) term(s.row_duals[r], -kInf, 0.0);
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& c = p.constraints[k];
    term(s.row_duals[mono.size() + k], c.relation == Relation::le ? -kInf : c.rhs,
         c.relation == Relation::ge ? kInf : c.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) term(d[j], p.lower[j], p.upper[j]);
  out.gap = bound - s.objective;
  return out;
}

}  // namespace monoext
