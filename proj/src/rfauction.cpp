#include "monoext/rfauction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace monoext {

namespace {

// Fraction of [lo, hi) covered by [a, b).
double overlap(double lo, double hi, double a, double b) {
  const double f = std::max(0.0, std::min(hi, b) - std::max(lo, a)) / (hi - lo);
  // Edges that agree up to rounding give exact 0/1.
  if (f < 1e-9) return 0.0;
  if (f > 1.0 - 1e-9) return 1.0;
  return f;
}

// min over breakpoints of tail(q_other^{-1}) - tail(q). The difference is
// piecewise linear with kinks at q's cell edges and at the values of q_other.
double majorization_gap(const StepFunction1D& q, const StepFunction1D& other) {
  const std::size_t m = q.size();
  double gap = kInf;
  auto probe = [&](double x) { gap = std::min(gap, inverse_tail(other, x) - q.tail_integral(x)); };
  for (std::size_t i = 0; i <= m; ++i) probe(static_cast<double>(i) / static_cast<double>(m));
  for (double v : other.values()) probe(std::clamp(v, 0.0, 1.0));
  return gap;
}

// 1{x >= k} * #{j : other_j <= x} / |other|, right-continuous.
double truncated_inverse(const StepFunction1D& other, double k, double x, double tol) {
  if (x < k - tol) return 0.0;
  std::size_t count = 0;
  for (double v : other.values()) count += v <= x + tol ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(other.size());
}

// Threshold k with q == 1{s >= k} other^{-1}(s), or NaN.
double truncation_threshold(const StepFunction1D& q, const StepFunction1D& other, double tol) {
  const std::size_t m = q.size();
  const double w = 1.0 / static_cast<double>(m);
  std::size_t first = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (q[i] > tol) {
      first = i;
      break;
    }
  }
  const double k = static_cast<double>(first) * w;
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = static_cast<double>(i) * w, hi = lo + w;
    if (std::abs(truncated_inverse(other, k, lo, tol) - q[i]) > tol) return std::nan("");
    for (double b : other.values()) {
      if (b > lo + tol && b < hi - tol && std::abs(truncated_inverse(other, k, b, tol) - q[i]) > tol)
        return std::nan("");
    }
  }
  // Any k up to the first jump of other^{-1} gives the same function.
  if (first < m && other[0] >= k - tol) return 0.0;
  return k;
}

double marginal_residual(const GridFunction& p1, const GridFunction& p2, const StepFunction1D& q1,
                         const StepFunction1D& q2) {
  const auto mp1 = marginals(p1), mp2 = marginals(p2);
  double r = 0.0;
  for (std::size_t i = 0; i < q1.size(); ++i) r = std::max(r, std::abs(mp1[0][i] - q1[i]));
  for (std::size_t j = 0; j < q2.size(); ++j) r = std::max(r, std::abs(mp2[1][j] - q2[j]));
  return r;
}

bool respects_capacity(const GridFunction& p1, const GridFunction& p2) {
  for (std::size_t c = 0; c < p1.size(); ++c) {
    if (p1[c] < -1e-12 || p2[c] < -1e-12 || p1[c] + p2[c] > 1.0 + 1e-12) return false;
  }
  return true;
}

AuctionImplementation implement_by_lp(const StepFunction1D& q1, const StepFunction1D& q2) {
  const int m1 = static_cast<int>(q1.size()), m2 = static_cast<int>(q2.size());
  const std::size_t n = static_cast<std::size_t>(m1) * static_cast<std::size_t>(m2);
  LpProblem lp = LpProblem::with_variables(2 * n, 0.0, 1.0);
  for (std::size_t c = 0; c < n; ++c) lp.add_constraint({{{c, 1.0}, {n + c, 1.0}}, Relation::le, 1.0});
  for (int i = 0; i < m1; ++i) {
    LinearConstraint row{{}, Relation::eq, m2 * q1[i]};
    for (int j = 0; j < m2; ++j) row.terms.emplace_back(static_cast<std::size_t>(i * m2 + j), 1.0);
    lp.add_constraint(std::move(row));
  }
  for (int j = 0; j < m2; ++j) {
    LinearConstraint row{{}, Relation::eq, m1 * q2[j]};
    for (int i = 0; i < m1; ++i) row.terms.emplace_back(n + static_cast<std::size_t>(i * m2 + j), 1.0);
    lp.add_constraint(std::move(row));
  }
  const LpSolution sol = solve_lp(lp);
  if (!sol.optimal()) throw Infeasible(std::string("implementation LP ended ") + to_string(sol.status));
  std::vector<double> a(n), b(n);
  for (std::size_t c = 0; c < n; ++c) {
    a[c] = std::clamp(sol.x[c], 0.0, 1.0);
    b[c] = std::clamp(sol.x[n + c], 0.0, 1.0 - a[c]);
  }
  const Shape shape({m1, m2});
  AuctionImplementation out{GridFunction(shape, std::move(a)), GridFunction(shape, std::move(b)), false, 0.0};
  out.residual = marginal_residual(out.p1, out.p2, q1, q2);
  if (out.residual > 1e-9) throw Infeasible("implementation LP marginal residual " + std::to_string(out.residual));
  return out;
}

StepFunction1D clean_step(std::vector<double> v) {
  double run = 0.0;
  for (double& x : v) {
    x = std::clamp(x, 0.0, 1.0);
    x = run = std::max(run, x);
  }
  return StepFunction1D(std::move(v));
}

}  // namespace

StepFunction1D ReducedForm::quantile(int bidder, int cells) const {
  const auto& q = bidder == 1 ? q1 : q2;
  const auto& g = bidder == 1 ? g1 : g2;
  if (q.empty()) throw InvalidArgument("empty interim allocation");
  const Interval dom = g.support();
  const int n = static_cast<int>(q.size());
  std::vector<double> out(static_cast<std::size_t>(cells));
  for (int k = 0; k < cells; ++k) {
    const double v = g.inverse((k + 0.5) / cells);
    const int idx = std::clamp(static_cast<int>(std::floor((v - dom.lo) / (dom.hi - dom.lo) * n)), 0, n - 1);
    out[static_cast<std::size_t>(k)] = q[static_cast<std::size_t>(idx)];
  }
  return StepFunction1D(std::move(out), 1e-9);
}

double inverse_tail(const StepFunction1D& q, double x) {
  double s = 0.0;
  for (double v : q.values()) s += 1.0 - std::max(x, v);
  return s / static_cast<double>(q.size());
}

ReducedFormReport check_reduced_form(const StepFunction1D& qt1, const StepFunction1D& qt2, double tol) {
  if (qt1.size() == 0 || qt2.size() == 0) throw InvalidArgument("empty interim allocation");
  const double g12 = majorization_gap(qt1, qt2);
  const double g21 = majorization_gap(qt2, qt1);
  ReducedFormReport r;
  r.feasible = g12 >= -tol;
  r.feasible_swapped = g21 >= -tol;
  r.min_gap = g12;
  if (r.feasible != r.feasible_swapped && std::min(std::abs(g12), std::abs(g21)) > 10 * tol) {
    throw TheoremViolation("majorization orderings disagree: gaps " + std::to_string(g12) + " and " +
                           std::to_string(g21));
  }
  r.feasible = r.feasible_swapped = r.feasible && r.feasible_swapped;
  return r;
}

ExtremeReducedForm extreme_reduced_form_check(const StepFunction1D& qt1, const StepFunction1D& qt2, double tol) {
  ExtremeReducedForm r;
  const double k1 = truncation_threshold(qt1, qt2, tol);
  const double k2 = truncation_threshold(qt2, qt1, tol);
  if (std::isnan(k1) || std::isnan(k2)) return r;
  r.extreme = true;
  r.k1 = k1;
  r.k2 = k2;
  return r;
}

AuctionImplementation construct_implementation(const StepFunction1D& qt1, const StepFunction1D& qt2) {
  if (!check_reduced_form(qt1, qt2).feasible) throw Infeasible("interim allocations fail weak majorization");
  const ExtremeReducedForm ext = extreme_reduced_form_check(qt1, qt2);
  if (ext.extreme) {
    const int m1 = static_cast<int>(qt1.size()), m2 = static_cast<int>(qt2.size());
    const Shape shape({m1, m2});
    std::vector<double> a(shape.size()), b(shape.size());
    for (int i = 0; i < m1; ++i) {
      const double lo = static_cast<double>(i) / m1, hi = static_cast<double>(i + 1) / m1;
      for (int j = 0; j < m2; ++j) {
        const std::size_t c = static_cast<std::size_t>(i * m2 + j);
        a[c] = overlap(lo, hi, std::max(ext.k1, qt2[j]), 2.0);
        b[c] = overlap(lo, hi, -1.0, qt2[j]);
      }
    }
    AuctionImplementation out{GridFunction(shape, std::move(a)), GridFunction(shape, std::move(b)), true, 0.0};
    out.residual = marginal_residual(out.p1, out.p2, qt1, qt2);
    if (out.residual <= 1e-9 && respects_capacity(out.p1, out.p2)) return out;
  }
  return implement_by_lp(qt1, qt2);
}

LpProblem reduced_form_lp(int m1, int m2, const std::vector<double>& c1, const std::vector<double>& c2) {
  if (m1 <= 0 || m2 <= 0 || c1.size() != static_cast<std::size_t>(m1) || c2.size() != static_cast<std::size_t>(m2))
    throw LengthMismatch("reduced-form objective sizes");
  // Variables q1 then q2. With nondecreasing rules the binding cuts of the
  // allocation flow network are the top sets {i >= a} x {j >= b}:
  //   sum_{i>=a} q1_i / m1 + sum_{j>=b} q2_j / m2 <= 1 - (a / m1)(b / m2).
  const std::size_t n1 = static_cast<std::size_t>(m1);
  LpProblem lp = LpProblem::with_variables(n1 + static_cast<std::size_t>(m2), 0.0, 1.0);
  for (int i = 0; i < m1; ++i) lp.objective[static_cast<std::size_t>(i)] = c1[static_cast<std::size_t>(i)] / m1;
  for (int j = 0; j < m2; ++j) lp.objective[n1 + static_cast<std::size_t>(j)] = c2[static_cast<std::size_t>(j)] / m2;
  for (int i = 0; i + 1 < m1; ++i)
    lp.add_constraint({{{static_cast<std::size_t>(i), 1.0}, {static_cast<std::size_t>(i + 1), -1.0}}, Relation::le, 0.0});
  for (int j = 0; j + 1 < m2; ++j)
    lp.add_constraint({{{n1 + static_cast<std::size_t>(j), 1.0}, {n1 + static_cast<std::size_t>(j + 1), -1.0}},
                       Relation::le, 0.0});
  for (int a = 0; a < m1; ++a) {
    for (int b = 0; b < m2; ++b) {
      // Scaled by m1 m2 so the rows have integer data.
      LinearConstraint row{{}, Relation::le, static_cast<double>(m1 * m2 - a * b)};
      for (int i = a; i < m1; ++i) row.terms.emplace_back(static_cast<std::size_t>(i), static_cast<double>(m2));
      for (int j = b; j < m2; ++j) row.terms.emplace_back(n1 + static_cast<std::size_t>(j), static_cast<double>(m1));
      lp.add_constraint(std::move(row));
    }
  }
  return lp;
}

std::vector<double> quantile_virtual_values(const QuantileTransform& g, int cells) {
  std::vector<double> psi(static_cast<std::size_t>(cells));
  for (int k = 0; k < cells; ++k) {
    const double s = (k + 0.5) / cells;
    const double x = g.inverse(s);
    psi[static_cast<std::size_t>(k)] = x - (1.0 - s) / g.density(x);
  }
  return psi;
}

double investment_revenue(const InvestmentSpec& spec, const std::vector<double>& psi, const StepFunction1D& qt1,
                          const StepFunction1D& qt2) {
  if (qt1.size() != psi.size() || qt2.size() != psi.size()) throw LengthMismatch("virtual values vs allocations");
  double total = 0.0;
  for (const StepFunction1D* q : {&qt1, &qt2}) {
    double s = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) s += psi[k] * (*q)[k] + spec.w((*q)[k]);
    total += s / static_cast<double>(psi.size());
  }
  return total;
}

InvestmentResult solve_investment_auction(const InvestmentSpec& spec, const QuantileTransform& g, int cells,
                                          const ProbeOptions& opt) {
  if (!(spec.b > 0.0)) throw InvalidArgument("investment cost curvature must be positive");
  if (cells <= 0) throw InvalidArgument("cells must be positive");
  const std::vector<double> psi = quantile_virtual_values(g, cells);
  const std::size_t m = psi.size();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  InvestmentResult best;
  best.objective = -kInf;
  std::vector<double> best_key;

  auto probe = [&](std::vector<double> c1, std::vector<double> c2) -> std::pair<StepFunction1D, StepFunction1D> {
    // A tiny seeded tilt makes the optimal vertex unique.
    double scale = 1.0;
    for (double v : c1) scale = std::max(scale, std::abs(v));
    for (double v : c2) scale = std::max(scale, std::abs(v));
    for (double& v : c1) v += 1e-9 * scale * unit(rng);
    for (double& v : c2) v += 1e-9 * scale * unit(rng);
    const LpSolution sol = solve_lp(reduced_form_lp(static_cast<int>(m), static_cast<int>(m), c1, c2));
    ++best.probes;
    if (!sol.optimal()) throw NoConvergence(std::string("reduced-form LP ended ") + to_string(sol.status));
    return {clean_step({sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m)}),
            clean_step({sol.x.begin() + static_cast<std::ptrdiff_t>(m), sol.x.end()})};
  };
  auto gradient = [&](const StepFunction1D& q) {
    std::vector<double> c(m);
    for (std::size_t k = 0; k < m; ++k) c[k] = psi[k] + spec.dw(q[k]);
    return c;
  };

  for (std::size_t r = 0; r < opt.restarts && best.probes < opt.budget; ++r) {
    std::vector<double> c1 = psi, c2 = psi;
    if (r > 0) {
      for (auto& v : c1) v = unit(rng);
      for (auto& v : c2) v = unit(rng);
    }
    double chain = -kInf;
    while (best.probes < opt.budget) {
      auto [q1, q2] = probe(c1, c2);
      const double f = investment_revenue(spec, psi, q1, q2);
      std::vector<double> key = q1.values();
      key.insert(key.end(), q2.values().begin(), q2.values().end());
      if (f > best.objective + 1e-12 || (std::abs(f - best.objective) <= 1e-12 && key < best_key)) {
        best.objective = f;
        best.q1 = q1;
        best.q2 = q2;
        best_key = std::move(key);
      }
      if (f <= chain + 1e-9) break;
      chain = f;
      c1 = gradient(q1);
      c2 = gradient(q2);
    }
  }
  best.structure = extreme_reduced_form_check(best.q1, best.q2);
  best.implementation = construct_implementation(best.q1, best.q2);
  return best;
}

SymmetricBenchmark best_symmetric_reserve(const InvestmentSpec& spec, const std::vector<double>& psi) {
  const int m = static_cast<int>(psi.size());
  SymmetricBenchmark best{0, -kInf};
  for (int rho = 0; rho <= m; ++rho) {
    std::vector<double> q(static_cast<std::size_t>(m), 0.0);
    for (int k = rho; k < m; ++k) q[static_cast<std::size_t>(k)] = (k + 0.5) / m;
    const StepFunction1D s(q);
    const double f = investment_revenue(spec, psi, s, s);
    if (f > best.objective) best = {rho, f};
  }
  return best;
}

}  // namespace monoext
