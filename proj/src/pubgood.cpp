#include "monoext/pubgood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace monoext {

void PublicGoodScenario::validate() const {
  const std::size_t n = shape.size();
  if (domains.size() != static_cast<std::size_t>(shape.rank())) throw LengthMismatch("one domain per agent");
  if (density.size() != n) throw LengthMismatch("density table does not match the grid");
  double total = 0.0;
  for (double w : density) {
    if (!(w >= 0.0)) throw InvalidArgument("density must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("density must sum to 1");
  if (values.size() != static_cast<std::size_t>(agents()) || increments.size() != values.size()) {
    throw LengthMismatch("need values and increments for every agent");
  }
  for (int i = 0; i < agents(); ++i) {
    if (values[i].size() != n || increments[i].size() != n) throw LengthMismatch("value array size");
    const std::size_t st = shape.stride(i);
    for (std::size_t x = 0; x < n; ++x) {
      if (shape.coord(x, i) + 1 < shape.dim(i) && values[i][x + st] < values[i][x] - 1e-12) {
        throw NotMonotone("value of agent " + std::to_string(i) + " decreases in its own signal at cell " +
                          std::to_string(x));
      }
    }
  }
}

PublicGoodScenario PublicGoodScenario::linear_externality(const Shape& shape, std::vector<Interval> domains,
                                                          std::vector<double> density, double w, double cost) {
  PublicGoodScenario s;
  s.shape = shape;
  s.domains = std::move(domains);
  s.density = std::move(density);
  s.cost = cost;
  const int n = shape.rank();
  const std::size_t cells = shape.size();
  std::vector<std::vector<double>> sig(n, std::vector<double>(cells));
  for (std::size_t x = 0; x < cells; ++x)
    for (int a = 0; a < n; ++a) sig[a][x] = cell_center(s.domains[a], shape.dim(a), shape.coord(x, a));
  s.values.assign(n, std::vector<double>(cells, 0.0));
  s.increments.assign(n, std::vector<double>(cells, 0.0));
  for (int i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < cells; ++x) {
      double v = sig[i][x];
      for (int j = 0; j < n; ++j)
        if (j != i) v += w * sig[j][x];
      s.values[i][x] = v;
    }
    const std::size_t st = shape.stride(i);
    for (std::size_t x = 0; x < cells; ++x) {
      if (shape.coord(x, i) + 1 < shape.dim(i)) s.increments[i][x] = s.values[i][x + st] - s.values[i][x];
    }
  }
  s.symmetric = w >= 0.0 && is_exchangeable(shape, s.density, 0.0);
  for (int a = 1; a < n; ++a) {
    if (shape.dim(a) != shape.dim(0) || s.domains[a].lo != s.domains[0].lo || s.domains[a].hi != s.domains[0].hi) {
      s.symmetric = false;
    }
  }
  return s;
}

PublicGoodScenario PublicGoodScenario::limited_negative(int cells, std::vector<double> density, double cost) {
  PublicGoodScenario s;
  s.shape = Shape({cells, cells});
  s.domains = {{0.0, 1.0}, {0.0, 1.0}};
  s.density = std::move(density);
  s.cost = cost;
  const double h = 1.0 / cells;
  const std::size_t n = s.shape.size();
  s.values.assign(2, std::vector<double>(n, 0.0));
  s.increments.assign(2, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    const int k[2] = {s.shape.coord(x, 0), s.shape.coord(x, 1)};
    for (int i = 0; i < 2; ++i) {
      s.values[i][x] = h * std::max(k[i] - k[1 - i], 0);
      if (k[i] + 1 < cells && k[i] >= k[1 - i]) s.increments[i][x] = h;
    }
  }
  s.symmetric = is_exchangeable(s.shape, s.density, 0.0);
  return s;
}

GridFunction TwoThresholdPolicy::allocation() const {
  std::vector<double> v(score.size());
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = score[x] >= k_high ? 1.0 : score[x] >= k_low ? p : 0.0;
  return GridFunction(score.shape(), std::move(v));
}

std::vector<double> budget_coefficients(const PublicGoodScenario& s) {
  const Shape& shape = s.shape;
  const std::size_t n = shape.size();
  std::vector<double> b(n);
  for (std::size_t x = 0; x < n; ++x) {
    double total = -s.cost;
    for (int i = 0; i < s.agents(); ++i) total += s.values[i][x];
    b[x] = s.density[x] * total;
  }
  // mass strictly above x along axis i, same other coordinates
  for (int i = 0; i < s.agents(); ++i) {
    const std::size_t st = shape.stride(i);
    std::vector<double> above(n, 0.0);
    for (std::size_t x = n; x-- > 0;) {
      if (shape.coord(x, i) + 1 < shape.dim(i)) above[x] = above[x + st] + s.density[x + st];
      b[x] -= s.increments[i][x] * above[x];
    }
  }
  return b;
}

LpProblem public_good_lp(const PublicGoodScenario& s) {
  LpProblem p = LpProblem::over_grid(s.shape, true);
  for (std::size_t x = 0; x < s.shape.size(); ++x) {
    double total = -s.cost;
    for (int i = 0; i < s.agents(); ++i) total += s.values[i][x];
    p.objective[x] = s.density[x] * total;
  }
  LinearConstraint budget;
  budget.relation = Relation::ge;
  budget.rhs = 0.0;
  auto b = budget_coefficients(s);
  for (std::size_t x = 0; x < b.size(); ++x)
    if (b[x] != 0.0) budget.terms.emplace_back(x, b[x]);
  p.add_constraint(std::move(budget));
  return p;
}

namespace {

// alpha(x) = alpha(x with axes a and a+1 swapped) for every adjacent pair.
void add_symmetry_rows(LpProblem& p, const Shape& shape) {
  for (int a = 0; a + 1 < shape.rank(); ++a) {
    for (std::size_t x = 0; x < shape.size(); ++x) {
      auto c = shape.coords(x);
      std::swap(c[a], c[a + 1]);
      std::size_t y = shape.index(c);
      if (y > x) p.add_constraint({{{x, 1.0}, {y, -1.0}}, Relation::eq, 0.0});
    }
  }
}

}  // namespace

TwoThresholdPolicy extract_two_threshold(const GridFunction& alpha) {
  std::vector<double> v(alpha.values().begin(), alpha.values().end());
  for (double& t : v) {
    if (t < 1e-9) t = 0.0;
    if (t > 1.0 - 1e-9) t = 1.0;
  }
  NestingRepresentation rep = nesting_decompose(GridFunction(alpha.shape(), v), 1e-7);
  std::vector<double> levels;
  for (std::size_t r = 0; r < rep.sets.size(); ++r) levels.push_back(rep.levels[r]);
  if (levels.size() > 2) {
    throw StructureViolation("allocation has " + std::to_string(levels.size()) + " positive levels");
  }
  if (levels.size() == 2 && levels[1] < 1.0) {
    throw StructureViolation("two positive levels but the top level is " + std::to_string(levels[1]));
  }
  TwoThresholdPolicy pol;
  const std::size_t n = alpha.size();
  std::vector<double> score(n, 0.0);
  pol.k_low = 0.5;
  pol.k_high = 1.0;
  pol.p = 1.0;
  const UpSet* low = nullptr;
  const UpSet* high = nullptr;
  if (levels.size() == 2) {
    low = &rep.sets[0];
    high = &rep.sets[1];
    pol.p = levels[0];
  } else if (levels.size() == 1) {
    low = &rep.sets[0];
    if (levels[0] >= 1.0) high = &rep.sets[0];
    else pol.p = levels[0];
  }
  for (std::size_t x = 0; x < n; ++x) {
    score[x] = 0.5 * ((low && low->contains(x)) ? 1.0 : 0.0) + 0.5 * ((high && high->contains(x)) ? 1.0 : 0.0);
  }
  pol.score = GridFunction(alpha.shape(), std::move(score));
  return pol;
}

MechanismResult solve_public_good(const PublicGoodScenario& s, const SolveOptions& opt) {
  s.validate();
  LpProblem p = public_good_lp(s);
  LpSolution sol = solve_lp(p, opt);
  if (!sol.optimal()) throw Infeasible(std::string("public good LP ended with status ") + to_string(sol.status));
  MechanismResult res;
  res.unrestricted_objective = sol.objective;
  if (s.symmetric) {
    LpProblem sym = p;
    add_symmetry_rows(sym, s.shape);
    LpSolution ssol = solve_lp(sym, opt);
    if (!ssol.optimal()) throw StructureViolation("symmetric restriction is infeasible");
    if (std::abs(ssol.objective - sol.objective) > 1e-8 * std::max(1.0, std::abs(sol.objective))) {
      throw StructureViolation("symmetric optimum differs from the unrestricted optimum");
    }
    sol = std::move(ssol);
  }
  for (double& v : sol.x) v = std::clamp(v, 0.0, 1.0);
  res.policy = extract_two_threshold(GridFunction(s.shape, sol.x));
  res.allocation = res.policy.allocation();
  if (!is_monotone(res.allocation, 0.0)) throw StructureViolation("allocation is not monotone");
  auto b = budget_coefficients(s);
  res.surplus = 0.0;
  res.budget_slack = 0.0;
  for (std::size_t x = 0; x < s.shape.size(); ++x) {
    res.surplus += p.objective[x] * res.allocation[x];
    res.budget_slack += b[x] * res.allocation[x];
  }
  res.transfers = compute_transfers(res.allocation, s);
  return res;
}

std::vector<std::vector<double>> compute_transfers(const GridFunction& alpha, const PublicGoodScenario& s) {
  const Shape& shape = s.shape;
  const std::size_t n = shape.size();
  std::vector<std::vector<double>> t(s.agents(), std::vector<double>(n));
  for (int i = 0; i < s.agents(); ++i) {
    const std::size_t st = shape.stride(i);
    std::vector<double> u(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (shape.coord(x, i) > 0) u[x] = u[x - st] + alpha[x - st] * s.increments[i][x - st];
      t[i][x] = alpha[x] * s.values[i][x] - u[x];
    }
  }
  return t;
}

IcReport verify_expost_ic(const GridFunction& alpha, const std::vector<std::vector<double>>& t,
                          const PublicGoodScenario& s, double tol) {
  const Shape& shape = s.shape;
  IcReport rep;
  rep.worst = -std::numeric_limits<double>::infinity();
  rep.worst_ir = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.agents(); ++i) {
    const std::size_t st = shape.stride(i);
    for (std::size_t x = 0; x < shape.size(); ++x) {
      const double vi = s.values[i][x];
      const double truthful = alpha[x] * vi - t[i][x];
      rep.worst_ir = std::min(rep.worst_ir, truthful);
      const std::size_t base = x - static_cast<std::size_t>(shape.coord(x, i)) * st;
      for (int k = 0; k < shape.dim(i); ++k) {
        const std::size_t y = base + static_cast<std::size_t>(k) * st;
        rep.worst = std::max(rep.worst, alpha[y] * vi - t[i][y] - truthful);
      }
    }
  }
  rep.ok = rep.worst <= tol && rep.worst_ir >= -tol;
  return rep;
}

HazardReport check_hazard_condition(const Shape& shape, const std::vector<double>& density, double tol) {
  if (shape.rank() != 2) throw InvalidArgument("hazard condition needs two agents");
  if (density.size() != shape.size()) throw LengthMismatch("density table does not match the grid");
  const int m1 = shape.dim(0), m2 = shape.dim(1);
  HazardReport rep;
  rep.hazard.assign(shape.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < m2; ++j) {
    double survival = 0.0;
    for (int i = 0; i < m1; ++i) survival += density[static_cast<std::size_t>(i) * m2 + j];
    if (!(survival > 0.0)) throw DegenerateConditional("no mass at s2 index " + std::to_string(j));
    for (int i = 0; i < m1; ++i) {
      const std::size_t x = static_cast<std::size_t>(i) * m2 + j;
      if (survival > 0.0) rep.hazard[x] = density[x] / survival;
      survival -= density[x];
      if (survival < 1e-300) survival = 0.0;
    }
  }
  rep.increasing_in_s1 = true;
  rep.decreasing_in_s2 = true;
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m2; ++j) {
      const double h = rep.hazard[static_cast<std::size_t>(i) * m2 + j];
      if (std::isnan(h)) continue;
      if (i + 1 < m1) {
        const double up = rep.hazard[static_cast<std::size_t>(i + 1) * m2 + j];
        if (!std::isnan(up) && up < h - tol) rep.increasing_in_s1 = false;
      }
      if (j + 1 < m2) {
        const double right = rep.hazard[static_cast<std::size_t>(i) * m2 + j + 1];
        if (!std::isnan(right) && right > h + tol) rep.decreasing_in_s2 = false;
      }
    }
  }
  return rep;
}

namespace {

// Smallest K with A = {max(x1, x2) >= K}; throws when A has another shape.
int max_threshold(const UpSet& a) {
  const Shape& s = a.shape();
  const int m = s.dim(0);
  int k = m;
  for (std::size_t x = 0; x < s.size(); ++x)
    if (a.contains(x)) k = std::min(k, std::max(s.coord(x, 0), s.coord(x, 1)));
  for (std::size_t x = 0; x < s.size(); ++x) {
    const bool want = std::max(s.coord(x, 0), s.coord(x, 1)) >= k;
    if (want != a.contains(x)) {
      throw StructureViolation("level set is not of the form {max(s1, s2) >= k} at cell " + std::to_string(x));
    }
  }
  return k;
}

}  // namespace

RefundMechanism solve_limited_negative_externality(int cells, const std::vector<double>& density, double cost) {
  PublicGoodScenario s = PublicGoodScenario::limited_negative(cells, density, cost);
  RefundMechanism out;
  out.result = solve_public_good(s);
  const GridFunction& a = out.result.allocation;
  std::vector<char> low(a.size()), high(a.size());
  for (std::size_t x = 0; x < a.size(); ++x) {
    low[x] = a[x] > 0.0;
    high[x] = a[x] >= 1.0;
  }
  const double m = cells;
  const int k_low = max_threshold(UpSet(s.shape, low));
  const int k_high = max_threshold(UpSet(s.shape, high));
  out.k1 = k_low / m;
  out.k2 = k_high / m;
  out.p = k_low == k_high ? 1.0 : out.result.policy.p;
  return out;
}

}  // namespace monoext
