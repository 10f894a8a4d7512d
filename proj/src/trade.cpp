#include "monoext/trade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace monoext {

namespace {

double width(const Interval& d, std::size_t cells) { return (d.hi - d.lo) / static_cast<double>(cells); }

void check_masses(const std::vector<double>& m, const char* name, bool strictly_positive) {
  if (m.empty()) throw InvalidArgument(std::string(name) + " is empty");
  for (double x : m) {
    if (!std::isfinite(x) || x < 0.0 || (strictly_positive && x <= 0.0))
      throw InvalidArgument(std::string(name) + " has a non-positive or non-finite cell");
  }
}

std::vector<double> normalized_uniform(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (double& x : out) total += (x = u(rng));
  for (double& x : out) x /= total;
  return out;
}

// Index of cell (v = i, c = j) in the cost-reversed grid used by the LP.
std::size_t flipped_index(int i, int j, int mc) {
  return static_cast<std::size_t>(i) * mc + (mc - 1 - j);
}

}  // namespace

void TradeScenario::validate() const {
  check_masses(g_b, "buyer density", true);
  check_masses(g_s, "seller density", true);
  check_masses(weight_b, "buyer weights", false);
  check_masses(weight_s, "seller weights", false);
  if (weight_b.size() != g_b.size() || weight_s.size() != g_s.size())
    throw LengthMismatch("weights and densities differ in length");
  auto total = [](const std::vector<double>& m) { return std::accumulate(m.begin(), m.end(), 0.0); };
  if (std::abs(total(g_b) - 1.0) > 1e-9 || std::abs(total(g_s) - 1.0) > 1e-9)
    throw InvalidArgument("type densities must sum to one");
  if (!(v_domain.hi > v_domain.lo) || !(c_domain.hi > c_domain.lo)) throw InvalidArgument("empty domain");
}

std::vector<double> TradeScenario::marginal_revenue() const {
  const double dv = width(v_domain, g_b.size());
  std::vector<double> out(g_b.size());
  double below = 0.0;
  for (std::size_t i = 0; i < g_b.size(); ++i) {
    const double mid = v_domain.lo + (i + 0.5) * dv;
    out[i] = mid - dv * (1.0 - below - 0.5 * g_b[i]) / g_b[i];
    below += g_b[i];
  }
  return out;
}

std::vector<double> TradeScenario::marginal_cost() const {
  const double dc = width(c_domain, g_s.size());
  std::vector<double> out(g_s.size());
  double below = 0.0;
  for (std::size_t j = 0; j < g_s.size(); ++j) {
    const double mid = c_domain.lo + (j + 0.5) * dc;
    out[j] = mid + dc * (below + 0.5 * g_s[j]) / g_s[j];
    below += g_s[j];
  }
  return out;
}

std::vector<double> TradeScenario::buyer_weight_tail() const {
  std::vector<double> out(weight_b.size());
  double acc = 0.0;
  for (std::size_t i = weight_b.size(); i-- > 0;) out[i] = (acc += weight_b[i]);
  return out;
}

std::vector<double> TradeScenario::seller_weight_head() const {
  std::vector<double> out(weight_s.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < weight_s.size(); ++j) out[j] = (acc += weight_s[j]);
  return out;
}

TradeScenario TradeScenario::from_distributions(Interval v_domain, Interval c_domain, int value_cells, int cost_cells,
                                                const QuantileTransform& g_b, const QuantileTransform& g_s,
                                                std::vector<double> weight_b, std::vector<double> weight_s) {
  auto same = [](const Interval& a, const Interval& b) {
    return std::abs(a.lo - b.lo) <= 1e-12 && std::abs(a.hi - b.hi) <= 1e-12;
  };
  if (!same(g_b.support(), v_domain) || !same(g_s.support(), c_domain))
    throw SupportMismatch("distribution support differs from the type domain");
  TradeScenario s;
  s.v_domain = v_domain;
  s.c_domain = c_domain;
  s.g_b = g_b.cell_masses(value_cells);
  s.g_s = g_s.cell_masses(cost_cells);
  s.weight_b = std::move(weight_b);
  s.weight_s = std::move(weight_s);
  s.validate();
  return s;
}

TradeScenario TradeScenario::total_surplus(Interval v_domain, Interval c_domain, std::vector<double> g_b,
                                           std::vector<double> g_s) {
  TradeScenario s;
  s.v_domain = v_domain;
  s.c_domain = c_domain;
  s.weight_b = g_b;
  s.weight_s = g_s;
  s.g_b = std::move(g_b);
  s.g_s = std::move(g_s);
  s.validate();
  return s;
}

TradeScenario TradeScenario::random_instance(int value_cells, int cost_cells, std::uint64_t seed) {
  if (value_cells < 1 || cost_cells < 1) throw InvalidArgument("need at least one cell per axis");
  std::mt19937_64 rng(seed);
  TradeScenario s;
  s.g_b = normalized_uniform(rng, value_cells);
  s.g_s = normalized_uniform(rng, cost_cells);
  s.weight_b = normalized_uniform(rng, value_cells);
  s.weight_s = normalized_uniform(rng, cost_cells);
  s.validate();
  return s;
}

GridFunction MarkupPooling::simulate(int value_cells) const {
  const int mc = static_cast<int>(phi.size());
  std::vector<double> v(static_cast<std::size_t>(value_cells) * mc, 0.0);
  for (int j = 0; j < mc; ++j) {
    const bool pool = j >= pool_first && j <= pool_last;
    for (int i = 0; i < value_cells; ++i) {
      double x;
      if (pool) x = i >= phi_high ? 1.0 : i >= phi_low ? k : 0.0;
      else x = i >= phi[j] ? 1.0 : 0.0;
      v[static_cast<std::size_t>(i) * mc + j] = x;
    }
  }
  return GridFunction(Shape({value_cells, mc}), std::move(v));
}

GridFunction flip_cost_axis(const GridFunction& p) {
  const Shape& s = p.shape();
  if (s.rank() != 2) throw InvalidArgument("trade rules are two-dimensional");
  const int mv = s.dim(0), mc = s.dim(1);
  std::vector<double> out(s.size());
  for (int i = 0; i < mv; ++i)
    for (int j = 0; j < mc; ++j) out[flipped_index(i, j, mc)] = p[static_cast<std::size_t>(i) * mc + j];
  return GridFunction(s, std::move(out));
}

MarkupPooling extract_markup_pooling(const GridFunction& p, double tol) {
  const Shape& s = p.shape();
  if (s.rank() != 2) throw NotMarkupPooling("trade rules are two-dimensional");
  const int mv = s.dim(0), mc = s.dim(1);
  std::vector<double> v(p.data());
  double level = -1.0;
  for (double& x : v) {
    if (x < -tol || x > 1.0 + tol) throw NotMarkupPooling("value outside [0, 1]");
    if (std::abs(x) <= tol) x = 0.0;
    else if (std::abs(x - 1.0) <= tol) x = 1.0;
    else if (level < 0.0) level = x;
    else if (std::abs(x - level) > 1e-7) throw NotMarkupPooling("more than one fractional level");
    else x = level;
  }
  GridFunction snapped(s, v);
  if (!is_monotone(flip_cost_axis(snapped), 0.0)) throw NotMarkupPooling("not monotone in (v, -c)");

  MarkupPooling m;
  m.phi.assign(mc, mv);
  int ilo = mv, ihi = -1, jlo = mc, jhi = -1;
  for (int j = 0; j < mc; ++j) {
    for (int i = 0; i < mv; ++i) {
      const double x = v[static_cast<std::size_t>(i) * mc + j];
      if (x > 0.0 && m.phi[j] == mv) m.phi[j] = i;
      if (x > 0.0 && x < 1.0) {
        ilo = std::min(ilo, i);
        ihi = std::max(ihi, i);
        jlo = std::min(jlo, j);
        jhi = std::max(jhi, j);
      }
    }
  }
  if (ihi >= 0) {
    for (int i = ilo; i <= ihi; ++i)
      for (int j = jlo; j <= jhi; ++j)
        if (v[static_cast<std::size_t>(i) * mc + j] != level)
          throw NotMarkupPooling("fractional cells do not form one rectangle");
    m.pool_first = jlo;
    m.pool_last = jhi;
    m.phi_low = ilo;
    m.phi_high = ihi + 1;
    m.k = level;
  }
  if (m.simulate(mv).data() != v) throw NotMarkupPooling("resampling does not reproduce the rule");
  return m;
}

LpProblem interim_efficient_lp(const TradeScenario& s) {
  s.validate();
  const int mv = s.value_cells(), mc = s.cost_cells();
  const double dv = width(s.v_domain, mv), dc = width(s.c_domain, mc);
  const auto mr = s.marginal_revenue();
  const auto mcost = s.marginal_cost();
  const auto wb = s.buyer_weight_tail();
  const auto ws = s.seller_weight_head();
  const double total_b = wb.front(), total_s = ws.back();

  LpProblem lp = LpProblem::over_grid(Shape({mv, mc}), true);
  LinearConstraint budget;
  budget.relation = Relation::ge;
  for (int i = 0; i < mv; ++i) {
    // U_B(v) at the cell midpoint picks up q1(i) over half the cell.
    const double a = dv * (wb[i] - 0.5 * s.weight_b[i]);
    for (int j = 0; j < mc; ++j) {
      const double b = dc * (ws[j] - 0.5 * s.weight_s[j]);
      const double pi = s.g_b[i] * s.g_s[j] * (mr[i] - mcost[j]);
      const std::size_t x = flipped_index(i, j, mc);
      lp.objective[x] = s.g_s[j] * a + s.g_b[i] * b + total_s * pi;
      budget.terms.emplace_back(x, pi);
    }
  }
  const std::size_t z = lp.add_variable(0.0, kInf, total_b - total_s);
  budget.terms.emplace_back(z, -1.0);
  lp.add_constraint(std::move(budget));
  return lp;
}

namespace {

TradeSolution assemble(const TradeScenario& s, const GridFunction& p, double z, const MarkupPooling& m) {
  const int mv = s.value_cells(), mc = s.cost_cells();
  const double dv = width(s.v_domain, mv), dc = width(s.c_domain, mc);
  const auto mr = s.marginal_revenue();
  const auto mcost = s.marginal_cost();
  TradeSolution out;
  out.p = p;
  out.mechanism = m;
  out.z = z;
  out.q1.assign(mv, 0.0);
  out.q2.assign(mc, 0.0);
  double pi = 0.0;
  for (int i = 0; i < mv; ++i) {
    for (int j = 0; j < mc; ++j) {
      const double x = p[static_cast<std::size_t>(i) * mc + j];
      out.q1[i] += s.g_s[j] * x;
      out.q2[j] += s.g_b[i] * x;
      pi += s.g_b[i] * s.g_s[j] * x * (mr[i] - mcost[j]);
    }
  }
  out.pi = pi;
  out.seller_top_utility = pi - z;
  out.buyer_utility.assign(mv + 1, z);
  for (int i = 0; i < mv; ++i) out.buyer_utility[i + 1] = out.buyer_utility[i] + out.q1[i] * dv;
  out.seller_utility.assign(mc + 1, out.seller_top_utility);
  for (int j = mc; j-- > 0;) out.seller_utility[j] = out.seller_utility[j + 1] + out.q2[j] * dc;
  double w = 0.0;
  for (int i = 0; i < mv; ++i) w += s.weight_b[i] * 0.5 * (out.buyer_utility[i] + out.buyer_utility[i + 1]);
  for (int j = 0; j < mc; ++j) w += s.weight_s[j] * 0.5 * (out.seller_utility[j] + out.seller_utility[j + 1]);
  out.welfare = w;
  return out;
}

}  // namespace

TradeSolution solve_interim_efficient(const TradeScenario& s, const SolveOptions& opt) {
  LpProblem lp = interim_efficient_lp(s);
  const int mv = s.value_cells(), mc = s.cost_cells();
  const std::size_t cells = static_cast<std::size_t>(mv) * mc;
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      // Ties between optimal vertices can leave a non-extreme optimum; break them.
      double scale = 0.0;
      for (double c : lp.objective) scale = std::max(scale, std::abs(c));
      std::mt19937_64 rng(0x7261646575ULL);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (std::size_t x = 0; x < cells; ++x) lp.objective[x] += 1e-10 * scale * u(rng);
    }
    LpSolution sol = solve_lp(lp, opt);
    if (!sol.optimal()) throw Infeasible(std::string("trade LP ended ") + to_string(sol.status));
    std::vector<double> v(cells);
    for (int i = 0; i < mv; ++i)
      for (int j = 0; j < mc; ++j) v[static_cast<std::size_t>(i) * mc + j] = std::clamp(sol.x[flipped_index(i, j, mc)], 0.0, 1.0);
    try {
      MarkupPooling m = extract_markup_pooling(GridFunction(s.shape(), v));
      TradeSolution out = assemble(s, m.simulate(mv), std::max(0.0, sol.x[cells]), m);
      out.lp_iterations = sol.iterations;
      return out;
    } catch (const NotMarkupPooling& e) {
      last_error = e.what();
    }
  }
  throw StructureViolation("optimum is not markup-pooling: " + last_error);
}

UniquenessReport unique_among_monotone_trade_rules(const GridFunction& p, const TradeScenario& s) {
  const int mv = s.value_cells(), mc = s.cost_cells();
  if (!(p.shape() == s.shape())) throw LengthMismatch("trade rule and scenario grids differ");
  LpProblem lp = LpProblem::over_grid(s.shape(), true);
  std::vector<double> q1(mv, 0.0), q2(mc, 0.0);
  for (int i = 0; i < mv; ++i)
    for (int j = 0; j < mc; ++j) {
      q1[i] += s.g_s[j] * p[static_cast<std::size_t>(i) * mc + j];
      q2[j] += s.g_b[i] * p[static_cast<std::size_t>(i) * mc + j];
    }
  for (int i = 0; i < mv; ++i) {
    LinearConstraint c{{}, Relation::eq, q1[i]};
    for (int j = 0; j < mc; ++j) c.terms.emplace_back(flipped_index(i, j, mc), s.g_s[j]);
    lp.add_constraint(std::move(c));
  }
  for (int j = 0; j < mc; ++j) {
    LinearConstraint c{{}, Relation::eq, q2[j]};
    for (int i = 0; i < mv; ++i) c.terms.emplace_back(flipped_index(i, j, mc), s.g_b[i]);
    lp.add_constraint(std::move(c));
  }
  const GridFunction f = flip_cost_axis(p);
  return is_unique_feasible(f.values(), lp);
}

DicReport verify_dic_vertex_is_markup_pooling(const TradeScenario& s, std::size_t trials, std::uint64_t seed) {
  DicReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = seed + 0x9e3779b97f4a7c15ULL * (t + 1);
    std::mt19937_64 rng(trial_seed);
    TradeScenario w = s;
    w.weight_b = normalized_uniform(rng, s.value_cells());
    w.weight_s = normalized_uniform(rng, s.cost_cells());
    std::string reason;
    try {
      TradeSolution sol = solve_interim_efficient(w);
      if (!unique_among_monotone_trade_rules(sol.p, w).unique) reason = "not uniquely rationalized";
    } catch (const Error& e) {
      reason = e.what();
    }
    if (reason.empty()) ++rep.passed;
    else rep.failures.push_back("trial " + std::to_string(t) + " seed " + std::to_string(trial_seed) + ": " + reason);
  }
  return rep;
}

}  // namespace monoext
