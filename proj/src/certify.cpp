#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "monoext/solver.hpp"

namespace monoext {

namespace {

struct TightSystem {
  std::vector<std::size_t> free_vars;
  Eigen::MatrixXd rows;  // tight rows restricted to the free variables
  std::size_t fixed = 0;
};

TightSystem build_tight_system(const LpProblem& p, std::span<const double> x, double tol) {
  TightSystem sys;
  const std::size_t n = p.num_vars();
  std::vector<long> col(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(x[j] - p.lower[j]) <= tol || std::abs(x[j] - p.upper[j]) <= tol) {
      ++sys.fixed;
    } else {
      col[j] = static_cast<long>(sys.free_vars.size());
      sys.free_vars.push_back(j);
    }
  }
  std::vector<std::vector<std::pair<long, double>>> rows;
  auto add = [&](const std::vector<std::pair<std::size_t, double>>& terms) {
    std::vector<std::pair<long, double>> r;
    for (const auto& [j, a] : terms) {
      if (col[j] >= 0 && a != 0.0) r.emplace_back(col[j], a);
    }
    if (!r.empty()) rows.push_back(std::move(r));
  };
  for (const auto& pr : p.monotone_rows()) {
    if (std::abs(x[pr.lo] - x[pr.hi]) <= tol) add({{pr.lo, 1.0}, {pr.hi, -1.0}});
  }
  for (const auto& c : p.constraints) {
    if (c.relation == Relation::eq || std::abs(c.activity(x) - c.rhs) <= tol) add(c.terms);
  }
  sys.rows = Eigen::MatrixXd::Zero(static_cast<long>(rows.size()), static_cast<long>(sys.free_vars.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, a] : rows[r]) sys.rows(static_cast<long>(r), c) += a;
  }
  return sys;
}

struct NullSpace {
  std::size_t rank = 0;
  Eigen::MatrixXd basis;  // columns span the kernel
};

NullSpace null_space(const Eigen::MatrixXd& m) {
  NullSpace ns;
  const long cols = m.cols();
  if (cols == 0) return ns;
  if (m.rows() == 0) {
    ns.basis = Eigen::MatrixXd::Identity(cols, cols);
    return ns;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-8);
  ns.rank = static_cast<std::size_t>(lu.rank());
  if (ns.rank < static_cast<std::size_t>(cols)) ns.basis = lu.kernel();
  return ns;
}

void check_feasible(const LpProblem& p, std::span<const double> x) {
  if (x.size() != p.num_vars()) throw LengthMismatch("point has wrong length");
  double v = p.max_violation(x);
  if (v > 1e-8) throw InfeasiblePoint("point violates a constraint by " + std::to_string(v));
}

// Largest eps with x + s * eps * u feasible for s = +1 and s = -1.
double symmetric_step(const LpProblem& p, std::span<const double> x, const std::vector<double>& u) {
  double eps = kInf;
  auto limit = [&](double slack, double rate) {
    // need slack - |rate| * eps >= 0 in the worse direction
    double r = std::abs(rate);
    if (r > 1e-15) eps = std::min(eps, std::max(0.0, slack) / r);
  };
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (u[j] == 0.0) continue;
    limit(std::min(x[j] - p.lower[j], p.upper[j] - x[j]), u[j]);
  }
  for (const auto& pr : p.monotone_rows()) limit(x[pr.hi] - x[pr.lo], u[pr.lo] - u[pr.hi]);
  for (const auto& c : p.constraints) {
    double rate = 0.0;
    for (const auto& [j, a] : c.terms) rate += a * u[j];
    if (c.relation == Relation::eq) continue;
    double slack = c.relation == Relation::le ? c.rhs - c.activity(x) : c.activity(x) - c.rhs;
    limit(slack, rate);
  }
  return std::isfinite(eps) ? eps : 1.0;
}

// Largest t with x + t * d feasible.
double one_sided_step(const LpProblem& p, std::span<const double> x, const std::vector<double>& d) {
  double t = kInf;
  auto limit = [&](double slack, double rate) {
    if (rate > 1e-15) t = std::min(t, std::max(0.0, slack) / rate);
  };
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    limit(p.upper[j] - x[j], d[j]);
    limit(x[j] - p.lower[j], -d[j]);
  }
  for (const auto& pr : p.monotone_rows()) limit(x[pr.hi] - x[pr.lo], d[pr.lo] - d[pr.hi]);
  for (const auto& c : p.constraints) {
    if (c.relation == Relation::eq) continue;
    double rate = 0.0;
    for (const auto& [j, a] : c.terms) rate += a * d[j];
    if (c.relation == Relation::le) limit(c.rhs - c.activity(x), rate);
    else limit(c.activity(x) - c.rhs, -rate);
  }
  return t;
}

}  // namespace

TightSet tight_set(const LpProblem& p, std::span<const double> x, double tol) {
  TightSet t;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (std::abs(x[j] - p.lower[j]) <= tol || std::abs(x[j] - p.upper[j]) <= tol) t.at_bound.push_back(j);
  }
  const auto mono = p.monotone_rows();
  for (std::size_t r = 0; r < mono.size(); ++r) {
    if (std::abs(x[mono[r].lo] - x[mono[r].hi]) <= tol) t.monotone.push_back(r);
  }
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& c = p.constraints[k];
    if (c.relation == Relation::eq || std::abs(c.activity(x) - c.rhs) <= tol) t.constraints.push_back(k);
  }
  return t;
}

std::size_t numeric_rank(const std::vector<std::vector<double>>& rows, std::size_t cols, double threshold) {
  if (rows.empty() || cols == 0) return 0;
  Eigen::MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(threshold);
  return static_cast<std::size_t>(lu.rank());
}

VertexReport is_vertex(std::span<const double> x, const LpProblem& p) {
  check_feasible(p, x);
  TightSystem sys = build_tight_system(p, x, 1e-8);
  NullSpace ns = null_space(sys.rows);
  VertexReport rep;
  rep.rank = sys.fixed + ns.rank;
  rep.degrees_of_freedom = p.num_vars() - rep.rank;
  rep.vertex = rep.degrees_of_freedom == 0;
  if (!rep.vertex) {
    std::vector<double> u(p.num_vars(), 0.0);
    double mx = ns.basis.col(0).cwiseAbs().maxCoeff();
    double sign = 0.0;
    for (std::size_t k = 0; k < sys.free_vars.size(); ++k) {
      double v = ns.basis(static_cast<long>(k), 0) / mx;
      if (sign == 0.0 && std::abs(v) > 1e-12) sign = v > 0 ? 1.0 : -1.0;
      u[sys.free_vars[k]] = v;
    }
    for (double& v : u) v *= sign;
    double eps = symmetric_step(p, x, u);
    for (double& v : u) v *= eps;
    rep.perturbation = std::move(u);
  }
  return rep;
}

UniquenessReport is_unique_feasible(std::span<const double> x, const LpProblem& p) {
  check_feasible(p, x);
  const double tol = 1e-8;
  const std::size_t n = p.num_vars();
  TightSystem sys = build_tight_system(p, x, tol);
  NullSpace ns = null_space(sys.rows);
  UniquenessReport rep;
  rep.degrees_of_freedom = n - sys.fixed - ns.rank;

  // x is the only feasible point iff the cone of feasible directions at x is
  // {0}. First look for a direction that leaves some tight inequality or bound;
  // if none exists the cone is the kernel of the tight rows.
  LpProblem cone = LpProblem::with_variables(n, -1.0, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const bool at_lo = std::abs(x[j] - p.lower[j]) <= tol, at_hi = std::abs(x[j] - p.upper[j]) <= tol;
    if (at_lo) {
      cone.lower[j] = 0.0;
      cone.objective[j] += 1.0;
    }
    if (at_hi) {
      cone.upper[j] = 0.0;
      cone.objective[j] -= 1.0;
    }
  }
  for (const auto& pr : p.monotone_rows()) {
    if (std::abs(x[pr.lo] - x[pr.hi]) > tol) continue;
    cone.add_constraint({{{pr.lo, 1.0}, {pr.hi, -1.0}}, Relation::le, 0.0});
    cone.objective[pr.hi] += 1.0;
    cone.objective[pr.lo] -= 1.0;
  }
  for (const auto& c : p.constraints) {
    const bool tight = c.relation == Relation::eq || std::abs(c.activity(x) - c.rhs) <= tol;
    if (!tight) continue;
    cone.add_constraint({c.terms, c.relation, 0.0});
    const double sign = c.relation == Relation::le ? -1.0 : c.relation == Relation::ge ? 1.0 : 0.0;
    for (const auto& [j, a] : c.terms) cone.objective[j] += sign * a;
  }
  LpSolution sol = solve_lp(cone);
  ++rep.probes;
  if (!sol.optimal()) throw NoConvergence(std::string("feasible-direction LP ended ") + to_string(sol.status));

  std::vector<double> d;
  if (sol.objective > 1e-9) {
    d = sol.x;
  } else if (rep.degrees_of_freedom > 0) {
    d.assign(n, 0.0);
    for (std::size_t k = 0; k < sys.free_vars.size(); ++k) d[sys.free_vars[k]] = ns.basis(static_cast<long>(k), 0);
  } else {
    rep.unique = true;
    return rep;
  }
  const double t = std::min(1.0, one_sided_step(p, x, d));
  std::vector<double> w(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) w[j] += t * d[j];
  rep.unique = false;
  rep.witness = std::move(w);
  return rep;
}

SeparableObjective random_separable_objective(std::uint64_t seed, const Shape& shape,
                                              std::span<const std::vector<double>> axis_weights) {
  if (!axis_weights.empty() && axis_weights.size() != static_cast<std::size_t>(shape.rank())) {
    throw LengthMismatch("need one weight vector per axis");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SeparableObjective obj;
  for (int a = 0; a < shape.rank(); ++a) {
    std::vector<double> prof(shape.dim(a));
    for (double& v : prof) v = unif(rng);
    if (!axis_weights.empty() && axis_weights[a].size() != prof.size()) throw LengthMismatch("axis weight length");
    obj.profiles.push_back(std::move(prof));
  }
  obj.array.assign(shape.size(), 0.0);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    double s = 0.0, w = 1.0;
    for (int a = 0; a < shape.rank(); ++a) {
      int k = shape.coord(i, a);
      s += obj.profiles[a][k];
      if (!axis_weights.empty()) w *= axis_weights[a][k];
    }
    obj.array[i] = s * w;
  }
  return obj;
}

}  // namespace monoext
