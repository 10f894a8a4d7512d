#include "monoext/rationalize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace monoext {

double conjugate_tail(const StepFunction1D& q, double x) {
  const double cap = 1.0 - x;
  double s = 0.0;
  for (double v : q.values()) s += std::min(v, cap);
  return std::max(0.0, s / static_cast<double>(q.size()));
}

StepFunction1D conjugate(const StepFunction1D& q, std::size_t m_out) {
  if (m_out == 0) m_out = q.size();
  const double m = static_cast<double>(m_out);
  const double n = static_cast<double>(q.size());
  // Cell i averages the tail difference, which per value q_j is the overlap of
  // [1 - (i+1)/m, 1 - i/m) with [0, q_j), scaled by m.
  std::vector<double> out(m_out);
  for (std::size_t i = 0; i < m_out; ++i) {
    const double shift = m - static_cast<double>(i) - 1.0;
    double s = 0.0;
    for (double v : q.values()) s += std::clamp(m * v - shift, 0.0, 1.0);
    out[i] = std::clamp(s / n, 0.0, 1.0);
    if (i > 0) out[i] = std::max(out[i], out[i - 1]);
  }
  return StepFunction1D(std::move(out));
}

MajorizationReport check_majorization(const StepFunction1D& q1, const StepFunction1D& ghat, bool weak, double tol) {
  if (q1.size() != ghat.size()) throw LengthMismatch("majorization needs equal grids");
  const std::size_t m = q1.size();
  MajorizationReport rep;
  rep.gaps.resize(m + 1);
  double t1 = 0.0, t2 = 0.0;
  rep.gaps[m] = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    t1 += q1[i];
    t2 += ghat[i];
    rep.gaps[i] = (t2 - t1) / static_cast<double>(m);
  }
  rep.min_gap = *std::min_element(rep.gaps.begin(), rep.gaps.end());
  for (std::size_t i = 0; i <= m; ++i) {
    if (std::abs(rep.gaps[i]) <= tol) rep.binding.push_back(i);
  }
  rep.equal_at_zero = std::abs(rep.gaps[0]) <= tol;
  rep.holds = rep.min_gap >= -tol && (weak || rep.equal_at_zero);
  return rep;
}

LpProblem marginal_polytope(const Shape& shape, const std::vector<std::vector<double>>& q, bool monotone) {
  if (q.size() != static_cast<std::size_t>(shape.rank())) throw LengthMismatch("need one marginal per axis");
  LpProblem p = LpProblem::over_grid(shape, monotone);
  for (int a = 0; a < shape.rank(); ++a) {
    if (q[a].size() != static_cast<std::size_t>(shape.dim(a))) throw LengthMismatch("marginal length differs from grid");
    const double w = 1.0 / static_cast<double>(shape.size() / shape.dim(a));
    std::vector<LinearConstraint> rows(shape.dim(a));
    for (int k = 0; k < shape.dim(a); ++k) {
      rows[k].relation = Relation::eq;
      rows[k].rhs = q[a][k];
    }
    for (std::size_t i = 0; i < shape.size(); ++i) rows[shape.coord(i, a)].terms.emplace_back(i, w);
    for (auto& r : rows) p.add_constraint(std::move(r));
  }
  return p;
}

namespace {

Shape shape_of(const std::vector<StepFunction1D>& q) {
  std::vector<int> dims;
  for (const auto& qa : q) dims.push_back(static_cast<int>(qa.size()));
  return Shape(dims);
}

std::vector<std::vector<double>> raw(const std::vector<StepFunction1D>& q) {
  std::vector<std::vector<double>> out;
  for (const auto& qa : q) out.push_back(qa.values());
  return out;
}

}  // namespace

RationalizabilityReport rationalizability(const std::vector<StepFunction1D>& q) {
  if (q.empty()) throw InvalidArgument("need at least one marginal");
  RationalizabilityReport rep;
  if (q.size() == 1) {
    rep.rationalizable = true;
    rep.witness = GridFunction(shape_of(q), q[0].values());
    return rep;
  }
  if (q.size() == 2) {
    rep.rationalizable = check_majorization(q[0], conjugate(q[1], q[0].size())).holds;
    return rep;
  }
  LpProblem p = marginal_polytope(shape_of(q), raw(q), false);
  LpSolution s = solve_lp(p);
  rep.rationalizable = s.optimal();
  if (rep.rationalizable) {
    for (double& v : s.x) v = std::clamp(v, 0.0, 1.0);
    rep.witness = GridFunction(p.grid, s.x);
  }
  return rep;
}

bool is_rationalizable(const std::vector<StepFunction1D>& q) { return rationalizability(q).rationalizable; }

RationalizerResult monotone_rationalizer_run(const std::vector<StepFunction1D>& q, const RationalizerOptions& opt) {
  if (!is_rationalizable(q)) throw NotRationalizable("marginals admit no function with values in [0,1]");
  const Shape shape = shape_of(q);
  const std::size_t n = shape.size();
  const int rank = shape.rank();
  std::vector<double> f(n, 0.0), corr(n, 0.0);
  std::vector<std::vector<double>> mean(rank);
  for (int a = 0; a < rank; ++a) mean[a].assign(shape.dim(a), 0.0);
  std::vector<double> slice(rank);
  for (int a = 0; a < rank; ++a) slice[a] = static_cast<double>(n / shape.dim(a));

  auto slice_means = [&](int a) {
    std::fill(mean[a].begin(), mean[a].end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) mean[a][shape.coord(i, a)] += f[i];
    for (double& v : mean[a]) v /= slice[a];
  };

  RationalizerResult res;
  for (res.sweeps = 1; res.sweeps <= opt.max_sweeps; ++res.sweeps) {
    for (int a = 0; a < rank; ++a) {
      slice_means(a);
      for (std::size_t i = 0; i < n; ++i) {
        int k = shape.coord(i, a);
        f[i] += q[a][k] - mean[a][k];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double y = f[i] + corr[i];
      f[i] = std::clamp(y, 0.0, 1.0);
      corr[i] = y - f[i];
    }
    res.residual = 0.0;
    for (int a = 0; a < rank; ++a) {
      slice_means(a);
      for (int k = 0; k < shape.dim(a); ++k) res.residual = std::max(res.residual, std::abs(mean[a][k] - q[a][k]));
    }
    if (res.residual < opt.residual_tol) break;
  }
  if (res.residual >= opt.residual_tol) {
    throw NoConvergence("Dykstra stopped with marginal residual " + std::to_string(res.residual));
  }
  res.sweeps = std::min(res.sweeps, opt.max_sweeps);
  res.f = GridFunction(shape, std::move(f));
  return res;
}

GridFunction monotone_rationalizer(const std::vector<StepFunction1D>& q) { return monotone_rationalizer_run(q).f; }

UniquenessReport unique_rationalization_check(const GridFunction& f, bool among_monotone) {
  LpProblem p = marginal_polytope(f.shape(), marginals(f), among_monotone);
  return is_unique_feasible(f.values(), p);
}

RectangleDecomposition detect_rectangle_structure(const GridFunction& f, double tol) {
  const Shape& s = f.shape();
  if (s.rank() != 2) throw InvalidArgument("rectangle detection needs a 2-d grid");
  if (auto bad = first_monotonicity_violation(f, tol)) {
    throw NotMonotone("value drops between cells " + std::to_string(bad->lo) + " and " + std::to_string(bad->hi));
  }
  RectangleDecomposition d;
  std::vector<char> inner(s.size()), outer(s.size());
  double fmin = 1.0, fmax = 0.0, fsum = 0.0;
  std::size_t nfrac = 0;
  int lo[2] = {s.dim(0), s.dim(1)}, hi[2] = {-1, -1};
  for (std::size_t i = 0; i < s.size(); ++i) {
    double v = f[i];
    inner[i] = v >= 1.0 - tol;
    outer[i] = v > tol;
    if (v > tol && v < 1.0 - tol) {
      ++nfrac;
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
      fsum += v;
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::min(lo[a], s.coord(i, a));
        hi[a] = std::max(hi[a], s.coord(i, a));
      }
    }
  }
  try {
    d.inner = UpSet(s, inner);
    d.outer = UpSet(s, outer);
  } catch (const NotMonotone&) {
    d.reason = "level sets are not up-sets";
    return d;
  }
  if (nfrac == 0) {
    d.valid = true;
    return d;
  }
  if (fmax - fmin > tol) {
    d.reason = "more than one fractional level";
    return d;
  }
  std::size_t box = static_cast<std::size_t>(hi[0] - lo[0] + 1) * static_cast<std::size_t>(hi[1] - lo[1] + 1);
  if (box != nfrac) {
    d.reason = "fractional cells do not form a box";
    return d;
  }
  d.valid = true;
  d.has_rectangle = true;
  d.lambda = fsum / static_cast<double>(nfrac);
  for (int a = 0; a < 2; ++a) {
    d.lo[a] = lo[a];
    d.hi[a] = hi[a];
  }
  return d;
}

bool extreme_check_joint_majorization(const StepFunction1D& q1, const StepFunction1D& q2) {
  StepFunction1D g = conjugate(q2, q1.size());
  for (std::size_t i = 0; i < q1.size(); ++i) {
    if (std::abs(q1[i] - g[i]) > 1e-9) return false;
  }
  return true;
}

SquareStructure square_majorization_structure(const StepFunction1D& q1, const StepFunction1D& q2, double tol) {
  StepFunction1D g = conjugate(q2, q1.size());
  const std::size_t m = q1.size();
  SquareStructure out;
  std::vector<std::size_t> off;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(q1[i] - g[i]) > tol) off.push_back(i);
  }
  if (off.empty()) return out;
  out.empty = false;
  out.first = off.front();
  out.last = off.back();
  const double kappa = q1[out.first];
  for (std::size_t i = out.first; i <= out.last; ++i) {
    if (std::abs(q1[i] - kappa) > tol) throw NotOfForm("q1 is not constant on the pooled interval", i);
  }
  out.gamma_lo = g[out.first];
  out.gamma_hi = g[out.last];
  if (!(out.gamma_hi > out.gamma_lo + tol)) throw NotOfForm("conjugate has no jump on the interval", out.first);
  if (!(kappa > out.gamma_lo - tol && kappa < out.gamma_hi + tol)) {
    throw NotOfForm("pooled level outside the conjugate's steps", out.first);
  }
  // Two steps, allowing one cell that straddles the jump.
  std::size_t low_cells = 0, straddle = 0;
  for (std::size_t i = out.first; i <= out.last; ++i) {
    if (std::abs(g[i] - out.gamma_lo) <= tol) {
      ++low_cells;
    } else if (std::abs(g[i] - out.gamma_hi) > tol) {
      if (++straddle > 1) throw NotOfForm("conjugate has more than two steps on the interval", i);
    }
  }
  if (out.first > 0 && q1[out.first - 1] > out.gamma_lo + tol) throw NotOfForm("q1 exceeds the lower step", out.first - 1);
  if (out.last + 1 < m && q1[out.last + 1] < out.gamma_hi - tol) throw NotOfForm("q1 below the upper step", out.last + 1);

  out.lambda = (kappa - out.gamma_lo) / (out.gamma_hi - out.gamma_lo);
  out.z_lo = static_cast<double>(out.first) / static_cast<double>(m);
  out.z_hi = static_cast<double>(out.last + 1) / static_cast<double>(m);
  const double jump = (1.0 - out.lambda) * out.z_hi + out.lambda * out.z_lo;
  const double observed = out.z_lo + static_cast<double>(low_cells) / static_cast<double>(m);
  if (std::abs(jump - observed) > 1.0 / static_cast<double>(m) + tol) {
    throw NotOfForm("jump of the conjugate is misplaced", out.first + low_cells);
  }
  return out;
}

WeakExtremeReport extreme_check_weak_majorization(const StepFunction1D& q1, const StepFunction1D& q2, double tol) {
  StepFunction1D g = conjugate(q2, q1.size());
  const std::size_t m = q1.size();
  std::size_t k = 0;
  for (std::size_t i = m; i-- > 0;) {
    if (std::abs(q1[i] - g[i]) > tol) {
      k = i + 1;
      break;
    }
  }
  WeakExtremeReport rep;
  rep.k_index = k;
  rep.k = static_cast<double>(k) / static_cast<double>(m);
  rep.extreme = true;
  for (std::size_t i = 0; i < k; ++i) {
    if (std::abs(q1[i]) > tol) rep.extreme = false;
  }
  return rep;
}

std::optional<std::pair<std::vector<StepFunction1D>, std::vector<StepFunction1D>>> majorization_perturbation(
    const StepFunction1D& q1, const StepFunction1D& q2) {
  if (extreme_check_joint_majorization(q1, q2)) return std::nullopt;
  const Shape shape({static_cast<int>(q1.size()), static_cast<int>(q2.size())});
  LpProblem p = marginal_polytope(shape, {q1.values(), q2.values()}, true);
  LpSolution s = solve_lp(p);
  if (!s.optimal()) throw NotRationalizable("pair is not rationalizable");
  for (double& v : s.x) v = std::clamp(v, 0.0, 1.0);
  GridFunction f(shape, s.x);
  NestingRepresentation rep = nesting_decompose(f, 1e-9);

  std::vector<double> u(shape.size(), 0.0);
  double room;
  if (rep.sets.size() >= 2) {
    for (std::size_t i = 0; i < shape.size(); ++i) u[i] = double(rep.sets[0].contains(i)) - double(rep.sets[1].contains(i));
    room = std::min(rep.weights[0], rep.weights[1]);
  } else if (rep.sets.size() == 1 && rep.levels[0] < 1.0 - 1e-9) {
    for (std::size_t i = 0; i < shape.size(); ++i) u[i] = rep.sets[0].contains(i);
    room = std::min(rep.levels[0], 1.0 - rep.levels[0]);
  } else {
    return std::nullopt;
  }
  const double eps = 0.5 * room;
  auto shifted = [&](double sign) {
    std::vector<double> v(shape.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(f[i] + sign * eps * u[i], 0.0, 1.0);
    std::vector<StepFunction1D> out;
    for (auto& m : marginals(GridFunction(shape, v))) {
      for (std::size_t k = 1; k < m.size(); ++k) m[k] = std::max(m[k], m[k - 1]);
      out.emplace_back(std::move(m));
    }
    return out;
  };
  return std::make_pair(shifted(1.0), shifted(-1.0));
}

AdditiveCertificate is_additive_set(const UpSet& a) {
  const Shape& s = a.shape();
  if (s.rank() > 3) throw InvalidArgument("additivity test supports up to three axes");
  std::vector<std::size_t> offset(s.rank() + 1, 0);
  for (int ax = 0; ax < s.rank(); ++ax) offset[ax + 1] = offset[ax] + s.dim(ax);
  LpProblem p = LpProblem::with_variables(offset.back(), -kInf, kInf);
  for (int ax = 0; ax < s.rank(); ++ax) {
    for (int k = 0; k + 1 < s.dim(ax); ++k) {
      std::size_t v = offset[ax] + k;
      if (ax == 0) {
        p.add_constraint({{{v + 1, 1.0}, {v, -1.0}}, Relation::ge, 1e-3});
      } else {
        p.add_constraint({{{v, 1.0}, {v + 1, -1.0}}, Relation::le, 0.0});
      }
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    LinearConstraint c;
    for (int ax = 0; ax < s.rank(); ++ax) c.terms.emplace_back(offset[ax] + s.coord(i, ax), 1.0);
    c.relation = a.contains(i) ? Relation::ge : Relation::le;
    c.rhs = a.contains(i) ? 0.0 : -1.0;
    p.add_constraint(std::move(c));
  }
  LpSolution sol = solve_lp(p);
  AdditiveCertificate cert;
  cert.additive = sol.optimal();
  if (!cert.additive) return cert;
  for (int ax = 0; ax < s.rank(); ++ax) {
    cert.phi.emplace_back(sol.x.begin() + static_cast<long>(offset[ax]), sol.x.begin() + static_cast<long>(offset[ax + 1]));
  }
  double in_min = kInf, out_max = -kInf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double v = 0.0;
    for (int ax = 0; ax < s.rank(); ++ax) v += cert.phi[ax][s.coord(i, ax)];
    if (a.contains(i)) in_min = std::min(in_min, v);
    else out_max = std::max(out_max, v);
  }
  cert.margin = std::isfinite(in_min) && std::isfinite(out_max) ? in_min - out_max : 1.0;
  return cert;
}

ExposingFunctional exposing_functional(const UpSet& a) {
  if (a.shape().rank() != 2) throw InvalidArgument("exposing functional needs a 2-d up-set");
  const double m2 = a.shape().dim(1);
  ExposingFunctional e;
  for (int g : a.boundary()) e.phi1.push_back(-g / m2);
  for (int j = 0; j < a.shape().dim(1); ++j) e.phi2.push_back(j / m2);
  return e;
}

}  // namespace monoext
