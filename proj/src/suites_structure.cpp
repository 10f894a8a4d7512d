#include <algorithm>
#include <cmath>
#include <set>

#include "monoext/oracle.hpp"
#include "monoext/rationalize.hpp"
#include "suites_internal.hpp"

namespace monoext::suite_detail {

namespace {

// Cumulative maxima of random draws from `levels` + 1 lattice values (or
// continuous values when levels == 0) along every axis.
GridFunction random_monotone(std::mt19937_64& rng, const Shape& s, int levels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(s.size());
  for (double& x : v) x = levels == 0 ? u(rng) : std::floor(u(rng) * (levels + 1)) / levels;
  for (double& x : v) x = std::min(x, 1.0);
  for (int pass = 0; pass <= s.rank(); ++pass)
    for (const auto& p : cover_pairs(s)) v[p.hi] = std::max(v[p.hi], v[p.lo]);
  return GridFunction(s, v);
}

std::vector<StepFunction1D> steps(const std::vector<std::vector<double>>& q) {
  std::vector<StepFunction1D> out;
  for (const auto& v : q) out.emplace_back(v, 1e-12);
  return out;
}

std::vector<double> distinct_positive(const GridFunction& f, double tol) {
  std::vector<double> v;
  for (double x : f.values())
    if (x > tol) v.push_back(x);
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

double max_marginal_error(const GridFunction& f, const std::vector<std::vector<double>>& q) {
  const auto m = marginals(f);
  double err = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a)
    for (std::size_t k = 0; k < q[a].size(); ++k) err = std::max(err, std::abs(m[a][k] - q[a][k]));
  return err;
}

}  // namespace

void nesting(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 1);
  constexpr int kGrids = 1000, kMaxSide = 16;
  std::size_t cells = 0, max_levels = 0;
  for (int t = 0; t < kGrids; ++t) {
    const int n = 1 + t % 3;
    std::vector<int> dims(n);
    for (int& d : dims) d = 1 + static_cast<int>(rng() % kMaxSide);
    const Shape shape(dims);
    const int levels = static_cast<int>(rng() % 9);  // 0 = continuous values
    const GridFunction f = random_monotone(rng, shape, levels);
    cells += shape.size();
    const NestingRepresentation rep = nesting_decompose(f, 0.0);
    max_levels = std::max(max_levels, rep.sets.size());
    const auto tag = [&] { return "grid " + std::to_string(t) + " (" + shape.to_string() + ")"; };

    r.expect_lazy(rep.reconstruct().max_abs_diff(f) == 0.0, [&] { return tag() + ": reconstruction is not exact"; });
    // The representation is forced: levels are the distinct positive values
    // in increasing order and every set is the matching super-level set.
    const auto values = distinct_positive(f, 0.0);
    r.expect_lazy(rep.levels == values, [&] { return tag() + ": levels differ from the positive values of f"; });
    bool sets_ok = rep.sets.size() == rep.levels.size() && rep.weights.size() == rep.levels.size();
    for (std::size_t j = 0; sets_ok && j < rep.sets.size(); ++j) {
      for (std::size_t x = 0; x < f.size(); ++x) sets_ok = sets_ok && rep.sets[j].contains(x) == (f[x] >= rep.levels[j]);
      sets_ok = sets_ok && rep.weights[j] > 0.0;
      if (j > 0) sets_ok = sets_ok && rep.sets[j].subset_of(rep.sets[j - 1]) && !(rep.sets[j] == rep.sets[j - 1]);
    }
    r.expect_lazy(sets_ok, [&] { return tag() + ": sets are not the strictly nested super-level sets"; });
    double mix = 0.0;
    const auto sum = rep.mixture_sum();
    for (std::size_t x = 0; x < f.size(); ++x) mix = std::max(mix, std::abs(sum[x] - f[x]));
    r.expect_lazy(mix <= 1e-12, [&] { return tag() + ": mixture sum off by " + fmt(mix); });
  }
  r.metrics = {{"grids", kGrids}, {"cells", cells}, {"max_levels", max_levels}};
}

void choquet(SuiteReport& r) {
  constexpr double kTol = 1e-9;
  nlohmann::json counts = nlohmann::json::object();
  for (const Shape& shape : {Shape({2, 2}), Shape({2, 3})}) {
    const auto verts = oracle::brute_force_vertices(LpProblem::over_grid(shape, true));
    const auto ups = oracle::enumerate_upsets(shape);
    std::set<std::vector<char>> from_vertices, from_upsets(ups.begin(), ups.end());
    for (const auto& v : verts) {
      std::vector<char> mask(v.size());
      bool binary = true;
      for (std::size_t k = 0; k < v.size(); ++k) {
        binary = binary && (std::abs(v[k]) <= kTol || std::abs(v[k] - 1.0) <= kTol);
        mask[k] = v[k] > 0.5;
      }
      r.expect(binary, shape.to_string() + ": vertex with a fractional coordinate");
      from_vertices.insert(mask);
    }
    r.expect(verts.size() == from_vertices.size(), shape.to_string() + ": duplicate vertices");
    r.expect(from_vertices == from_upsets, shape.to_string() + ": vertex set differs from the up-set indicators");
    counts[shape.to_string()] = {{"vertices", verts.size()}, {"upsets", ups.size()}};
  }
  r.expect(counts["2x2"]["vertices"] == 6, "2x2 should have 6 vertices");
  r.expect(counts["2x3"]["vertices"] == 10, "2x3 should have 10 vertices");
  r.metrics = counts;
}

void vertices(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kTrials = 200, kSide = 12;
  constexpr double kLevelTol = 1e-7;
  const Shape shape({kSide, kSide});
  std::size_t binding_rows = 0, fractional_instances = 0, max_levels = 0;
  for (int t = 0; t < kTrials; ++t) {
    const int m = 1 + t % 2;
    LpProblem lp = LpProblem::over_grid(shape, true);
    for (double& c : lp.objective) c = u(rng) - 0.3;
    for (int row = 0; row < m; ++row) {
      LinearConstraint c;
      c.relation = Relation::le;
      double total = 0.0;
      for (std::size_t x = 0; x < shape.size(); ++x) {
        const double a = u(rng);
        c.terms.emplace_back(x, a);
        total += a;
      }
      c.rhs = (0.15 + 0.5 * u(rng)) * total;
      lp.add_constraint(c);
    }
    const auto tag = [&] { return "trial " + std::to_string(t) + " (m = " + std::to_string(m) + ")"; };
    const LpSolution sol = solve_lp(lp);
    r.expect_lazy(sol.optimal(), [&] { return tag() + ": LP status " + to_string(sol.status); });
    if (!sol.optimal()) continue;
    std::vector<double> x = sol.x;
    for (double& v : x) {
      v = std::clamp(v, 0.0, 1.0);
      if (v <= kLevelTol) v = 0.0;
      if (v >= 1.0 - kLevelTol) v = 1.0;
    }
    const GridFunction f(shape, x);
    const auto levels = distinct_positive(f, kLevelTol);
    max_levels = std::max(max_levels, levels.size());
    for (const auto& c : lp.constraints) binding_rows += std::abs(c.activity(sol.x) - c.rhs) <= 1e-7;
    fractional_instances += std::any_of(x.begin(), x.end(), [](double v) { return v > 0.0 && v < 1.0; });
    r.expect_lazy(static_cast<int>(levels.size()) <= m + 1,
                  [&] { return tag() + ": " + std::to_string(levels.size()) + " positive levels"; });
    // Super-level sets must be up-sets, and nested by construction.
    bool nested = true;
    for (double level : levels) {
      std::vector<char> mask(f.size());
      for (std::size_t k = 0; k < f.size(); ++k) mask[k] = f[k] >= level - kLevelTol;
      try {
        UpSet(shape, mask);
      } catch (const NotMonotone&) {
        nested = false;
      }
    }
    r.expect_lazy(nested, [&] { return tag() + ": a level set is not an up-set"; });
    r.expect_lazy(is_vertex(sol.x, lp).vertex, [&] { return tag() + ": optimum is not a vertex"; });
  }
  r.metrics = {{"trials", kTrials},
               {"binding_rows", binding_rows},
               {"instances_with_fractional_values", fractional_instances},
               {"max_positive_levels", max_levels}};
  r.expect(fractional_instances >= kTrials / 2, "too few instances exercise fractional levels");
}

void gutmann(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kPairs = 300, kCells = 6;
  constexpr double kResidualTol = 1e-6, kMonotoneTol = 1e-6;
  int yes = 0, no = 0;
  double worst_residual = 0.0;
  for (int t = 0; t < kPairs; ++t) {
    std::vector<double> q1(kCells), q2(kCells);
    if (t % 2 == 0) {
      const auto q = marginals(random_monotone(rng, Shape({kCells, kCells}), 7));
      q1 = q[0];
      q2 = q[1];
    } else {
      for (double& v : q1) v = u(rng);
      for (double& v : q2) v = u(rng);
      std::sort(q1.begin(), q1.end());
      std::sort(q2.begin(), q2.end());
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < kCells; ++k) {
        s1 += q1[k];
        s2 += q2[k];
      }
      auto& big = s1 > s2 ? q1 : q2;
      for (double& v : big) v *= std::min(s1, s2) / std::max(s1, s2);
    }
    const auto tag = [&] { return "pair " + std::to_string(t); };
    const auto q = steps({q1, q2});
    const bool verdict = check_majorization(q[0], conjugate(q[1])).holds;
    const bool truth = oracle::brute_force_rationalizable({q1, q2});
    r.expect_lazy(verdict == truth, [&] { return tag() + ": majorization says " + (verdict ? "yes" : "no"); });
    r.expect_lazy(is_rationalizable(q) == truth, [&] { return tag() + ": is_rationalizable disagrees"; });
    (truth ? yes : no)++;
    if (!truth) continue;
    const RationalizerResult rat = monotone_rationalizer_run(q);
    const double residual = max_marginal_error(rat.f, {q1, q2});
    worst_residual = std::max(worst_residual, residual);
    r.expect_lazy(is_monotone(rat.f, kMonotoneTol), [&] { return tag() + ": rationalizer is not monotone"; });
    r.expect_lazy(residual <= kResidualTol, [&] { return tag() + ": marginal residual " + fmt(residual); });
  }
  r.expect(yes >= 30 && no >= 30, "both verdicts need at least 30 pairs");
  r.metrics = {{"pairs", kPairs}, {"rationalizable", yes}, {"not_rationalizable", no},
               {"worst_residual", worst_residual}};
}

void rectangle(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kTrials = 200, kSide = 20;
  const Shape shape({kSide, kSide});
  int with_rectangle = 0, binding = 0;
  for (int t = 0; t < kTrials; ++t) {
    const auto tag = [&] { return "trial " + std::to_string(t); };
    SeparableObjective obj = random_separable_objective(rng(), shape);
    LpProblem lp = LpProblem::over_grid(shape, true);
    lp.objective = obj.array;
    LpSolution free = solve_lp(lp);
    if (free.optimal() && std::all_of(free.x.begin(), free.x.end(), [](double v) { return v <= 1e-9; })) {
      for (double& c : lp.objective) c = -c;
      free = solve_lp(lp);
    }
    r.expect_lazy(free.optimal(), [&] { return tag() + ": unconstrained LP failed"; });
    if (!free.optimal()) continue;
    // Separable weights a(x) = u1(x1) + u2(x2) > 0, with the budget set to half
    // of what the unconstrained optimum uses so the row binds.
    std::vector<double> u1(kSide), u2(kSide);
    for (double& v : u1) v = 0.1 + u(rng);
    for (double& v : u2) v = 0.1 + u(rng);
    LinearConstraint c;
    c.relation = Relation::le;
    double used = 0.0;
    for (std::size_t x = 0; x < shape.size(); ++x) {
      const double a = u1[shape.coord(x, 0)] + u2[shape.coord(x, 1)];
      c.terms.emplace_back(x, a);
      used += a * free.x[x];
    }
    c.rhs = (0.3 + 0.4 * u(rng)) * used;
    lp.add_constraint(c);
    const LpSolution sol = solve_lp(lp);
    r.expect_lazy(sol.optimal(), [&] { return tag() + ": constrained LP failed"; });
    if (!sol.optimal()) continue;
    binding += std::abs(lp.constraints[0].activity(sol.x) - c.rhs) <= 1e-7;
    std::vector<double> x = sol.x;
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
    const GridFunction f(shape, x);
    const RectangleDecomposition d = detect_rectangle_structure(f);
    r.expect_lazy(d.valid, [&] { return tag() + ": no rectangle structure (" + d.reason + ")"; });
    with_rectangle += d.valid && d.has_rectangle;
    const UniquenessReport uq = unique_rationalization_check(f, true);
    r.expect_lazy(uq.unique, [&] { return tag() + ": not unique among monotone functions"; });
  }
  r.expect(binding == kTrials, "the separable row should bind in every trial");
  r.metrics = {{"trials", kTrials}, {"binding", binding}, {"with_fractional_rectangle", with_rectangle}};
}

void extremes(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kM = 100, kSynth = 30, kCases = 100;
  const double cell = 1.0 / kM;
  // Nondecreasing lattice staircase with `pieces` constant runs.
  auto staircase = [&](int pieces, std::vector<int>* breaks) {
    std::vector<int> cuts{0, kM};
    while (static_cast<int>(cuts.size()) < pieces + 1) {
      const int c = 5 + static_cast<int>(rng() % (kM - 9));
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> vals;
    while (static_cast<int>(vals.size()) < pieces) {
      const int v = 1 + static_cast<int>(rng() % (kM - 1));
      if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
    }
    std::sort(vals.begin(), vals.end());
    std::vector<double> g(kM);
    for (int p = 0; p < pieces; ++p)
      for (int k = cuts[p]; k < cuts[p + 1]; ++k) g[k] = vals[p] * cell;
    if (breaks) *breaks = cuts;
    return g;
  };

  int binding = 0, truncated = 0, pooled = 0;
  for (int t = 0; t < kSynth; ++t) {
    std::vector<int> cuts;
    const std::vector<double> ghat = staircase(3 + static_cast<int>(rng() % 4), &cuts);
    const StepFunction1D q2 = conjugate(StepFunction1D(ghat));
    const StepFunction1D back = conjugate(q2);
    double inv = 0.0;
    for (int k = 0; k < kM; ++k) inv = std::max(inv, std::abs(back[k] - ghat[k]));
    r.expect_lazy(inv <= 1e-12, [&] { return "instance " + std::to_string(t) + ": conjugate is not an involution"; });

    // binding: q1 is the conjugate itself
    const StepFunction1D q1b(ghat);
    r.expect(extreme_check_joint_majorization(q1b, q2), "binding instance not extreme");
    r.expect(square_majorization_structure(q1b, q2).empty, "binding instance reports a pooled interval");
    ++binding;

    // truncated at a cell boundary K
    const int K = 5 + static_cast<int>(rng() % (kM - 10));
    std::vector<double> cut = ghat;
    std::fill(cut.begin(), cut.begin() + K, 0.0);
    const WeakExtremeReport w = extreme_check_weak_majorization(StepFunction1D(cut), q2);
    r.expect_lazy(w.extreme, [&] { return "truncated instance " + std::to_string(t) + " not extreme"; });
    r.expect_lazy(std::abs(w.k - K * cell) <= cell + 1e-12, [&] {
      return "truncated instance " + std::to_string(t) + ": k = " + fmt(w.k) + ", expected " + fmt(K * cell);
    });
    r.expect(check_majorization(StepFunction1D(cut), conjugate(q2), true).holds, "truncated pair not weakly majorized");
    ++truncated;

    // pooled over two adjacent runs [a, b) and [b, c) of the conjugate
    const std::size_t p = rng() % (cuts.size() - 2);
    const int a = cuts[p], b = cuts[p + 1], c = cuts[p + 2];
    std::vector<double> pool = ghat;
    const double lo = ghat[a], hi = ghat[b];
    const double kappa = ((b - a) * lo + (c - b) * hi) / (c - a);
    std::fill(pool.begin() + a, pool.begin() + c, kappa);
    try {
      const SquareStructure sq = square_majorization_structure(StepFunction1D(pool), q2);
      const double lambda = static_cast<double>(c - b) / (c - a);
      const double jump = (1.0 - sq.lambda) * sq.z_hi + sq.lambda * sq.z_lo;
      const bool ok = !sq.empty && std::abs(sq.z_lo - a * cell) <= cell + 1e-12 &&
                      std::abs(sq.z_hi - c * cell) <= cell + 1e-12 && std::abs(sq.gamma_lo - lo) <= 1e-12 &&
                      std::abs(sq.gamma_hi - hi) <= 1e-12 && std::abs(jump - b * cell) <= cell + 1e-12 &&
                      std::abs(sq.lambda - lambda) <= 1e-9;
      r.expect_lazy(ok, [&] {
        return "pooled instance " + std::to_string(t) + ": recovered (" + fmt(sq.z_lo) + ", " + fmt(sq.z_hi) +
               ", lambda " + fmt(sq.lambda) + ")";
      });
      r.expect(check_majorization(StepFunction1D(pool), conjugate(q2)).holds, "pooled pair not majorized");
      ++pooled;
    } catch (const NotOfForm& e) {
      r.expect(false, "pooled instance " + std::to_string(t) + ": " + e.what());
    }
  }

  // Random rationalizable pairs: every non-extreme one has a witness.
  int non_extreme = 0;
  for (int t = 0; t < kCases; ++t) {
    const Shape shape({3 + static_cast<int>(rng() % 10), 3 + static_cast<int>(rng() % 10)});
    const auto q = marginals(random_monotone(rng, shape, 1 + static_cast<int>(rng() % 5)));
    const StepFunction1D q1(q[0], 1e-12), q2(q[1], 1e-12);
    const bool extreme = extreme_check_joint_majorization(q1, q2);
    const auto pert = majorization_perturbation(q1, q2);
    const auto tag = [&] { return "case " + std::to_string(t); };
    if (extreme) {
      r.expect_lazy(!pert.has_value(), [&] { return tag() + ": witness returned for an extreme pair"; });
      continue;
    }
    ++non_extreme;
    r.expect_lazy(pert.has_value(), [&] { return tag() + ": no perturbation witness"; });
    if (!pert) continue;
    const auto& [plus, minus] = *pert;
    double avg = 0.0, dist = 0.0;
    for (int a = 0; a < 2; ++a) {
      const StepFunction1D& orig = a == 0 ? q1 : q2;
      for (std::size_t k = 0; k < orig.size(); ++k) {
        avg = std::max(avg, std::abs(0.5 * (plus[a][k] + minus[a][k]) - orig[k]));
        dist = std::max(dist, std::abs(plus[a][k] - orig[k]));
      }
    }
    r.expect_lazy(is_rationalizable(plus) && is_rationalizable(minus),
                  [&] { return tag() + ": witness leaves the rationalizable set"; });
    r.expect_lazy(avg <= 1e-12 && dist > 1e-6, [&] { return tag() + ": witness does not average to the pair"; });
  }
  r.expect(non_extreme >= 20, "too few non-extreme cases");
  r.metrics = {{"binding", binding}, {"truncated", truncated}, {"pooled", pooled},
               {"cases", kCases}, {"non_extreme_cases", non_extreme}};
}

void anti(SuiteReport& r) {
  auto rng = make_rng(r.seed(), 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kUpsets = 200, kStochastic = 50;
  constexpr double kWitnessTol = 1e-7;
  const Shape shape({8, 8});
  for (int t = 0; t < kUpsets; ++t) {
    std::vector<std::size_t> gens;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int g = 0; g < k; ++g) gens.push_back(rng() % shape.size());
    const UpSet a = UpSet::closure(shape, gens);
    r.expect_lazy(unique_rationalization_check(a.indicator(), false).unique,
                  [&] { return "up-set " + std::to_string(t) + ": feasible set is not a singleton"; });
  }

  // Positive mixtures of three random up-sets on 6x6, kept when the fractional
  // part is not a single rectangle.
  const Shape small({6, 6});
  int tested = 0, draws = 0;
  while (tested < kStochastic && draws < 10000) {
    ++draws;
    std::vector<double> f(small.size(), 0.0);
    double total = 0.0;
    for (int layer = 0; layer < 3; ++layer) {
      std::vector<std::size_t> gens;
      for (int g = 0; g < 2; ++g) gens.push_back(rng() % small.size());
      const UpSet a = UpSet::closure(small, gens);
      const double w = u(rng);
      total += w;
      for (std::size_t c = 0; c < small.size(); ++c) f[c] += w * a.contains(c);
    }
    for (double& v : f) v /= total;
    const GridFunction g(small, f);
    if (std::all_of(f.begin(), f.end(), [](double v) { return v <= 1e-9 || v >= 1.0 - 1e-9; })) continue;
    const RectangleDecomposition d = detect_rectangle_structure(g);
    if (d.valid) continue;
    ++tested;
    const auto tag = [&] { return "function " + std::to_string(tested) + " (draw " + std::to_string(draws) + ")"; };
    const UniquenessReport uq = unique_rationalization_check(g, false);
    r.expect_lazy(!uq.unique && uq.witness.has_value(), [&] { return tag() + ": no same-marginals witness"; });
    if (!uq.witness) continue;
    const GridFunction w(small, *uq.witness);
    const double err = max_marginal_error(w, marginals(g));
    r.expect_lazy(w.max_abs_diff(g) > 1e-6 && err <= kWitnessTol,
                  [&] { return tag() + ": witness is not a distinct same-marginals function"; });
  }
  r.expect(tested == kStochastic, "could not draw enough non-rectangle functions");
  r.metrics = {{"upsets", kUpsets}, {"stochastic_functions", tested}, {"draws", draws}};
}

}  // namespace monoext::suite_detail
