#include "monoext/ppi.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "monoext/rationalize.hpp"

namespace monoext {

namespace {

void add_exchangeability_rows(LpProblem& p, const Shape& shape) {
  for (int a = 0; a + 1 < shape.rank(); ++a) {
    for (std::size_t x = 0; x < shape.size(); ++x) {
      auto c = shape.coords(x);
      std::swap(c[a], c[a + 1]);
      const std::size_t y = shape.index(c);
      if (y > x) p.add_constraint({{{x, 1.0}, {y, -1.0}}, Relation::eq, 0.0});
    }
  }
}

LpProblem belief_lp(const Shape& shape, const std::vector<double>& cell_objective, double prior) {
  LpProblem lp = LpProblem::over_grid(shape, true);
  lp.objective = cell_objective;
  LinearConstraint mean{{}, Relation::eq, prior * static_cast<double>(shape.size())};
  for (std::size_t x = 0; x < shape.size(); ++x) mean.terms.emplace_back(x, 1.0);
  lp.add_constraint(std::move(mean));
  return lp;
}

// Reads the bi-upset off an LP vertex; throws StructureViolation otherwise.
BiUpsetSignal bi_upset_from(const Shape& shape, const std::vector<double>& x, double prior) {
  std::vector<char> top(shape.size()), support(shape.size());
  double lo = kInf, hi = -kInf;
  for (std::size_t c = 0; c < shape.size(); ++c) {
    const double v = std::clamp(x[c], 0.0, 1.0);
    top[c] = v > 1.0 - 1e-9;
    support[c] = v >= 1e-9;
    if (support[c] && !top[c]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo > 1e-7) throw StructureViolation("vertex has more than one fractional level");
  BiUpsetSignal sig;
  try {
    sig = BiUpsetSignal::with_prior(UpSet(shape, top), UpSet(shape, support), prior);
  } catch (const NotMonotone& e) {
    throw StructureViolation(std::string("level set is not an up-set: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw StructureViolation(e.what());
  }
  const GridFunction f = sig.signal();
  for (std::size_t c = 0; c < shape.size(); ++c) {
    if (std::abs(f[c] - x[c]) > 1e-6) throw StructureViolation("bi-upset does not reproduce the vertex");
  }
  return sig;
}

// Solves, reads the bi-upset, and retries once with a tiny random tiebreak.
BiUpsetSignal solve_for_bi_upset(LpProblem lp, double prior, std::uint64_t seed) {
  const Shape shape = lp.grid;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      std::mt19937_64 rng(seed ^ 0x7469656272656bULL);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double scale = 0.0;
      for (double v : lp.objective) scale = std::max(scale, std::abs(v));
      for (std::size_t c = 0; c < shape.size(); ++c) lp.objective[c] += 1e-9 * std::max(scale, 1e-6) * u(rng);
    }
    const LpSolution sol = solve_lp(lp);
    if (!sol.optimal()) throw Infeasible(std::string("belief LP ended ") + to_string(sol.status));
    try {
      return bi_upset_from(shape, sol.x, prior);
    } catch (const StructureViolation&) {
      if (attempt == 1) throw;
    }
  }
  throw StructureViolation("unreachable");
}

void check_weights(const Shape& shape, const std::vector<std::vector<double>>& w) {
  if (static_cast<int>(w.size()) != shape.rank()) throw LengthMismatch("one weight profile per receiver");
  for (int a = 0; a < shape.rank(); ++a) {
    if (static_cast<int>(w[a].size()) != shape.dim(a)) throw LengthMismatch("weight profile length");
  }
}

void check_prior(double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw InvalidArgument("prior must lie in (0, 1)");
}

std::vector<double> cell_objective(const Shape& shape, const std::vector<std::vector<double>>& w) {
  std::vector<double> c(shape.size(), 0.0);
  const double n = static_cast<double>(shape.size());
  for (std::size_t x = 0; x < shape.size(); ++x) {
    for (int a = 0; a < shape.rank(); ++a) c[x] += w[a][shape.coord(x, a)] / n;
  }
  return c;
}

}  // namespace

bool check_feasible_beliefs(const std::vector<StepFunction1D>& q, double prior) {
  if (q.empty()) throw InvalidArgument("need at least one belief quantile");
  return std::abs(q[0].mean() - prior) <= 1e-9 && is_rationalizable(q);
}

BiUpsetSignal BiUpsetSignal::with_prior(UpSet a1, UpSet a2, double prior) {
  if (!(a1.shape() == a2.shape())) throw InvalidArgument("up-sets live on different grids");
  if (!a1.subset_of(a2)) throw InvalidArgument("up-sets are not nested");
  const double n = static_cast<double>(a1.shape().size());
  const double inner = static_cast<double>(a1.count());
  const double ring = static_cast<double>(a2.count()) - inner;
  double lambda = 1.0;
  if (ring == 0.0) {
    if (std::abs(inner - prior * n) > 1e-9 * n) throw InvalidArgument("single up-set does not match the prior");
  } else {
    lambda = (prior * n - inner) / ring;
    if (lambda < -1e-12 || lambda > 1.0 + 1e-12) throw InvalidArgument("no weight in [0,1] matches the prior");
    lambda = std::clamp(lambda, 0.0, 1.0);
  }
  return {std::move(a1), std::move(a2), lambda};
}

GridFunction BiUpsetSignal::signal() const {
  std::vector<double> v(a1.shape().size());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = a1.contains(c) ? 1.0 : a2.contains(c) ? lambda : 0.0;
  return GridFunction(a1.shape(), std::move(v));
}

std::vector<StepFunction1D> BiUpsetSignal::beliefs() const { return monotone_marginals(signal()); }

PpiLinearResult solve_ppi_linear(const Shape& shape, const std::vector<std::vector<double>>& weights, double prior) {
  check_prior(prior);
  check_weights(shape, weights);
  LpProblem lp = belief_lp(shape, cell_objective(shape, weights), prior);
  PpiLinearResult res;
  res.symmetric = shape.rank() > 1 && std::all_of(weights.begin(), weights.end(),
                                                  [&](const auto& w) { return w == weights[0]; });
  if (res.symmetric) add_exchangeability_rows(lp, shape);
  res.signal = solve_for_bi_upset(lp, prior, 0);
  res.beliefs = res.signal.beliefs();
  for (int a = 0; a < shape.rank(); ++a) {
    double s = 0.0;
    for (int k = 0; k < shape.dim(a); ++k) s += weights[a][k] * res.beliefs[a][k];
    res.objective += s / shape.dim(a);
  }
  return res;
}

PoolingImplementation pooling_implementation(const BiUpsetSignal& sig) {
  const Shape& shape = sig.a1.shape();
  if (shape.rank() != 2) throw InvalidArgument("pooling implementation needs two receivers");
  const int m0 = shape.dim(0), m1 = shape.dim(1);
  int lo[2] = {m0, m1}, hi[2] = {-1, -1};
  std::size_t ring = 0;
  for (std::size_t c = 0; c < shape.size(); ++c) {
    if (!sig.a2.contains(c) || sig.a1.contains(c)) continue;
    ++ring;
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], shape.coord(c, a));
      hi[a] = std::max(hi[a], shape.coord(c, a));
    }
  }
  if (ring > 0 && ring != static_cast<std::size_t>(hi[0] - lo[0] + 1) * static_cast<std::size_t>(hi[1] - lo[1] + 1))
    throw NotRectangle("difference of the up-sets is not a box");

  PoolingImplementation out;
  const auto g1 = sig.a1.boundary(), g2 = sig.a2.boundary();
  out.boundary.resize(static_cast<std::size_t>(m0));
  std::vector<double> base(shape.size());
  for (int i = 0; i < m0; ++i) {
    const double g = ring == 0 ? g1[i] : (1.0 - sig.lambda) * g1[i] + sig.lambda * g2[i];
    out.boundary[static_cast<std::size_t>(i)] = g;
    for (int j = 0; j < m1; ++j) base[static_cast<std::size_t>(i) * m1 + j] = std::clamp(j + 1.0 - g, 0.0, 1.0);
  }
  out.base = GridFunction(shape, base);
  std::vector<double> pooled = base;
  if (ring > 0) {
    out.pool_first = lo[1];
    out.pool_last = hi[1];
    out.pool = {static_cast<double>(lo[1]) / m1, static_cast<double>(hi[1] + 1) / m1};
    for (int i = 0; i < m0; ++i) {
      double s = 0.0;
      for (int j = lo[1]; j <= hi[1]; ++j) s += base[static_cast<std::size_t>(i) * m1 + j];
      s /= hi[1] - lo[1] + 1;
      for (int j = lo[1]; j <= hi[1]; ++j) pooled[static_cast<std::size_t>(i) * m1 + j] = s;
    }
  }
  out.pooled = GridFunction(shape, std::move(pooled));

  const GridFunction f = sig.signal();
  if (std::abs(out.base.mean() - f.mean()) > 1e-9) throw TheoremViolation("pooling base changes the prior");
  const auto want = marginals(f), got = marginals(out.pooled);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t k = 0; k < want[a].size(); ++k) {
      if (std::abs(want[a][k] - got[a][k]) > 1e-9) throw TheoremViolation("pooled signal changes the beliefs");
    }
  }
  return out;
}

double ThresholdObjective::evaluate(const std::vector<StepFunction1D>& beliefs) const {
  if (beliefs.size() != thresholds.size() || beliefs.size() != weights.size())
    throw LengthMismatch("one threshold and weight per receiver");
  double total = 0.0;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    std::size_t hits = 0;
    for (double v : beliefs[i].values()) hits += v >= thresholds[i] - 1e-12 ? 1 : 0;
    total += weights[i] * static_cast<double>(hits) / static_cast<double>(beliefs[i].size());
  }
  return total;
}

PpiThresholdResult solve_ppi_threshold(const Shape& shape, const ThresholdObjective& obj, double prior,
                                       const PpiProbeOptions& opt) {
  check_prior(prior);
  const int n = shape.rank();
  if (static_cast<int>(obj.thresholds.size()) != n || static_cast<int>(obj.weights.size()) != n)
    throw LengthMismatch("one threshold and weight per receiver");
  for (double t : obj.thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("thresholds must lie in (0, 1)");
  }
  constexpr double kTilt = 1e-3;

  // Per receiver: -1 = no reward, otherwise the first rewarded cell.
  std::vector<std::vector<int>> starts(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const int m = shape.dim(a);
    const int r = std::clamp(m - static_cast<int>(std::floor(prior * m / obj.thresholds[a] + 1e-9)), 0, m - 1);
    starts[a] = {-1, r};
    if (r + 1 < m) starts[a].push_back(r + 1);
    if (r > 0) starts[a].push_back(r - 1);
  }

  PpiThresholdResult best;
  best.objective = -kInf;
  std::size_t probe_index = 0;
  auto run = [&](const std::vector<std::vector<double>>& profile, std::string label) {
    LpProblem lp = belief_lp(shape, cell_objective(shape, profile), prior);
    BiUpsetSignal sig = solve_for_bi_upset(std::move(lp), prior, opt.seed + probe_index);
    ++probe_index;
    auto beliefs = sig.beliefs();
    const double value = obj.evaluate(beliefs);
    best.log.push_back({std::move(label), value});
    if (value > best.objective + 1e-12) {
      best.objective = value;
      best.signal = std::move(sig);
      best.beliefs = std::move(beliefs);
    }
  };

  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  while (probe_index < opt.budget) {
    std::vector<std::vector<double>> profile(static_cast<std::size_t>(n));
    std::string label = "step";
    for (int a = 0; a < n; ++a) {
      const int m = shape.dim(a);
      const int r = starts[a][pick[a]];
      profile[a].resize(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k)
        profile[a][k] = (r >= 0 && k >= r ? obj.weights[a] : 0.0) - kTilt * k / m;
      label += r < 0 ? " off" : " " + std::to_string(r);
    }
    run(profile, std::move(label));
    int a = 0;
    while (a < n && ++pick[a] == starts[a].size()) pick[a++] = 0;
    if (a == n) break;
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (probe_index < opt.budget) {
    std::vector<std::vector<double>> profile(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      profile[a].resize(static_cast<std::size_t>(shape.dim(a)));
      for (double& v : profile[a]) v = u(rng);
    }
    run(profile, "random");
  }
  return best;
}

}  // namespace monoext
