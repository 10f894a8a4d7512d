#include "monoext/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "monoext/io.hpp"
#include "monoext/ppi.hpp"
#include "monoext/pubgood.hpp"
#include "monoext/rationalize.hpp"
#include "monoext/rfauction.hpp"
#include "monoext/socialchoice.hpp"
#include "monoext/trade.hpp"

namespace monoext {

namespace {

using nlohmann::json;

// Thrown for semantic input errors that the schema cannot express.
[[noreturn]] void bad_input(const std::string& pointer, const std::string& message) {
  throw SchemaError({pointer, message});
}

// Largest cell count for the optional uniqueness verdicts.
constexpr std::size_t kUniquenessCellLimit = 1024;
constexpr double kSnapTol = 1e-6;

struct Context {
  const json& s;
  const RunOptions& opt;
  ScenarioRun run;

  std::string text_file(const std::string& rel) const {
    const std::filesystem::path p = opt.base_dir / rel;
    return read_text_file(p.string());
  }
  void add(std::string suffix, std::string content) { run.files.push_back({std::move(suffix), std::move(content)}); }
  void csv(const std::string& what, const GridFunction& f) { add("." + what + ".csv", grid_csv(f)); }
  void svg(const std::string& what, const GridFunction& f, const std::string& title, std::optional<CellBox> box) {
    if (!opt.svg || f.shape().rank() != 2) return;
    HeatmapOptions h;
    h.title = title;
    h.outline = box;
    h.cell_px = std::max(4, 480 / std::max(f.shape().dim(0), f.shape().dim(1)));
    add("." + what + ".svg", heatmap_svg(f, h));
  }
};

QuantileTransform read_distribution(const json& d, const std::string& ptr, const Context& ctx) {
  const std::string kind = d.at("kind").get<std::string>();
  try {
    if (kind == "uniform") return QuantileTransform::uniform(d.at("lo").get<double>(), d.at("hi").get<double>());
    if (kind == "truncated_normal")
      return QuantileTransform::truncated_normal(d.at("lo").get<double>(), d.at("hi").get<double>(),
                                                 d.at("mu").get<double>(), d.at("sigma").get<double>());
    if (kind == "truncated_lognormal")
      return QuantileTransform::truncated_lognormal(d.at("lo").get<double>(), d.at("hi").get<double>(),
                                                    std::log(d.at("median").get<double>()), d.at("sigma").get<double>());
    if (d.contains("csv")) return parse_cdf_csv(ctx.text_file(d.at("csv").get<std::string>()));
    return QuantileTransform::tabulated(d.at("x").get<std::vector<double>>(), d.at("cdf").get<std::vector<double>>());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    bad_input(ptr, e.what());
  }
}

GridFunction read_grid_function(const json& g, const std::string& ptr, const Context& ctx) {
  try {
    if (g.contains("csv")) return parse_grid_csv(ctx.text_file(g.at("csv").get<std::string>()));
    const Shape shape(g.at("dims").get<std::vector<int>>());
    auto values = g.at("values").get<std::vector<double>>();
    if (values.size() != shape.size())
      bad_input(ptr + "/values", "has " + std::to_string(values.size()) + " entries, dims ask for " +
                                     std::to_string(shape.size()));
    return GridFunction(shape, std::move(values));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    bad_input(ptr, e.what());
  }
}

Interval read_interval(const json& s, const char* key, Interval fallback) {
  if (!s.contains(key)) return fallback;
  const auto v = s.at(key).get<std::vector<double>>();
  if (!(v[1] > v[0])) bad_input(std::string("/") + key, "interval must have hi > lo");
  return {v[0], v[1]};
}

StepFunction1D read_step(const std::vector<double>& v, const std::string& ptr) {
  try {
    return StepFunction1D(v, 1e-12);
  } catch (const Error& e) {
    bad_input(ptr, e.what());
  }
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

std::vector<double> distinct_values(const GridFunction& f, double tol = 1e-9) {
  std::vector<double> v(f.values().begin(), f.values().end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

// Bounding box of the cells strictly between 0 and 1, and whether those cells
// fill it with one common value.
struct FractionalRegion {
  std::size_t cells = 0;
  CellBox box;
  bool single_box = false;
  std::vector<double> levels;
};
FractionalRegion fractional_region(const GridFunction& f, double tol = 1e-9) {
  FractionalRegion r;
  const Shape& shape = f.shape();
  if (shape.rank() != 2) return r;
  r.box.lo[0] = shape.dim(0);
  r.box.lo[1] = shape.dim(1);
  std::vector<double> frac;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] <= tol || f[x] >= 1.0 - tol) continue;
    ++r.cells;
    frac.push_back(f[x]);
    for (int a = 0; a < 2; ++a) {
      r.box.lo[a] = std::min(r.box.lo[a], shape.coord(x, a));
      r.box.hi[a] = std::max(r.box.hi[a], shape.coord(x, a));
    }
  }
  std::sort(frac.begin(), frac.end());
  for (double x : frac)
    if (r.levels.empty() || x - r.levels.back() > 1e-7) r.levels.push_back(x);
  const std::size_t area = r.cells == 0 ? 0
                                        : static_cast<std::size_t>(r.box.hi[0] - r.box.lo[0] + 1) *
                                              static_cast<std::size_t>(r.box.hi[1] - r.box.lo[1] + 1);
  r.single_box = r.cells > 0 && area == r.cells && r.levels.size() == 1;
  return r;
}

json box_json(const CellBox& b) {
  return {{"lo", json::array({b.lo[0], b.lo[1]})}, {"hi", json::array({b.hi[0], b.hi[1]})}};
}

std::optional<CellBox> rectangle_box(const RectangleDecomposition& d) {
  if (!d.valid || !d.has_rectangle) return std::nullopt;
  CellBox b;
  for (int a = 0; a < 2; ++a) {
    b.lo[a] = d.lo[a];
    b.hi[a] = d.hi[a];
  }
  return b;
}

json rectangle_json(const RectangleDecomposition& d) {
  json j{{"valid", d.valid}, {"has_rectangle", d.has_rectangle}};
  if (!d.valid) j["reason"] = d.reason;
  if (d.valid && d.has_rectangle) {
    j["lambda"] = d.lambda;
    j["lo"] = json::array({d.lo[0], d.lo[1]});
    j["hi"] = json::array({d.hi[0], d.hi[1]});
  }
  return j;
}

void run_public_good(Context& ctx) {
  const json& s = ctx.s;
  const int n = s.at("n").get<int>(), m = s.at("grid").get<int>();
  const double cost = s.at("cost").get<double>();
  const json& values = s.at("values");
  const std::string values_kind = values.at("kind").get<std::string>();
  const Interval domain = read_interval(s, "domain", {0.0, 1.0});

  DensitySpec spec;
  if (s.contains("density")) {
    const json& d = s.at("density");
    const std::string kind = d.at("kind").get<std::string>();
    if (kind != "uniform") {
      if (!d.contains("center")) bad_input("/density/center", "required for " + kind + " densities");
      if (!d.contains("sigma")) bad_input("/density/sigma", "required for " + kind + " densities");
      spec.kind = kind == "truncated_normal" ? DensityKind::truncated_normal : DensityKind::truncated_lognormal;
      const double center = d.at("center").get<double>();
      if (spec.kind == DensityKind::truncated_lognormal && !(center > 0.0))
        bad_input("/density/center", "lognormal median must be positive");
      spec.mu = spec.kind == DensityKind::truncated_lognormal ? std::log(center) : center;
      spec.sigma = d.at("sigma").get<double>();
    }
    spec.rho = d.value("rho", 0.0);
  }

  PublicGoodScenario scen;
  MechanismResult res;
  json policy;
  if (values_kind == "limited_negative") {
    if (n != 2) bad_input("/n", "limited negative externalities need two agents");
    if (domain.lo != 0.0 || domain.hi != 1.0) bad_input("/domain", "limited negative externalities live on [0,1]");
    const Shape shape({m, m});
    const std::vector<Interval> doms(2, domain);
    const auto density = density_table(shape, doms, spec);
    scen = PublicGoodScenario::limited_negative(m, density, cost);
    const RefundMechanism refund = solve_limited_negative_externality(m, density, cost);
    res = refund.result;
    policy = {{"form", "max_threshold_refund"}, {"k1", refund.k1}, {"k2", refund.k2}, {"p", refund.p}};
  } else {
    std::vector<int> dims(static_cast<std::size_t>(n), m);
    const Shape shape(dims);
    const std::vector<Interval> doms(static_cast<std::size_t>(n), domain);
    const auto density = density_table(shape, doms, spec);
    scen = PublicGoodScenario::linear_externality(shape, doms, density, values.at("w").get<double>(), cost);
    res = solve_public_good(scen);
    policy = {{"form", "two_threshold"},
              {"p", res.policy.p},
              {"k_low", res.policy.k_low},
              {"k_high", res.policy.k_high}};
  }

  const double ic_tol = 2.0 / m;
  const IcReport ic = verify_expost_ic(res.allocation, res.transfers, scen, ic_tol);
  const auto levels = distinct_values(res.allocation);
  const bool three_values = levels.size() <= 3 && std::all_of(levels.begin(), levels.end(), [&](double v) {
    return v <= 1e-9 || v >= 1.0 - 1e-9 || std::abs(v - levels[levels.size() == 3 ? 1 : 0]) <= 1e-9;
  });
  const bool monotone = is_monotone(res.allocation, 1e-9);
  const bool budget_ok = res.budget_slack >= -1e-7;

  json& r = ctx.run.result;
  r["objective"] = res.surplus;
  r["budget_slack"] = res.budget_slack;
  r["policy"] = policy;
  r["levels"] = levels;
  r["ic"] = {{"tolerance", ic_tol}, {"worst_gain", ic.worst}, {"worst_ir", ic.worst_ir}};
  r["verdicts"] = {{"monotone", monotone},
                   {"values_in_0_p_1", three_values},
                   {"expost_ic", ic.ok},
                   {"expost_ir", ic.worst_ir >= -1e-9},
                   {"budget", budget_ok}};
  r["parameters"] = {{"n", n}, {"grid", m}, {"domain", interval_json(domain)}, {"cost", cost}, {"values", values}};
  if (!(monotone && three_values && ic.ok && budget_ok)) ctx.run.exit_code = kExitStructural;

  ctx.csv("allocation", res.allocation);
  for (int i = 0; i < n; ++i)
    ctx.add(".transfers" + std::to_string(i + 1) + ".csv", grid_csv(res.allocation.shape(), res.transfers[i]));
  ctx.svg("allocation", res.allocation, "public good allocation", std::nullopt);
}

void run_bilateral_trade(Context& ctx) {
  const json& s = ctx.s;
  const json& gv = s.at("grid_v");
  const json& gc = s.at("grid_c");
  const int mv = gv.at("cells").get<int>(), mc = gc.at("cells").get<int>();
  const bool random = s.value("random", false);
  TradeScenario scen;
  if (random) {
    for (const char* key : {"G_B", "G_S", "weights_B", "weights_S"})
      if (s.contains(key)) bad_input(std::string("/") + key, "not allowed when random is true");
    scen = TradeScenario::random_instance(mv, mc, s.value("seed", std::uint64_t{0}));
    scen.v_domain = read_interval(gv, "domain", {0.0, 1.0});
    scen.c_domain = read_interval(gc, "domain", {0.0, 1.0});
  } else {
    for (const char* key : {"G_B", "G_S", "weights_B", "weights_S"})
      if (!s.contains(key)) bad_input(std::string("/") + key, "required unless random is true");
    const QuantileTransform g_b = read_distribution(s.at("G_B"), "/G_B", ctx);
    const QuantileTransform g_s = read_distribution(s.at("G_S"), "/G_S", ctx);
    const Interval v_dom = read_interval(gv, "domain", g_b.support());
    const Interval c_dom = read_interval(gc, "domain", g_s.support());
    auto weights = [&](const char* key, const QuantileTransform& g, int cells) {
      const json& w = s.at(key);
      if (w.is_string()) return g.cell_masses(cells);
      auto v = w.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != cells)
        bad_input(std::string("/") + key, "needs one entry per cell (" + std::to_string(cells) + ")");
      for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] < 0.0) bad_input(std::string("/") + key + "/" + std::to_string(k), "must be >= 0");
      return v;
    };
    try {
      scen = TradeScenario::from_distributions(v_dom, c_dom, mv, mc, g_b, g_s, weights("weights_B", g_b, mv),
                                               weights("weights_S", g_s, mc));
    } catch (const SupportMismatch& e) {
      bad_input("/grid_v/domain", e.what());
    }
  }

  const TradeSolution sol = solve_interim_efficient(scen);
  const FractionalRegion frac = fractional_region(sol.p);
  const MarkupPooling& mp = sol.mechanism;
  json& r = ctx.run.result;
  r["objective"] = sol.welfare;
  r["virtual_surplus"] = sol.pi;
  r["buyer_bottom_utility"] = sol.z;
  r["seller_top_utility"] = sol.seller_top_utility;
  r["budget_identity_gap"] = sol.pi - sol.z - sol.seller_top_utility;
  r["mechanism"] = {{"phi", mp.phi}, {"pooled", mp.pooled()}};
  if (mp.pooled()) {
    r["mechanism"]["pool_cells"] = json::array({mp.pool_first, mp.pool_last});
    r["mechanism"]["phi_low"] = mp.phi_low;
    r["mechanism"]["phi_high"] = mp.phi_high;
    r["mechanism"]["k"] = mp.k;
  }
  r["fractional"] = {{"cells", frac.cells}, {"levels", frac.levels}};
  if (frac.cells > 0) r["fractional"]["box"] = box_json(frac.box);
  r["interim"] = {{"q_buyer", sol.q1}, {"q_seller", sol.q2}};
  r["verdicts"] = {{"markup_pooling", true},
                   {"at_most_one_fractional_level", frac.levels.size() <= 1},
                   {"fractional_region_is_box", frac.cells == 0 || frac.single_box}};
  r["parameters"] = {{"value_cells", mv},
                     {"cost_cells", mc},
                     {"v_domain", interval_json(scen.v_domain)},
                     {"c_domain", interval_json(scen.c_domain)},
                     {"random", random}};
  if (!(frac.levels.size() <= 1 && (frac.cells == 0 || frac.single_box))) ctx.run.exit_code = kExitStructural;

  ctx.csv("trade", sol.p);
  ctx.svg("trade", sol.p, "trade probability (value right, cost up)",
          frac.cells > 0 ? std::optional<CellBox>(frac.box) : std::nullopt);
}

// Interim rules either per quantile cell or per value cell of G1 and G2.
std::pair<StepFunction1D, StepFunction1D> read_reduced_form(Context& ctx) {
  const json& s = ctx.s;
  const int m = s.at("cells").get<int>();
  const auto q1 = s.at("q1").get<std::vector<double>>(), q2 = s.at("q2").get<std::vector<double>>();
  if (s.contains("G1") != s.contains("G2")) bad_input(s.contains("G1") ? "/G2" : "/G1", "give both priors or neither");
  if (!s.contains("G1")) {
    if (static_cast<int>(q1.size()) != m) bad_input("/q1", "needs one entry per quantile cell (" + std::to_string(m) + ")");
    if (static_cast<int>(q2.size()) != m) bad_input("/q2", "needs one entry per quantile cell (" + std::to_string(m) + ")");
    return {read_step(q1, "/q1"), read_step(q2, "/q2")};
  }
  read_step(q1, "/q1");
  read_step(q2, "/q2");
  ReducedForm rf{q1, q2, read_distribution(s.at("G1"), "/G1", ctx), read_distribution(s.at("G2"), "/G2", ctx)};
  return {rf.quantile(0, m), rf.quantile(1, m)};
}

void run_reduced_form(Context& ctx) {
  const auto [q1, q2] = read_reduced_form(ctx);
  const ReducedFormReport rep = check_reduced_form(q1, q2);
  json& r = ctx.run.result;
  r["quantile_q1"] = q1.values();
  r["quantile_q2"] = q2.values();
  r["feasible"] = rep.feasible;
  r["min_gap"] = rep.min_gap;
  r["parameters"] = {{"cells", q1.size()}};
  if (!rep.feasible) {
    r["verdicts"] = {{"feasible", false}};
    ctx.run.exit_code = kExitInfeasible;
    return;
  }
  const ExtremeReducedForm ext = extreme_reduced_form_check(q1, q2);
  const AuctionImplementation impl = construct_implementation(q1, q2);
  r["extreme"] = {{"extreme", ext.extreme}};
  if (ext.extreme) {
    r["extreme"]["k1"] = ext.k1;
    r["extreme"]["k2"] = ext.k2;
  }
  r["implementation"] = {{"closed_form", impl.closed_form}, {"residual", impl.residual}};
  r["verdicts"] = {{"feasible", true}, {"extreme", ext.extreme}, {"implemented", impl.residual <= 1e-9}};
  if (impl.residual > 1e-9) ctx.run.exit_code = kExitStructural;
  ctx.csv("p1", impl.p1);
  ctx.csv("p2", impl.p2);
  ctx.svg("p1", impl.p1, "bidder 1 allocation (quantiles)", std::nullopt);
  ctx.svg("p2", impl.p2, "bidder 2 allocation (quantiles)", std::nullopt);
}

void run_investment_auction(Context& ctx) {
  const json& s = ctx.s;
  const int m = s.at("cells").get<int>();
  const QuantileTransform g = read_distribution(s.at("G1"), "/G1", ctx);
  if (s.contains("G2") && s.at("G2") != s.at("G1")) bad_input("/G2", "the investment model needs identical priors");
  InvestmentSpec spec;
  spec.b = s.at("b").is_string() ? kInf : s.at("b").get<double>();
  ProbeOptions probe;
  probe.budget = s.value("probe_budget", probe.budget);
  probe.restarts = s.value("restarts", probe.restarts);
  probe.seed = s.value("seed", std::uint64_t{0});

  const InvestmentResult res = solve_investment_auction(spec, g, m, probe);
  const auto psi = quantile_virtual_values(g, m);
  const SymmetricBenchmark sym = best_symmetric_reserve(spec, psi);
  json& r = ctx.run.result;
  r["objective"] = res.objective;
  r["symmetric_benchmark"] = {{"objective", sym.objective}, {"reserve_cell", sym.reserve_cell}};
  r["gain_over_symmetric"] = res.objective - sym.objective;
  r["probes"] = res.probes;
  r["quantile_q1"] = res.q1.values();
  r["quantile_q2"] = res.q2.values();
  r["extreme"] = {{"extreme", res.structure.extreme}};
  if (res.structure.extreme) {
    r["extreme"]["k1"] = res.structure.k1;
    r["extreme"]["k2"] = res.structure.k2;
  }
  r["verdicts"] = {{"extreme", res.structure.extreme},
                   {"asymmetric", res.q1.values() != res.q2.values()},
                   {"beats_symmetric", res.objective > sym.objective + 1e-6},
                   {"implemented", res.implementation.residual <= 1e-9}};
  r["parameters"] = {{"cells", m},
                     {"b", std::isinf(spec.b) ? json("inf") : json(spec.b)},
                     {"probe_budget", probe.budget},
                     {"restarts", probe.restarts}};
  if (!res.structure.extreme || res.implementation.residual > 1e-9) ctx.run.exit_code = kExitStructural;
  ctx.csv("p1", res.implementation.p1);
  ctx.csv("p2", res.implementation.p2);
  ctx.svg("p1", res.implementation.p1, "bidder 1 allocation (quantiles)", std::nullopt);
  ctx.svg("p2", res.implementation.p2, "bidder 2 allocation (quantiles)", std::nullopt);
}

json beliefs_json(const std::vector<StepFunction1D>& q) {
  json out = json::array();
  for (const auto& b : q) out.push_back(b.values());
  return out;
}

void run_ppi(Context& ctx) {
  const json& s = ctx.s;
  const int n = s.at("n").get<int>(), m = s.at("grid").get<int>();
  const double prior = s.at("prior").get<double>();
  const Shape shape(std::vector<int>(static_cast<std::size_t>(n), m));
  const json& obj = s.at("objective");
  json& r = ctx.run.result;
  BiUpsetSignal signal;
  if (obj.contains("linear")) {
    const auto w = obj.at("linear").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(w.size()) != n) bad_input("/objective/linear", "needs one weight array per receiver");
    for (std::size_t i = 0; i < w.size(); ++i)
      if (static_cast<int>(w[i].size()) != m)
        bad_input("/objective/linear/" + std::to_string(i), "needs one weight per cell (" + std::to_string(m) + ")");
    const PpiLinearResult res = solve_ppi_linear(shape, w, prior);
    signal = res.signal;
    r["objective"] = res.objective;
    r["symmetric"] = res.symmetric;
  } else {
    ThresholdObjective t;
    t.thresholds = obj.at("threshold").get<std::vector<double>>();
    t.weights = obj.contains("weights") ? obj.at("weights").get<std::vector<double>>() : std::vector<double>(n, 1.0);
    if (static_cast<int>(t.thresholds.size()) != n) bad_input("/objective/threshold", "needs one threshold per receiver");
    if (static_cast<int>(t.weights.size()) != n) bad_input("/objective/weights", "needs one weight per receiver");
    PpiProbeOptions popt;
    popt.budget = s.value("probe_budget", popt.budget);
    popt.seed = s.value("seed", std::uint64_t{0});
    const PpiThresholdResult res = solve_ppi_threshold(shape, t, prior, popt);
    signal = res.signal;
    r["objective"] = res.objective;
    r["probes"] = res.log.size();
  }
  const GridFunction f = signal.signal();
  r["lambda"] = signal.lambda;
  r["inner_cells"] = signal.a1.count();
  r["outer_cells"] = signal.a2.count();
  r["mean"] = f.mean();
  r["beliefs"] = beliefs_json(signal.beliefs());
  const bool mean_ok = std::abs(f.mean() - prior) <= 1e-9;
  json verdicts{{"bi_upset", signal.a1.subset_of(signal.a2)}, {"mean_equals_prior", mean_ok}};
  std::optional<CellBox> box;
  if (n == 2) {
    try {
      const PoolingImplementation pool = pooling_implementation(signal);
      const auto want = marginals(f), got = marginals(pool.pooled);
      double err = 0.0;
      for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < want[a].size(); ++k) err = std::max(err, std::abs(want[a][k] - got[a][k]));
      r["pooling"] = {{"boundary", pool.boundary}, {"marginal_error", err}};
      if (!pool.empty()) {
        r["pooling"]["pool_cells"] = json::array({pool.pool_first, pool.pool_last});
        r["pooling"]["pool"] = interval_json(pool.pool);
      }
      verdicts["pooling_round_trip"] = err <= 1e-9;
      ctx.csv("pooled", pool.pooled);
      const FractionalRegion frac = fractional_region(f);
      if (frac.cells > 0) box = frac.box;
    } catch (const NotRectangle& e) {
      r["pooling"] = {{"error", e.what()}};
      verdicts["pooling_round_trip"] = false;
    }
  }
  r["verdicts"] = verdicts;
  r["parameters"] = {{"n", n}, {"grid", m}, {"prior", prior}};
  if (!mean_ok) ctx.run.exit_code = kExitStructural;
  ctx.csv("signal", f);
  ctx.svg("signal", f, "probability of state 1", box);
}

void run_social_choice(Context& ctx) {
  const json& s = ctx.s;
  ScgScenario scg;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      scg.a[i][k] = s.at("a")[i][k].get<double>();
      if (s.contains("c")) scg.c[i][k] = s.at("c")[i][k].get<double>();
    }
    if (scg.a[i][0] == scg.a[i][1]) bad_input("/a/" + std::to_string(i), "the two slopes must differ");
    if (s.contains("G")) scg.g[i] = read_distribution(s.at("G")[i], "/G/" + std::to_string(i), ctx);
  }
  const GridFunction pa = read_grid_function(s.at("mechanism_a"), "/mechanism_a", ctx);
  const GridFunction pb = read_grid_function(s.at("mechanism_b"), "/mechanism_b", ctx);
  if (pa.shape().rank() != 2) bad_input("/mechanism_a", "mechanisms are two-agent grids");
  if (!(pa.shape() == pb.shape())) bad_input("/mechanism_b", "must share the grid of mechanism_a");

  json& r = ctx.run.result;
  EquivalenceReport rep;
  try {
    rep = anti_equivalence_report(scg, pa, pb);
  } catch (const SupportMismatch& e) {
    bad_input("/G", e.what());
  }
  auto per = [&](int k) {
    json j{{"bic", rep.bic[k]}, {"dic", rep.dic[k]}, {"deterministic", rep.deterministic[k]}};
    const GridFunction& ph = k == 0 ? rep.phat_a : rep.phat_b;
    if (rep.deterministic[k]) j["exposed"] = exposed_mechanism_check(ph).exposed;
    return j;
  };
  r["mechanism_a"] = per(0);
  r["mechanism_b"] = per(1);
  r["verdicts"] = {{"payoff_equivalent", rep.payoff_equivalent}, {"expost_equivalent", rep.expost_equivalent}};
  r["parameters"] = {{"a", s.at("a")}, {"grid", pa.shape().to_string()}};
  ctx.csv("phat_a", rep.phat_a);
  ctx.csv("phat_b", rep.phat_b);
  ctx.svg("phat_a", rep.phat_a, "mechanism A in normalized quantiles", std::nullopt);
  ctx.svg("phat_b", rep.phat_b, "mechanism B in normalized quantiles", std::nullopt);
}

void run_decompose(Context& ctx) {
  const GridFunction f = read_grid_function(ctx.s.at("function"), "/function", ctx);
  const double merge_tol = ctx.s.value("merge_tol", 0.0);
  json& r = ctx.run.result;
  r["parameters"] = {{"dims", f.shape().dims()}, {"merge_tol", merge_tol}};
  if (!is_monotone(f, 0.0)) {
    r["verdicts"] = {{"monotone", false}};
    ctx.run.exit_code = kExitStructural;
    return;
  }
  const NestingRepresentation rep = nesting_decompose(f, merge_tol);
  const GridFunction back = rep.reconstruct();
  json levels = json::array();
  for (std::size_t j = 0; j < rep.sets.size(); ++j) {
    json l{{"level", rep.levels[j]}, {"weight", rep.weights[j]}, {"cells", rep.sets[j].count()}};
    if (f.shape().rank() == 2) l["boundary"] = rep.sets[j].boundary();
    levels.push_back(l);
  }
  r["levels"] = levels;
  r["reconstruction_error"] = back.max_abs_diff(f);
  r["verdicts"] = {{"monotone", true}, {"exact", back.max_abs_diff(f) == 0.0}};
  ctx.csv("reconstructed", back);
}

void run_rationalize(Context& ctx) {
  const auto raw = ctx.s.at("marginals").get<std::vector<std::vector<double>>>();
  std::vector<StepFunction1D> q;
  for (std::size_t a = 0; a < raw.size(); ++a) q.push_back(read_step(raw[a], "/marginals/" + std::to_string(a)));
  json& r = ctx.run.result;
  std::vector<int> dims;
  for (const auto& v : raw) dims.push_back(static_cast<int>(v.size()));
  r["parameters"] = {{"dims", dims}};
  const bool ok = is_rationalizable(q);
  json verdicts{{"rationalizable", ok}};
  if (q.size() == 2) {
    const MajorizationReport maj = check_majorization(q[0], conjugate(q[1], q[0].size()));
    r["majorization"] = {{"holds", maj.holds}, {"min_gap", maj.min_gap}, {"equal_mass", maj.equal_at_zero}};
  }
  if (!ok) {
    r["verdicts"] = verdicts;
    ctx.run.exit_code = kExitInfeasible;
    return;
  }
  const RationalizerResult rat = monotone_rationalizer_run(q);
  r["rationalizer"] = {{"sweeps", rat.sweeps}, {"residual", rat.residual}};
  verdicts["rationalizer_monotone"] = is_monotone(rat.f, 1e-6);
  if (q.size() == 2) verdicts["extreme"] = extreme_check_joint_majorization(q[0], q[1]);
  if (rat.f.size() <= kUniquenessCellLimit) {
    // Dykstra leaves ~1e-8 noise at the bounds, which would read as slack.
    std::vector<double> snapped = rat.f.data();
    for (double& v : snapped) {
      if (v <= kSnapTol) v = 0.0;
      if (v >= 1.0 - kSnapTol) v = 1.0;
    }
    verdicts["unique"] = unique_rationalization_check(GridFunction(rat.f.shape(), snapped), false).unique;
  }
  r["verdicts"] = verdicts;
  ctx.csv("rationalizer", rat.f);
  ctx.svg("rationalizer", rat.f, "monotone rationalizer", std::nullopt);
}

void run_check(Context& ctx) {
  const GridFunction f = read_grid_function(ctx.s.at("function"), "/function", ctx);
  json& r = ctx.run.result;
  r["parameters"] = {{"dims", f.shape().dims()}};
  json verdicts{{"monotone", is_monotone(f, 1e-9)}};
  const auto levels = distinct_values(f);
  r["levels"] = levels;
  std::optional<CellBox> box;
  if (!verdicts["monotone"].get<bool>()) {
    const auto bad = first_monotonicity_violation(f, 1e-9);
    r["violation"] = {{"lo", f.shape().coords(bad->lo)}, {"hi", f.shape().coords(bad->hi)}};
    ctx.run.exit_code = kExitStructural;
  } else {
    if (f.shape().rank() == 2) {
      const RectangleDecomposition d = detect_rectangle_structure(f);
      r["rectangle"] = rectangle_json(d);
      box = rectangle_box(d);
    }
    if (f.size() <= kUniquenessCellLimit) {
      verdicts["unique_among_monotone"] = unique_rationalization_check(f, true).unique;
      verdicts["unique"] = unique_rationalization_check(f, false).unique;
    }
    const bool det = std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0 || v == 1.0; });
    verdicts["deterministic"] = det;
    if (det && f.shape().rank() <= 3) {
      const AdditiveCertificate cert = is_additive_set(UpSet(f.shape(), [&] {
        std::vector<char> mask(f.size());
        for (std::size_t x = 0; x < f.size(); ++x) mask[x] = f[x] > 0.5;
        return mask;
      }()));
      verdicts["additive"] = cert.additive;
      r["additive_margin"] = cert.margin;
    }
  }
  r["verdicts"] = verdicts;
  ctx.svg("function", f, "grid function", box);
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const Infeasible*>(&e) || dynamic_cast<const NotRationalizable*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const StructureViolation*>(&e) || dynamic_cast<const NotMarkupPooling*>(&e) ||
      dynamic_cast<const TheoremViolation*>(&e) || dynamic_cast<const NotOfForm*>(&e))
    return kExitStructural;
  return kExitError;
}

using Runner = void (*)(Context&);

Runner runner_for(const std::string& kind) {
  if (kind == "public_good") return run_public_good;
  if (kind == "bilateral_trade") return run_bilateral_trade;
  if (kind == "reduced_form") return run_reduced_form;
  if (kind == "investment_auction") return run_investment_auction;
  if (kind == "ppi") return run_ppi;
  if (kind == "social_choice") return run_social_choice;
  if (kind == "decompose") return run_decompose;
  if (kind == "rationalize") return run_rationalize;
  if (kind == "check") return run_check;
  bad_input("/kind", "unknown kind " + kind);
}

}  // namespace

nlohmann::json parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
  validate_scenario(j);
  return j;
}

ScenarioRun run_scenario(const nlohmann::json& scenario, const RunOptions& opt) {
  validate_scenario(scenario);
  Context ctx{scenario, opt, {}};
  const std::string kind = scenario.at("kind").get<std::string>();
  json& r = ctx.run.result;
  r["kind"] = kind;
  r["schema_version"] = kScenarioSchemaVersion;
  r["seed"] = scenario.value("seed", std::uint64_t{0});
  if (scenario.contains("name")) r["name"] = scenario.at("name");
  try {
    runner_for(kind)(ctx);
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    if (code == kExitError) throw;
    ctx.run.exit_code = code;
    ctx.run.files.clear();
    r["error"] = e.what();
  }
  static const char* const status[] = {"ok", "error", "structural_violation", "infeasible"};
  r["status"] = status[ctx.run.exit_code];
  r["exit_code"] = ctx.run.exit_code;
  std::vector<OutputFile> files{{".result.json", r.dump(2) + "\n"}};
  for (auto& f : ctx.run.files) files.push_back(std::move(f));
  ctx.run.files = std::move(files);
  return std::move(ctx.run);
}

}  // namespace monoext
