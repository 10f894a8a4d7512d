#include "monoext/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

namespace monoext::oracle {

namespace {

std::vector<int> unpack(std::size_t idx, const std::vector<int>& dims) {
  std::vector<int> c(dims.size());
  for (std::size_t a = dims.size(); a-- > 0;) {
    c[a] = static_cast<int>(idx % static_cast<std::size_t>(dims[a]));
    idx /= static_cast<std::size_t>(dims[a]);
  }
  return c;
}

bool leq(const std::vector<int>& x, const std::vector<int>& y) {
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] > y[a]) return false;
  }
  return true;
}

// Pairs (i, j) with cell i directly below cell j along one axis.
std::vector<std::pair<std::size_t, std::size_t>> order_pairs(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto ci = unpack(i, dims), cj = unpack(j, dims);
      int diff = 0;
      bool ok = true;
      for (std::size_t a = 0; a < dims.size(); ++a) {
        int d = cj[a] - ci[a];
        if (d < 0 || d > 1) ok = false;
        diff += d;
      }
      if (ok && diff == 1) out.emplace_back(i, j);
    }
  }
  return out;
}

// Solves the k x k system in place; false when singular.
bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t k = b.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-10) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.resize(k);
  for (std::size_t r = 0; r < k; ++r) x[r] = b[r] / a[r][r];
  return true;
}

struct Row {
  std::vector<double> a;
  double lo, hi;  // lo <= a.x <= hi
};

}  // namespace

std::vector<std::vector<char>> enumerate_upsets(const Shape& shape) {
  const std::vector<int>& dims = shape.dims();
  const std::size_t n = shape.size();
  if (n > 25) throw TooLarge("up-set enumeration is limited to 25 cells");
  std::vector<std::vector<int>> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = unpack(i, dims);

  std::vector<std::vector<char>> out;
  std::vector<char> mask(n, 0);
  // Decide cells from the top of the order down: a cell may join only if every
  // cell above it already has.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = n - 1 - i;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == n) {
      out.push_back(mask);
      return;
    }
    const std::size_t c = order[pos];
    mask[c] = 0;
    self(self, pos + 1);
    bool allowed = true;
    for (std::size_t j = 0; j < n && allowed; ++j) {
      if (j != c && leq(coords[c], coords[j]) && !mask[j]) allowed = false;
    }
    if (allowed) {
      mask[c] = 1;
      self(self, pos + 1);
      mask[c] = 0;
    }
  };
  rec(rec, 0);
  // Cells above c all have larger row-major index, so they are decided first
  // and the check above sees their final state.
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<double>> brute_force_vertices(const LpProblem& p) {
  const std::size_t n = p.objective.size();
  if (n > 12) throw TooLarge("vertex enumeration is limited to 12 variables");
  std::vector<Row> rows;
  if (p.include_monotonicity && p.grid.size() > 0) {
    for (auto [i, j] : order_pairs(p.grid.dims())) {
      Row r{std::vector<double>(n, 0.0), -kInf, 0.0};
      r.a[i] = 1.0;
      r.a[j] = -1.0;
      rows.push_back(std::move(r));
    }
  }
  for (const auto& c : p.constraints) {
    Row r{std::vector<double>(n, 0.0), -kInf, kInf};
    for (const auto& [j, v] : c.terms) r.a[j] += v;
    if (c.relation != Relation::ge) r.hi = c.rhs;
    if (c.relation != Relation::le) r.lo = c.rhs;
    rows.push_back(std::move(r));
  }

  std::map<std::vector<long long>, std::vector<double>> found;
  std::vector<int> state(n, 0);  // 0 lower, 1 upper, 2 interior
  const double tol = 1e-9;
  auto feasible = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol) return false;
    }
    for (const auto& r : rows) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += r.a[j] * x[j];
      if (s < r.lo - tol || s > r.hi + tol) return false;
    }
    return true;
  };

  auto visit_pattern = [&]() {
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> interior;
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == 0) x[j] = p.lower[j];
      else if (state[j] == 1) x[j] = p.upper[j];
      else interior.push_back(j);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(x[j]) && state[j] != 2) return;
    }
    const std::size_t k = interior.size();
    // Rows touching interior variables become candidate equations; the rest
    // must already hold.
    std::vector<std::pair<std::vector<double>, std::vector<double>>> cand;  // (coeffs on interior, targets)
    for (const auto& r : rows) {
      double fixed = 0.0;
      std::vector<double> ai(k);
      bool touches = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 2) {
          ai[std::find(interior.begin(), interior.end(), j) - interior.begin()] = r.a[j];
          touches = touches || r.a[j] != 0.0;
        } else {
          fixed += r.a[j] * x[j];
        }
      }
      if (!touches) {
        if (fixed < r.lo - tol || fixed > r.hi + tol) return;
        continue;
      }
      std::vector<double> targets;
      if (std::isfinite(r.lo)) targets.push_back(r.lo - fixed);
      if (std::isfinite(r.hi) && r.hi != r.lo) targets.push_back(r.hi - fixed);
      cand.emplace_back(std::move(ai), std::move(targets));
    }
    if (k == 0) {
      if (feasible(x)) {
        std::vector<long long> key;
        for (double v : x) key.push_back(std::llround(v * 1e7));
        found.emplace(key, x);
      }
      return;
    }
    if (cand.size() < k) return;
    std::vector<std::size_t> pick(k);
    auto choose = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
      if (depth == k) {
        // every combination of row sides
        std::vector<std::size_t> side(k, 0);
        for (;;) {
          std::vector<std::vector<double>> a(k);
          std::vector<double> b(k);
          for (std::size_t t = 0; t < k; ++t) {
            a[t] = cand[pick[t]].first;
            b[t] = cand[pick[t]].second[side[t]];
          }
          std::vector<double> sol;
          if (!gauss_solve(a, b, sol)) return;  // singular for every side choice
          std::vector<double> y = x;
          bool inside = true;
          for (std::size_t t = 0; t < k; ++t) {
            y[interior[t]] = sol[t];
            if (!(sol[t] > p.lower[interior[t]] + tol && sol[t] < p.upper[interior[t]] - tol)) inside = false;
          }
          if (inside && feasible(y)) {
            std::vector<long long> key;
            for (double v : y) key.push_back(std::llround(v * 1e7));
            found.emplace(key, y);
          }
          std::size_t t = 0;
          while (t < k && side[t] + 1 >= cand[pick[t]].second.size()) side[t++] = 0;
          if (t == k) break;
          ++side[t];
        }
        return;
      }
      for (std::size_t r = start; r + (k - depth) <= cand.size(); ++r) {
        pick[depth] = r;
        self(self, r + 1, depth + 1);
      }
    };
    choose(choose, 0, 0);
  };

  auto rec = [&](auto&& self, std::size_t j) -> void {
    if (j == n) {
      visit_pattern();
      return;
    }
    const bool fixed = p.lower[j] == p.upper[j];
    for (int s = 0; s < (fixed ? 1 : 3); ++s) {
      state[j] = s;
      self(self, j + 1);
    }
  };
  rec(rec, 0);

  std::vector<std::vector<double>> out;
  for (auto& [key, x] : found) out.push_back(x);
  return out;
}

double max_flow(int nodes, const std::vector<std::tuple<int, int, double>>& edges, int source, int sink) {
  struct Edge {
    int to;
    double cap;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(nodes);
  for (const auto& [u, v, c] : edges) {
    g[u].push_back({v, c, g[v].size()});
    g[v].push_back({u, 0.0, g[u].size() - 1});
  }
  const double eps = 1e-13;
  double flow = 0.0;
  std::vector<int> level(nodes);
  std::vector<std::size_t> it(nodes);
  auto bfs = [&]() {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[source] = 0;
    q.push(source);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const auto& e : g[u]) {
        if (e.cap > eps && level[e.to] < 0) {
          level[e.to] = level[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level[sink] >= 0;
  };
  auto dfs = [&](auto&& self, int u, double pushed) -> double {
    if (u == sink) return pushed;
    for (std::size_t& i = it[u]; i < g[u].size(); ++i) {
      Edge& e = g[u][i];
      if (e.cap > eps && level[e.to] == level[u] + 1) {
        double d = self(self, e.to, std::min(pushed, e.cap));
        if (d > eps) {
          e.cap -= d;
          g[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0.0;
  };
  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    while (double d = dfs(dfs, source, kInf)) flow += d;
  }
  return flow;
}

bool brute_force_rationalizable(const std::vector<std::vector<double>>& q) {
  if (q.size() == 2) {
    const int m1 = static_cast<int>(q[0].size()), m2 = static_cast<int>(q[1].size());
    const int src = 0, sink = 1 + m1 + m2;
    std::vector<std::tuple<int, int, double>> edges;
    double supply = 0.0, demand = 0.0;
    for (int i = 0; i < m1; ++i) {
      edges.emplace_back(src, 1 + i, m2 * q[0][i]);
      supply += m2 * q[0][i];
    }
    for (int j = 0; j < m2; ++j) {
      edges.emplace_back(1 + m1 + j, sink, m1 * q[1][j]);
      demand += m1 * q[1][j];
    }
    for (int i = 0; i < m1; ++i)
      for (int j = 0; j < m2; ++j) edges.emplace_back(1 + i, 1 + m1 + j, 1.0);
    const double scale = static_cast<double>(m1) * m2;
    if (std::abs(supply - demand) > 1e-9 * scale) return false;
    return supply - max_flow(sink + 1, edges, src, sink) <= 1e-9 * scale;
  }
  std::vector<int> dims;
  std::size_t n = 1;
  for (const auto& qa : q) {
    dims.push_back(static_cast<int>(qa.size()));
    n *= qa.size();
  }
  LpProblem p = LpProblem::with_variables(n, 0.0, 1.0);
  for (std::size_t a = 0; a < q.size(); ++a) {
    for (std::size_t k = 0; k < q[a].size(); ++k) {
      LinearConstraint c;
      c.relation = Relation::eq;
      c.rhs = q[a][k] * static_cast<double>(n / q[a].size());
      for (std::size_t i = 0; i < n; ++i) {
        if (unpack(i, dims)[a] == static_cast<int>(k)) c.terms.emplace_back(i, 1.0);
      }
      p.add_constraint(std::move(c));
    }
  }
  return solve_lp(p).optimal();
}

bool brute_force_unique(const GridFunction& f, bool among_monotone) {
  const std::size_t n = f.size();
  if (n > 12) throw TooLarge("uniqueness oracle is limited to 12 cells");
  const std::vector<int>& dims = f.shape().dims();
  LpProblem p = LpProblem::with_variables(n, 0.0, 1.0);
  for (std::size_t a = 0; a < dims.size(); ++a) {
    for (int k = 0; k < dims[a]; ++k) {
      LinearConstraint c;
      c.relation = Relation::eq;
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (unpack(i, dims)[a] == k) {
          c.terms.emplace_back(i, 1.0);
          total += f[i];
        }
      }
      c.rhs = total;
      p.add_constraint(std::move(c));
    }
  }
  if (among_monotone) {
    for (auto [i, j] : order_pairs(dims)) p.add_constraint({{{i, 1.0}, {j, -1.0}}, Relation::le, 0.0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      std::fill(p.objective.begin(), p.objective.end(), 0.0);
      p.objective[i] = s;
      LpSolution sol = solve_lp(p);
      if (!sol.optimal()) return false;
      if (sol.objective - s * f[i] > 1e-7) return false;
    }
  }
  return true;
}

bool reduced_form_feasible(const std::vector<double>& q1, const std::vector<double>& q2) {
  const int m1 = static_cast<int>(q1.size()), m2 = static_cast<int>(q2.size());
  // source -> bidder-1 type row i (m2 q1_i), source -> bidder-2 type column j
  // (m1 q2_j), both -> cell (i, j) -> sink with unit capacity.
  const int src = 0, rows0 = 1, cols0 = 1 + m1, cells0 = 1 + m1 + m2, sink = cells0 + m1 * m2;
  std::vector<std::tuple<int, int, double>> edges;
  double supply = 0.0;
  for (int i = 0; i < m1; ++i) {
    edges.emplace_back(src, rows0 + i, m2 * q1[i]);
    supply += m2 * q1[i];
  }
  for (int j = 0; j < m2; ++j) {
    edges.emplace_back(src, cols0 + j, m1 * q2[j]);
    supply += m1 * q2[j];
  }
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m2; ++j) {
      int cell = cells0 + i * m2 + j;
      edges.emplace_back(rows0 + i, cell, 1.0);
      edges.emplace_back(cols0 + j, cell, 1.0);
      edges.emplace_back(cell, sink, 1.0);
    }
  }
  return supply - max_flow(sink + 1, edges, src, sink) <= 1e-9 * m1 * m2;
}

std::vector<int> uniform_trade_lagrangian_thresholds(int m) {
  // MR = 2v - 1 and MC = 2c for uniform types.
  auto region_budget = [m](double lambda, std::vector<int>* first) {
    double budget = 0.0;
    if (first) first->assign(m, m);
    for (int j = 0; j < m; ++j) {
      const double c = (j + 0.5) / m;
      for (int i = 0; i < m; ++i) {
        const double v = (i + 0.5) / m;
        if ((v - c) + lambda * ((2 * v - 1) - 2 * c) >= 0.0) {
          budget += (2 * v - 1) - 2 * c;
          if (first && (*first)[j] == m) (*first)[j] = i;
        }
      }
    }
    return budget;
  };
  double lo = 0.0, hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (region_budget(mid, nullptr) >= 0.0 ? hi : lo) = mid;
  }
  std::vector<int> first;
  region_budget(hi, &first);
  return first;
}

}  // namespace monoext::oracle
