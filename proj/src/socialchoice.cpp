#include "monoext/socialchoice.hpp"

#include <algorithm>
#include <cmath>

namespace monoext {

void ScgScenario::validate() const {
  for (int i = 0; i < 2; ++i) {
    if (a[i][0] == a[i][1]) throw InvalidArgument("agent " + std::to_string(i + 1) + " has equal type slopes");
  }
}

std::vector<double> ScgScenario::interim(int agent, const GridFunction& p1) const {
  const Shape& shape = p1.shape();
  if (shape.rank() != 2) throw InvalidArgument("two agents expected");
  const int other = 1 - agent;
  const auto mass = g[other].cell_masses(shape.dim(other));
  std::vector<double> q(static_cast<std::size_t>(shape.dim(agent)), 0.0);
  for (std::size_t x = 0; x < shape.size(); ++x) q[shape.coord(x, agent)] += p1[x] * mass[shape.coord(x, other)];
  return q;
}

std::vector<double> ScgScenario::interim_payoff(int agent, const GridFunction& p1) const {
  const auto q = interim(agent, p1);
  const Interval dom = g[agent].support();
  std::vector<double> u(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double theta = cell_center(dom, static_cast<int>(q.size()), static_cast<int>(k));
    u[k] = q[k] * (a[agent][0] * theta + c[agent][0]) + (1.0 - q[k]) * (a[agent][1] * theta + c[agent][1]);
  }
  return u;
}

GridFunction reverse_axis(const GridFunction& f, int axis) {
  const Shape& shape = f.shape();
  std::vector<double> v(shape.size());
  for (std::size_t x = 0; x < shape.size(); ++x) {
    auto c = shape.coords(x);
    c[axis] = shape.dim(axis) - 1 - c[axis];
    v[shape.index(c)] = f[x];
  }
  return GridFunction(shape, std::move(v));
}

GridFunction normalize_mechanism(const ScgScenario& s, const GridFunction& p1) {
  s.validate();
  if (p1.shape().rank() != 2) throw InvalidArgument("two agents expected");
  const std::array<Interval, 2> domains{s.g[0].support(), s.g[1].support()};
  GridFunction out = to_quantile_space(p1, s.g, domains);
  for (int i = 0; i < 2; ++i) {
    if (s.flipped(i)) out = reverse_axis(out, i);
  }
  return out;
}

bool check_bic(const GridFunction& phat, double tol) {
  for (const auto& q : marginals(phat)) {
    for (std::size_t k = 0; k + 1 < q.size(); ++k) {
      if (q[k] > q[k + 1] + tol) return false;
    }
  }
  return true;
}

bool check_dic(const GridFunction& phat, double tol) { return is_monotone(phat, tol); }

bool is_deterministic(const GridFunction& phat, double tol) {
  return std::all_of(phat.values().begin(), phat.values().end(),
                     [&](double v) { return std::abs(v) <= tol || std::abs(v - 1.0) <= tol; });
}

EquivalenceReport anti_equivalence_report(const ScgScenario& s, const GridFunction& pa, const GridFunction& pb) {
  if (!(pa.shape() == pb.shape())) throw LengthMismatch("mechanisms on different grids");
  EquivalenceReport r;
  r.phat_a = normalize_mechanism(s, pa);
  r.phat_b = normalize_mechanism(s, pb);
  const GridFunction* ph[2] = {&r.phat_a, &r.phat_b};
  for (int m = 0; m < 2; ++m) {
    r.bic[m] = check_bic(*ph[m]);
    r.dic[m] = check_dic(*ph[m]);
    r.deterministic[m] = is_deterministic(*ph[m]);
  }
  const auto qa = marginals(r.phat_a), qb = marginals(r.phat_b);
  r.payoff_equivalent = true;
  for (std::size_t axis = 0; axis < qa.size(); ++axis) {
    for (std::size_t k = 0; k < qa[axis].size(); ++k) {
      if (std::abs(qa[axis][k] - qb[axis][k]) > 1e-9) r.payoff_equivalent = false;
    }
  }
  r.expost_equivalent = r.phat_a.max_abs_diff(r.phat_b) <= 1e-9;
  for (int m = 0; m < 2; ++m) {
    if (r.deterministic[m] && r.dic[m] && r.payoff_equivalent && !r.expost_equivalent) {
      throw TheoremViolation(std::string("deterministic DIC mechanism ") + (m == 0 ? "A" : "B") +
                             " is payoff equivalent to a different mechanism");
    }
  }
  return r;
}

ExposedReport exposed_mechanism_check(const GridFunction& phat) {
  if (!is_deterministic(phat)) throw NotDeterministic("exposed-mechanism check needs a 0/1 allocation");
  ExposedReport r;
  std::vector<char> mask(phat.size());
  for (std::size_t x = 0; x < phat.size(); ++x) mask[x] = phat[x] > 0.5;
  if (!is_monotone(phat, 1e-9)) return r;
  r.certificate = is_additive_set(UpSet(phat.shape(), mask));
  r.exposed = r.certificate.additive && r.certificate.margin > 0.0;
  return r;
}

}  // namespace monoext
