#pragma once

#include <array>
#include <vector>

#include "monoext/gridfn.hpp"
#include "monoext/rationalize.hpp"

namespace monoext {

// Two agents, two alternatives, u_i^k(theta_i, t_i) = a[i][k] theta_i + c[i][k] - t_i.
// Mechanisms are the probability of alternative 1 on value cells over the
// supports of the type distributions (axis i = agent i).
struct ScgScenario {
  std::array<std::array<double, 2>, 2> a{{{1.0, 0.0}, {1.0, 0.0}}};
  std::array<std::array<double, 2>, 2> c{{{0.0, 0.0}, {0.0, 0.0}}};
  std::array<QuantileTransform, 2> g{QuantileTransform::uniform(0.0, 1.0), QuantileTransform::uniform(0.0, 1.0)};

  void validate() const;  // a[i][0] != a[i][1]
  bool flipped(int agent) const { return a[agent][0] < a[agent][1]; }
  // Interim probability of alternative 1 for each of agent i's value cells.
  std::vector<double> interim(int agent, const GridFunction& p1) const;
  // Interim payoff before transfers at the centre of each value cell.
  std::vector<double> interim_payoff(int agent, const GridFunction& p1) const;
};

// Quantile coordinates, with agent i's axis reversed when a[i][0] < a[i][1],
// so that BIC is monotone interim marginals and DIC is monotone p-hat.
GridFunction normalize_mechanism(const ScgScenario& s, const GridFunction& p1);
// Reverses one axis; an involution.
GridFunction reverse_axis(const GridFunction& f, int axis);

bool check_bic(const GridFunction& phat, double tol = 1e-9);
bool check_dic(const GridFunction& phat, double tol = 1e-9);
bool is_deterministic(const GridFunction& phat, double tol = 1e-9);

struct EquivalenceReport {
  std::array<bool, 2> bic{}, dic{}, deterministic{};
  bool payoff_equivalent = false;
  bool expost_equivalent = false;
  GridFunction phat_a, phat_b;
};
// Throws TheoremViolation when a deterministic DIC mechanism is payoff
// equivalent to another mechanism without being ex-post equivalent to it.
EquivalenceReport anti_equivalence_report(const ScgScenario& s, const GridFunction& pa, const GridFunction& pb);

struct ExposedReport {
  bool exposed = false;
  AdditiveCertificate certificate;
};
// phat must be 0/1 (throws NotDeterministic). Exposed iff {phat = 1} is an
// additive up-set with a strictly positive margin; up to three axes.
ExposedReport exposed_mechanism_check(const GridFunction& phat);

}  // namespace monoext
