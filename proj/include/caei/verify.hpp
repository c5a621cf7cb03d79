#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "caei/discrete.hpp"
#include "caei/model.hpp"
#include "caei/simplex.hpp"

namespace caei {

struct Violation {
  /// "agent 3" or "good 2" (1-based).
  std::string subject;
  std::string condition;
  Rational magnitude;
};

struct CaeiReport {
  bool partition_ok = true;
  bool budgets_ok = true;
  bool optimal_bundles_ok = true;
  bool is_caei = true;
  bool is_ceei = true;
  std::vector<Violation> violations;
};

/// Thrown when an exhaustive oracle is asked to go beyond its size guard.
class OracleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string agent_label(AgentId i) { return "agent " + std::to_string(i + 1); }

/// Shared budget and optimality checks once the partition is settled.
/// `holds[i]` says whether agent i received its demand.
inline void check_prices(CaeiReport& report, const std::vector<Rational>& spend, const std::vector<Rational>& demand_cost,
                         const std::vector<bool>& holds, const Rational& tol) {
  for (std::size_t i = 0; i < spend.size(); ++i) {
    if (spend[i] > 1 + tol) {
      report.budgets_ok = false;
      report.violations.push_back({agent_label(i), "overspends", spend[i] - 1});
    }
    if (!holds[i] && demand_cost[i] <= 1 - tol) {
      report.optimal_bundles_ok = false;
      report.violations.push_back({agent_label(i), "affords unreceived demand", 1 - demand_cost[i]});
    }
    Rational gap = spend[i] - 1;
    if (gap < 0) gap = -gap;
    if (gap > tol) report.is_ceei = false;
  }
}

inline void check_served_claim(CaeiReport& report, const std::vector<bool>& holds,
                               const std::vector<AgentId>& claimed, std::size_t welfare) {
  std::vector<AgentId> actual;
  for (std::size_t i = 0; i < holds.size(); ++i)
    if (holds[i]) actual.push_back(i);
  std::vector<AgentId> sorted_claim(claimed);
  std::sort(sorted_claim.begin(), sorted_claim.end());
  if (actual != sorted_claim || welfare != claimed.size())
    report.violations.push_back({"solution", "served set or welfare does not match the allocation",
                                 Rational(static_cast<long>(actual.size()) - static_cast<long>(welfare))});
}

inline void finish(CaeiReport& report) {
  report.is_caei = report.partition_ok && report.budgets_ok && report.optimal_bundles_ok;
  report.is_ceei = report.is_ceei && report.is_caei;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CAEI / CEEI certification

/// Checks allocation clearing, budgets and optimal bundles. `tolerance`
/// loosens every comparison (0 for exact solutions); relaxed clearing only
/// forbids over-allocation.
inline CaeiReport verify_caei(const DivisibleInstance& inst, const DivisibleSolution& sol,
                              const Rational& tolerance = Rational(0), Clearing clearing = Clearing::full) {
  validate(inst);
  const std::size_t n = inst.agents(), m = inst.goods;
  CaeiReport report;
  if (sol.allocation.size() != n || sol.prices.size() != m) throw InputError("solution does not match the instance");
  for (const auto& row : sol.allocation)
    if (row.size() != m) throw InputError("solution does not match the instance");

  for (std::size_t j = 0; j < m; ++j) {
    Rational total(0);
    for (AgentId i = 0; i < n; ++i) {
      if (sol.allocation[i][j] < -tolerance) {
        report.partition_ok = false;
        report.violations.push_back({detail::agent_label(i), "negative share of good " + std::to_string(j + 1),
                                     -sol.allocation[i][j]});
      }
      total += sol.allocation[i][j];
    }
    const Rational excess = total - 1;
    if (excess > tolerance || (clearing == Clearing::full && excess < -tolerance)) {
      report.partition_ok = false;
      report.violations.push_back({"good " + std::to_string(j + 1), excess > 0 ? "over-allocated" : "not fully allocated",
                                   excess});
    }
    if (sgn(sol.prices[j]) < 0) {
      report.partition_ok = false;
      report.violations.push_back({"good " + std::to_string(j + 1), "negative price", sol.prices[j]});
    }
  }
  std::vector<Rational> spend(n), cost(n);
  std::vector<bool> holds(n);
  for (AgentId i = 0; i < n; ++i) {
    spend[i] = bundle_price(sol.prices, sol.allocation[i]);
    cost[i] = demand_price(inst, sol.prices, i);
    holds[i] = single_minded_utility(inst, i, sol.allocation[i], tolerance) == 1;
  }
  detail::check_prices(report, spend, cost, holds, tolerance);
  detail::check_served_claim(report, holds, sol.served, sol.welfare);
  detail::finish(report);
  return report;
}

inline CaeiReport verify_caei(const CakeInstance& inst, const CakeSolution& sol,
                              const Rational& tolerance = Rational(0), Clearing clearing = Clearing::full) {
  validate(inst);
  validate(sol.prices);
  const std::size_t n = inst.agents();
  if (sol.allocation.size() != n) throw InputError("solution does not match the instance");
  CaeiReport report;
  std::vector<Piece> pieces;
  for (const Piece& p : sol.allocation) pieces.push_back(canonicalize_piece(p));

  Rational covered(0);
  for (AgentId i = 0; i < n; ++i) {
    covered += piece_length(pieces[i]);
    for (AgentId k = i + 1; k < n; ++k) {
      const Rational overlap = intersection_length(pieces[i], pieces[k]);
      if (sgn(overlap) > 0) {
        report.partition_ok = false;
        report.violations.push_back({detail::agent_label(i), "piece overlaps agent " + std::to_string(k + 1), overlap});
      }
    }
  }
  if (clearing == Clearing::full && covered != 1 && report.partition_ok) {
    report.partition_ok = false;
    report.violations.push_back({"cake", "not fully allocated", 1 - covered});
  }

  std::vector<Rational> spend(n), cost(n);
  std::vector<bool> holds(n);
  for (AgentId i = 0; i < n; ++i) {
    spend[i] = bundle_price(sol.prices, pieces[i]);
    cost[i] = demand_price(inst, sol.prices, i);
    holds[i] = single_minded_utility(inst, i, pieces[i]) == 1;
  }
  detail::check_prices(report, spend, cost, holds, tolerance);
  detail::check_served_claim(report, holds, sol.served, sol.welfare);
  detail::finish(report);
  return report;
}

inline CaeiReport verify_caei(const DiscreteInstance& inst, const DiscreteSolution& sol,
                              const Rational& tolerance = Rational(0), Clearing clearing = Clearing::full) {
  validate(inst);
  const std::size_t n = inst.agents(), m = inst.items();
  if (sol.allocation.size() != n || sol.prices.size() != m) throw InputError("solution does not match the instance");
  for (const auto& row : sol.allocation)
    if (row.size() != m) throw InputError("solution does not match the instance");
  CaeiReport report;
  for (std::size_t j = 0; j < m; ++j) {
    Count total = 0;
    for (AgentId i = 0; i < n; ++i) {
      if (sol.allocation[i][j] < 0) {
        report.partition_ok = false;
        report.violations.push_back({detail::agent_label(i), "negative count of item " + std::to_string(j + 1),
                                     Rational(static_cast<long>(-sol.allocation[i][j]))});
      }
      total += sol.allocation[i][j];
    }
    const Count excess = total - inst.quantities[j];
    if (excess > 0 || (clearing == Clearing::full && excess < 0)) {
      report.partition_ok = false;
      report.violations.push_back({"item " + std::to_string(j + 1), excess > 0 ? "over-allocated" : "copies left unsold",
                                   Rational(static_cast<long>(excess))});
    }
    if (sgn(sol.prices[j]) < 0) {
      report.partition_ok = false;
      report.violations.push_back({"item " + std::to_string(j + 1), "negative price", sol.prices[j]});
    }
  }
  std::vector<Rational> spend(n), cost(n);
  std::vector<bool> holds(n);
  for (AgentId i = 0; i < n; ++i) {
    spend[i] = bundle_price(sol.prices, sol.allocation[i]);
    cost[i] = demand_price(inst, sol.prices, i);
    holds[i] = single_minded_utility(inst, i, sol.allocation[i]) == 1;
  }
  detail::check_prices(report, spend, cost, holds, tolerance);
  detail::check_served_claim(report, holds, sol.served, sol.welfare);
  detail::finish(report);
  return report;
}

inline CaeiReport verify_caei(const AnyInstance& inst, const AnySolution& sol, const Rational& tolerance = Rational(0),
                              Clearing clearing = Clearing::full) {
  if (inst.index() != sol.index()) throw InputError("solution model does not match the instance model");
  return std::visit(
      [&](const auto& concrete) -> CaeiReport {
        using I = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<I, DivisibleInstance>)
          return verify_caei(concrete, std::get<DivisibleSolution>(sol), tolerance, clearing);
        else if constexpr (std::is_same_v<I, CakeInstance>)
          return verify_caei(concrete, std::get<CakeSolution>(sol), tolerance, clearing);
        else
          return verify_caei(concrete, std::get<DiscreteSolution>(sol), tolerance, clearing);
      },
      inst);
}

// ---------------------------------------------------------------------------
// Envy-freeness
//
// With 0/1 single-minded utilities, agent i envies k iff V_i(x_i) = 0 and
// V_i(x_k) = 1, i.e. i lacks its demand and x_k contains it.

/// `slack` treats shares within that distance of the demand as full.
inline bool is_envy_free(const DivisibleInstance& inst, const DivisibleAllocation& x,
                         const Rational& slack = Rational(0)) {
  for (AgentId i = 0; i < inst.agents(); ++i) {
    if (single_minded_utility(inst, i, x[i], slack) == 1) continue;
    for (AgentId k = 0; k < inst.agents(); ++k)
      if (k != i && single_minded_utility(inst, i, x[k]) == 1) return false;
  }
  return true;
}

inline bool is_envy_free(const CakeInstance& inst, const CakeAllocation& x) {
  std::vector<Piece> pieces;
  for (const Piece& p : x) pieces.push_back(canonicalize_piece(p));
  for (AgentId i = 0; i < inst.agents(); ++i) {
    if (single_minded_utility(inst, i, pieces[i]) == 1) continue;
    for (AgentId k = 0; k < inst.agents(); ++k)
      if (k != i && single_minded_utility(inst, i, pieces[k]) == 1) return false;
  }
  return true;
}

inline bool is_envy_free(const DiscreteInstance& inst, const DiscreteAllocation& x) {
  for (AgentId i = 0; i < inst.agents(); ++i) {
    if (single_minded_utility(inst, i, x[i]) == 1) continue;
    for (AgentId k = 0; k < inst.agents(); ++k)
      if (k != i && single_minded_utility(inst, i, x[k]) == 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Brute-force oracles

struct SatisfiableResult {
  std::size_t welfare = 0;
  std::vector<AgentId> witness;
};

namespace detail {

inline void guard(bool ok, const std::string& what) {
  if (!ok) throw OracleGuardError("oracle guard exceeded: " + what);
}

/// Largest subset accepted by `feasible`, lexicographically smallest among
/// the largest.
inline SatisfiableResult max_feasible_subset(std::size_t n, const std::function<bool(const std::vector<AgentId>&)>& feasible) {
  SatisfiableResult best;
  bool found = false;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<AgentId> set;
    for (AgentId i = 0; i < n; ++i)
      if (mask >> i & 1U) set.push_back(i);
    if (found && set.size() < best.welfare) continue;
    if (!feasible(set)) continue;
    if (!found || set.size() > best.welfare || set < best.witness) {
      best.welfare = set.size();
      best.witness = set;
      found = true;
    }
  }
  return best;
}

/// Demand endpoints as cells; cell k of a cake instance becomes good k, and
/// agent i needs all of it iff the cell lies in D_i.
struct CellMarket {
  std::vector<Rational> breakpoints;
  DivisibleInstance market;
};

inline CellMarket cells_of(const CakeInstance& inst, std::vector<Rational> extra = {}) {
  for (const Piece& d : inst.demands)
    for (const Interval& iv : d) {
      extra.push_back(iv.lo);
      extra.push_back(iv.hi);
    }
  CellMarket cm;
  cm.breakpoints = sorted_breakpoints(std::move(extra));
  const std::size_t cells = cm.breakpoints.size() - 1;
  cm.market.goods = cells;
  cm.market.demand.assign(inst.agents(), RationalVector(cells, Rational(0)));
  for (AgentId i = 0; i < inst.agents(); ++i)
    for (std::size_t k = 0; k < cells; ++k)
      if (piece_contains(inst.demands[i], Piece{{cm.breakpoints[k], cm.breakpoints[k + 1]}})) cm.market.demand[i][k] = 1;
  return cm;
}

/// Carves each cell left to right in agent order according to the shares.
inline CakeAllocation carve_cells(const std::vector<Rational>& breakpoints, const DivisibleAllocation& shares) {
  const std::size_t n = shares.size();
  std::vector<std::vector<Interval>> raw(n);
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const Rational len = breakpoints[k + 1] - breakpoints[k];
    Rational cursor = breakpoints[k];
    for (AgentId i = 0; i < n; ++i) {
      if (sgn(shares[i][k]) <= 0) continue;
      Rational end = cursor + shares[i][k] * len;
      if (end > breakpoints[k + 1]) end = breakpoints[k + 1];
      raw[i].push_back({cursor, end});
      cursor = end;
    }
  }
  CakeAllocation out;
  for (auto& r : raw) out.push_back(canonicalize_piece(std::move(r)));
  return out;
}

/// Price-only route for a fixed served set in a divisible market. Clearing
/// at prices p is possible iff the served set fits in the supply and the
/// total value of all goods, sum_j p_j, does not exceed the n unit budgets:
/// served agents pay for their demands, and the rest of the (divisible)
/// value can be spread over the remaining budget. So feasibility reduces to
///   max eps  s.t.  p.v_i <= 1 (served), p.v_i >= 1 + eps (others),
///                  sum_j p_j <= n, 0 <= eps <= 1,  p >= 0.
/// Returns the supported prices and a water-filled allocation.
inline std::optional<DivisibleSolution> price_only_caei(const DivisibleInstance& inst, const std::vector<AgentId>& served) {
  const std::size_t n = inst.agents(), m = inst.goods;
  std::vector<bool> in(n, false);
  for (AgentId i : served) in[i] = true;
  for (std::size_t j = 0; j < m; ++j) {
    Rational used(0);
    for (AgentId i : served) used += inst.demand[i][j];
    if (used > 1) return std::nullopt;
  }
  LinearProgram lp(Sense::maximize);
  std::vector<VarId> p(m);
  for (std::size_t j = 0; j < m; ++j) p[j] = lp.add_variable();
  const VarId eps = lp.add_variable("eps", Rational(1));
  lp.set_objective(eps, 1);
  for (AgentId i = 0; i < n; ++i) {
    LinearExpr cost;
    for (std::size_t j = 0; j < m; ++j)
      if (sgn(inst.demand[i][j]) != 0) cost[p[j]] = inst.demand[i][j];
    if (in[i]) {
      lp.add_constraint(cost, Relation::less_equal, 1);
    } else {
      cost[eps] = -1;
      lp.add_constraint(cost, Relation::greater_equal, 1);
    }
  }
  LinearExpr total;
  for (std::size_t j = 0; j < m; ++j) total[p[j]] = 1;
  lp.add_constraint(total, Relation::less_equal, Rational(static_cast<long>(n)));
  const LpOutcome out = simplex_solve(lp);
  if (!out.optimal() || sgn(out.value(eps)) <= 0) return std::nullopt;

  DivisibleSolution sol;
  for (std::size_t j = 0; j < m; ++j) sol.prices.push_back(out.value(p[j]));
  sol.allocation.assign(n, RationalVector(m, Rational(0)));
  std::vector<Rational> budget(n, Rational(1));
  RationalVector left(m, Rational(1));
  for (AgentId i : served) {
    for (std::size_t j = 0; j < m; ++j) {
      sol.allocation[i][j] = inst.demand[i][j];
      left[j] -= inst.demand[i][j];
      budget[i] -= sol.prices[j] * inst.demand[i][j];
    }
  }
  AgentId buyer = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (sgn(sol.prices[j]) == 0) {
      sol.allocation[0][j] += left[j];
      continue;
    }
    while (sgn(left[j]) > 0) {
      if (buyer >= n) throw std::logic_error("price-only oracle ran out of budget");
      const Rational affordable = budget[buyer] / sol.prices[j];
      const Rational take = affordable < left[j] ? affordable : left[j];
      sol.allocation[buyer][j] += take;
      left[j] -= take;
      budget[buyer] -= take * sol.prices[j];
      if (sgn(budget[buyer]) == 0) ++buyer;
    }
  }
  sol.served = served;
  sol.welfare = served.size();
  sol.solver = "verify.oracle_caei_search";
  return sol;
}

}  // namespace detail

inline SatisfiableResult oracle_max_satisfiable(const DivisibleInstance& inst) {
  validate(inst);
  detail::guard(inst.agents() <= 20, "n > 20");
  return detail::max_feasible_subset(inst.agents(), [&](const std::vector<AgentId>& s) {
    for (std::size_t j = 0; j < inst.goods; ++j) {
      Rational total(0);
      for (AgentId i : s) total += inst.demand[i][j];
      if (total > 1) return false;
    }
    return true;
  });
}

inline SatisfiableResult oracle_max_satisfiable(const CakeInstance& inst) {
  validate(inst);
  detail::guard(inst.agents() <= 20, "n > 20");
  return detail::max_feasible_subset(inst.agents(), [&](const std::vector<AgentId>& s) {
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b)
        if (sgn(intersection_length(inst.demands[s[a]], inst.demands[s[b]])) > 0) return false;
    return true;
  });
}

inline SatisfiableResult oracle_max_satisfiable(const DiscreteInstance& inst) {
  validate(inst);
  detail::guard(inst.agents() <= 20, "n > 20");
  return detail::max_feasible_subset(inst.agents(), [&](const std::vector<AgentId>& s) {
    std::vector<Count> used(inst.items(), 0);
    for (AgentId i : s)
      for (std::size_t j : inst.demands[i])
        if (++used[j] > inst.quantities[j]) return false;
    return true;
  });
}

/// Maximum-welfare CAEI by trying every served set with the price-only LP.
inline std::optional<DivisibleSolution> oracle_caei_search(const DivisibleInstance& inst) {
  validate(inst);
  detail::guard(inst.agents() <= 6, "divisible oracle needs n <= 6");
  for (const auto& served : detail::subsets_by_size(inst.agents()))
    if (auto sol = detail::price_only_caei(inst, served)) return sol;
  return std::nullopt;
}

/// Cake version: demand-endpoint cells act as divisible goods.
inline std::optional<CakeSolution> oracle_caei_search(const CakeInstance& inst) {
  validate(inst);
  detail::guard(inst.agents() <= 6, "cake oracle needs n <= 6");
  const detail::CellMarket cm = detail::cells_of(inst);
  for (const auto& served : detail::subsets_by_size(inst.agents())) {
    auto div = detail::price_only_caei(cm.market, served);
    if (!div) continue;
    CakeSolution sol;
    sol.allocation = detail::carve_cells(cm.breakpoints, div->allocation);
    sol.prices = curve_from_cell_prices(cm.breakpoints, div->prices);
    sol.served = served;
    sol.welfare = served.size();
    sol.solver = "verify.oracle_caei_search";
    return sol;
  }
  return std::nullopt;
}

namespace detail {
/// Calls `visit` for every way of spreading `copies` over `agents` slots.
inline void for_each_composition(Count copies, std::size_t agents, std::vector<Count>& slot, std::size_t pos,
                                 const std::function<void()>& visit) {
  if (pos + 1 == agents) {
    slot[pos] = copies;
    visit();
    return;
  }
  for (Count c = copies; c >= 0; --c) {
    slot[pos] = c;
    for_each_composition(copies - c, agents, slot, pos + 1, visit);
  }
}
}  // namespace detail

/// Enumerates every clearing allocation and asks the price LP for support;
/// returns a maximum-welfare supported outcome, or nullopt if none exists.
/// Allocations with envy are skipped without an LP, since support implies
/// envy-freeness. With `first_hit` the search stops at the first supported
/// allocation, which settles existence only.
inline std::optional<DiscreteSolution> oracle_caei_search(const DiscreteInstance& inst, bool first_hit = false) {
  validate(inst);
  const std::size_t n = inst.agents(), m = inst.items();
  detail::guard(n <= 4 && m <= 3, "discrete oracle needs n <= 4 and m <= 3");
  // Budget on clearing allocations; Q_j <= 2 everywhere stays within it.
  constexpr std::size_t max_allocations = 5000;
  std::size_t product = 1;

  // All per-item distributions, then their product.
  std::vector<std::vector<std::vector<Count>>> per_item(m);
  for (std::size_t j = 0; j < m; ++j) {
    detail::guard(inst.quantities[j] <= 8, "discrete oracle needs Q_j <= 8");
    std::vector<Count> slot(n, 0);
    detail::for_each_composition(inst.quantities[j], n, slot, 0, [&] { per_item[j].push_back(slot); });
    product *= per_item[j].size();
    detail::guard(product <= max_allocations, "discrete oracle allows at most 5000 clearing allocations");
  }
  std::optional<DiscreteSolution> best;
  std::vector<std::size_t> choice(m, 0);
  for (;;) {
    DiscreteAllocation x(n, std::vector<Count>(m, 0));
    for (std::size_t j = 0; j < m; ++j)
      for (AgentId i = 0; i < n; ++i) x[i][j] = per_item[j][choice[j]][i];
    std::vector<AgentId> served = detail::served_agents(inst, x);
    if ((!best || served.size() > best->welfare) && is_envy_free(inst, x)) {
      if (auto p = prices_for_allocation_discrete(inst, x)) {
        DiscreteSolution sol;
        sol.allocation = std::move(x);
        sol.prices = std::move(*p);
        sol.served = std::move(served);
        sol.welfare = sol.served.size();
        sol.solver = "verify.oracle_caei_search";
        best = std::move(sol);
        if (first_hit || best->welfare == n) break;
      }
    }
    std::size_t pos = 0;
    while (pos < m && ++choice[pos] == per_item[pos].size()) choice[pos++] = 0;
    if (pos == m) break;
  }
  return best;
}

}  // namespace caei
