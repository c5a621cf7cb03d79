#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "caei/divisible.hpp"
#include "caei/model.hpp"
#include "caei/simplex.hpp"

namespace caei {

/// A CAEI exists iff no item has more singleton demanders than copies.
inline bool caei_exists(const DiscreteInstance& inst) {
  validate(inst);
  std::vector<Count> singletons(inst.items(), 0);
  for (const auto& d : inst.demands)
    if (d.size() == 1) ++singletons[d.front()];
  for (std::size_t j = 0; j < inst.items(); ++j)
    if (singletons[j] > inst.quantities[j]) return false;
  return true;
}

/// State of the over-demand sweep.
struct OverDemandState {
  /// Active agents, sorted by demand size then index.
  std::vector<AgentId> active;
  /// Items already priced and handed out.
  std::vector<bool> allocated;
  Rational epsilon;
};

/// One over-demand round: item priced at 1, one copy per listed agent.
struct OverDemandRound {
  std::size_t item = 0;
  std::vector<AgentId> recipients;
};

struct DiscreteRun {
  DiscreteSolution solution;
  std::vector<OverDemandRound> rounds;
  /// Items sold in the remainder phase, at price epsilon.
  std::vector<std::size_t> remainder_items;
  Rational epsilon;
};

namespace detail {
inline std::vector<AgentId> demanders_among(const DiscreteInstance& inst, const std::vector<AgentId>& agents,
                                            std::size_t item) {
  std::vector<AgentId> out;
  for (AgentId i : agents)
    if (std::binary_search(inst.demands[i].begin(), inst.demands[i].end(), item)) out.push_back(i);
  return out;
}

inline std::vector<AgentId> served_agents(const DiscreteInstance& inst, const DiscreteAllocation& x) {
  std::vector<AgentId> served;
  for (AgentId i = 0; i < inst.agents(); ++i)
    if (single_minded_utility(inst, i, x[i]) == 1) served.push_back(i);
  return served;
}
}  // namespace detail

/// Over-demand sweep with its full trace; nullopt iff no CAEI exists.
///
/// Agents are sorted by demand size (ties by index). While some unallocated
/// item (lowest index first) has more active demanders than copies, it is
/// priced at 1 and the first Q_j active demanders each take one copy and
/// leave. Remaining items cost epsilon = 1 / (1 + sum Q): each active
/// demander takes one copy and the last of them takes the leftovers. Copies
/// nobody active wants go to the last active agent, or to the last agent
/// when none is active.
inline std::optional<DiscreteRun> solve_caei_traced(const DiscreteInstance& inst) {
  if (!caei_exists(inst)) return std::nullopt;
  const std::size_t n = inst.agents(), m = inst.items();

  OverDemandState state;
  state.active.resize(n);
  for (AgentId i = 0; i < n; ++i) state.active[i] = i;
  std::stable_sort(state.active.begin(), state.active.end(),
                   [&](AgentId a, AgentId b) { return inst.demands[a].size() < inst.demands[b].size(); });
  state.allocated.assign(m, false);
  Count total = 0;
  for (Count q : inst.quantities) total += q;
  state.epsilon = Rational(1, static_cast<unsigned long>(1 + total));

  DiscreteRun run;
  run.epsilon = state.epsilon;
  DiscreteSolution& sol = run.solution;
  sol.allocation.assign(n, std::vector<Count>(m, 0));
  sol.prices.assign(m, Rational(0));

  for (;;) {
    std::size_t item = m;
    std::vector<AgentId> wanting;
    for (std::size_t j = 0; j < m && item == m; ++j) {
      if (state.allocated[j]) continue;
      wanting = detail::demanders_among(inst, state.active, j);
      if (static_cast<Count>(wanting.size()) > inst.quantities[j]) item = j;
    }
    if (item == m) break;
    sol.prices[item] = 1;
    state.allocated[item] = true;
    OverDemandRound round{item, {}};
    for (std::size_t k = 0; k < static_cast<std::size_t>(inst.quantities[item]); ++k) {
      sol.allocation[wanting[k]][item] = 1;
      round.recipients.push_back(wanting[k]);
    }
    std::erase_if(state.active, [&](AgentId i) {
      return std::find(round.recipients.begin(), round.recipients.end(), i) != round.recipients.end();
    });
    run.rounds.push_back(std::move(round));
  }

  for (std::size_t j = 0; j < m; ++j) {
    if (state.allocated[j]) continue;
    sol.prices[j] = state.epsilon;
    state.allocated[j] = true;
    run.remainder_items.push_back(j);
    const std::vector<AgentId> wanting = detail::demanders_among(inst, state.active, j);
    for (AgentId i : wanting) sol.allocation[i][j] = 1;
    const Count left = inst.quantities[j] - static_cast<Count>(wanting.size());
    if (left > 0) {
      const AgentId taker = !wanting.empty() ? wanting.back() : !state.active.empty() ? state.active.back() : n - 1;
      sol.allocation[taker][j] += left;
    }
  }

  sol.served = detail::served_agents(inst, sol.allocation);
  sol.welfare = sol.served.size();
  sol.exact = true;
  sol.clearing = Clearing::full;
  sol.solver = "discrete.solve_caei";
  return run;
}

inline std::optional<DiscreteSolution> solve_caei(const DiscreteInstance& inst) {
  if (auto run = solve_caei_traced(inst)) return std::move(run->solution);
  return std::nullopt;
}

/// Same market with one divisible unit per item: agent i needs 1/Q_j of
/// every item j in D_i.
inline DivisibleInstance as_divisible(const DiscreteInstance& inst) {
  validate(inst);
  DivisibleInstance div;
  div.goods = inst.items();
  div.demand.assign(inst.agents(), RationalVector(inst.items(), Rational(0)));
  for (AgentId i = 0; i < inst.agents(); ++i)
    for (std::size_t j : inst.demands[i]) div.demand[i][j] = Rational(1, static_cast<unsigned long>(inst.quantities[j]));
  return div;
}

struct RelaxedWelfareResult {
  /// Rounded solution; clearing is relaxed, so copies may stay unsold.
  DiscreteSolution solution;
  /// The divisible solution it was rounded from.
  DivisibleSolution divisible;
  /// Copies of each item nobody received.
  std::vector<Count> unsold;
};

/// Welfare-maximizing CAEI without the obligation to sell every copy: solve
/// the divisible relaxation without clearing, then give agent i
/// floor(x_ij * Q_j) copies. Per-copy prices are per-unit prices over Q_j,
/// so every bundle and demand keeps its cost.
inline RelaxedWelfareResult max_welfare_relaxed(const DiscreteInstance& inst, Grouping grouping = Grouping::by_types) {
  const DivisibleInstance div = as_divisible(inst);
  auto best = max_welfare_caei(div, grouping, Clearing::relaxed);
  if (!best) throw std::logic_error("relaxed divisible market without a CAEI");

  RelaxedWelfareResult out;
  out.divisible = std::move(*best);
  DiscreteSolution& sol = out.solution;
  const std::size_t n = inst.agents(), m = inst.items();
  sol.allocation.assign(n, std::vector<Count>(m, 0));
  for (AgentId i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Rational copies = out.divisible.allocation[i][j] * Rational(static_cast<long>(inst.quantities[j]));
      sol.allocation[i][j] = floor_of(copies).get_si();
    }
  for (std::size_t j = 0; j < m; ++j)
    sol.prices.push_back(out.divisible.prices[j] / Rational(static_cast<long>(inst.quantities[j])));
  out.unsold.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    Count given = 0;
    for (AgentId i = 0; i < n; ++i) given += sol.allocation[i][j];
    out.unsold[j] = inst.quantities[j] - given;
  }
  sol.served = detail::served_agents(inst, sol.allocation);
  sol.welfare = sol.served.size();
  sol.exact = true;
  sol.clearing = Clearing::relaxed;
  sol.solver = grouping == Grouping::by_types ? "discrete.max_welfare_relaxed(types)"
                                              : "discrete.max_welfare_relaxed(agents)";
  return out;
}

/// Per-copy prices supporting a full allocation, or nullopt. Every bundle
/// must cost at most 1 and every agent lacking its demand must face a demand
/// price of at least 1 + eps with eps > 0.
inline std::optional<PriceVector> prices_for_allocation_discrete(const DiscreteInstance& inst,
                                                                 const DiscreteAllocation& x) {
  validate(inst);
  const std::size_t n = inst.agents(), m = inst.items();
  if (x.size() != n) throw InputError("allocation has the wrong number of agents");
  for (std::size_t j = 0; j < m; ++j) {
    Count total = 0;
    for (const auto& row : x) {
      if (row.size() != m) throw InputError("allocation has the wrong number of items");
      if (row[j] < 0) throw InputError("allocation has a negative count");
      total += row[j];
    }
    if (total != inst.quantities[j])
      throw InputError("item " + std::to_string(j + 1) + ": " + std::to_string(total) + " copies allocated, " +
                       std::to_string(inst.quantities[j]) + " exist");
  }

  LinearProgram lp(Sense::maximize);
  std::vector<VarId> price(m);
  for (std::size_t j = 0; j < m; ++j) price[j] = lp.add_variable("p" + std::to_string(j));
  const VarId eps = lp.add_variable("eps", Rational(1));
  lp.set_objective(eps, 1);
  for (AgentId i = 0; i < n; ++i) {
    LinearExpr spend;
    for (std::size_t j = 0; j < m; ++j)
      if (x[i][j] != 0) spend[price[j]] = Rational(static_cast<long>(x[i][j]));
    lp.add_constraint(spend, Relation::less_equal, 1);
    if (single_minded_utility(inst, i, x[i]) == 0) {
      LinearExpr cost{{eps, Rational(-1)}};
      for (std::size_t j : inst.demands[i]) cost[price[j]] = 1;
      lp.add_constraint(cost, Relation::greater_equal, 1);
    }
  }
  LpOutcome out = simplex_solve(lp);
  if (!out.optimal() || sgn(out.value(eps)) <= 0) return std::nullopt;
  PriceVector p;
  for (std::size_t j = 0; j < m; ++j) p.push_back(out.value(price[j]));
  return p;
}

}  // namespace caei
