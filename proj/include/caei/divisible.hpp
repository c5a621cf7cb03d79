#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "caei/linear_system.hpp"
#include "caei/model.hpp"
#include "caei/simplex.hpp"

namespace caei {

enum class Grouping { by_types, by_agents };

namespace detail {

inline std::vector<bool> membership(std::size_t n, const std::vector<AgentId>& set) {
  std::vector<bool> in(n, false);
  for (AgentId i : set) {
    check_agent(n, i);
    in[i] = true;
  }
  return in;
}

inline std::vector<AgentId> served_agents(const DivisibleInstance& inst, const DivisibleAllocation& x,
                                          const Rational& slack = Rational(0)) {
  std::vector<AgentId> served;
  for (AgentId i = 0; i < inst.agents(); ++i)
    if (single_minded_utility(inst, i, x[i], slack) == 1) served.push_back(i);
  return served;
}

/// Every subset of {0..n-1} ordered by size descending, then lexicographically.
inline std::vector<std::vector<AgentId>> subsets_by_size(std::size_t n) {
  std::vector<std::vector<AgentId>> out;
  for (std::size_t k = n + 1; k-- > 0;) {
    std::vector<AgentId> comb(k);
    std::iota(comb.begin(), comb.end(), AgentId{0});
    for (;;) {
      out.push_back(comb);
      std::size_t pos = k;
      while (pos > 0 && comb[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++comb[pos - 1];
      for (std::size_t q = pos; q < k; ++q) comb[q] = comb[q - 1] + 1;
    }
  }
  return out;
}

/// Candidate served sets made of whole types, ordered by welfare descending
/// and then by the lexicographic order of the expanded agent list.
inline std::vector<std::vector<AgentId>> type_unions_by_size(const TypePartition& types) {
  const std::size_t t = types.type_count();
  if (t >= 8 * sizeof(std::size_t)) throw InputError("too many agent types to enumerate");
  std::vector<std::vector<AgentId>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << t); ++mask) {
    std::vector<AgentId> agents;
    for (std::size_t k = 0; k < t; ++k)
      if (mask >> k & 1U) agents.insert(agents.end(), types.members[k].begin(), types.members[k].end());
    std::sort(agents.begin(), agents.end());
    out.push_back(std::move(agents));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return out;
}

/// Necessary condition for any allocation serving `served`.
inline bool supply_suffices(const DivisibleInstance& inst, const std::vector<AgentId>& served) {
  for (std::size_t j = 0; j < inst.goods; ++j) {
    Rational total(0);
    for (AgentId i : served) total += inst.demand[i][j];
    if (total > 1) return false;
  }
  return true;
}

/// Hands out good j at price zero: each served agent takes its demand and
/// the lowest-index agent takes whatever is left.
inline void allocate_free_good(const DivisibleInstance& inst, const std::vector<bool>& in_served, std::size_t j,
                               DivisibleAllocation& x) {
  Rational left(1);
  for (AgentId i = 0; i < inst.agents(); ++i) {
    x[i][j] = in_served[i] ? inst.demand[i][j] : Rational(0);
    left -= x[i][j];
  }
  x[0][j] += left;
}

inline void check_full_allocation(const DivisibleInstance& inst, const DivisibleAllocation& x) {
  if (x.size() != inst.agents()) throw InputError("allocation has the wrong number of agents");
  for (std::size_t j = 0; j < inst.goods; ++j) {
    Rational total(0);
    for (const auto& row : x) {
      if (row.size() != inst.goods) throw InputError("allocation has the wrong number of goods");
      if (sgn(row[j]) < 0) throw InputError("allocation has a negative share");
      total += row[j];
    }
    if (total != 1) throw InputError("good " + std::to_string(j + 1) + " is not fully allocated");
  }
}

}  // namespace detail

/// Result of the money-flow LP for a fixed served set, before recovery.
struct SubsetLp {
  LpOutcome outcome;
  Rational epsilon;
  PriceVector prices;
  RationalMatrix spending;  // spending[i][j]: money agent i pays for good j
};

/// Builds and solves the served-set LP: prices p_j, spending m_ij and the
/// strictness slack eps (capped at 1). Served agents afford their demand and
/// spend at least its cost per good; everybody else faces a demand costing
/// at least 1 + eps. Spending on a good equals its price (full clearing) or
/// is at most its price (relaxed).
inline SubsetLp solve_subset_lp(const DivisibleInstance& inst, const std::vector<AgentId>& served, Clearing clearing) {
  const std::size_t n = inst.agents(), m = inst.goods;
  const std::vector<bool> in = detail::membership(n, served);
  LinearProgram lp(Sense::maximize);
  std::vector<VarId> price(m);
  std::vector<std::vector<VarId>> money(n, std::vector<VarId>(m));
  for (std::size_t j = 0; j < m; ++j) price[j] = lp.add_variable("p" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) money[i][j] = lp.add_variable("m" + std::to_string(i) + "_" + std::to_string(j));
  const VarId eps = lp.add_variable("eps", Rational(1));
  lp.set_objective(eps, 1);

  for (std::size_t i = 0; i < n; ++i) {
    LinearExpr cost;
    for (std::size_t j = 0; j < m; ++j)
      if (sgn(inst.demand[i][j]) != 0) cost[price[j]] = inst.demand[i][j];
    if (in[i]) {
      lp.add_constraint(cost, Relation::less_equal, 1);
      for (std::size_t j = 0; j < m; ++j) {
        if (sgn(inst.demand[i][j]) == 0) continue;
        lp.add_constraint({{money[i][j], Rational(1)}, {price[j], Rational(-inst.demand[i][j])}},
                          Relation::greater_equal, 0);
      }
    } else {
      cost[eps] = -1;
      lp.add_constraint(cost, Relation::greater_equal, 1);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    LinearExpr flow{{price[j], Rational(-1)}};
    for (std::size_t i = 0; i < n; ++i) flow[money[i][j]] = 1;
    lp.add_constraint(flow, clearing == Clearing::full ? Relation::equal : Relation::less_equal, 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    LinearExpr budget;
    for (std::size_t j = 0; j < m; ++j) budget[money[i][j]] = 1;
    lp.add_constraint(budget, Relation::less_equal, 1);
  }

  SubsetLp result;
  result.outcome = simplex_solve(lp);
  if (!result.outcome.optimal()) return result;
  result.epsilon = result.outcome.value(eps);
  if (sgn(result.epsilon) > 0) {
    // Second stage at the optimal eps: price the served demands as high as
    // the budgets allow, which picks a budget-exhausting point when one exists.
    lp.add_constraint({{eps, Rational(1)}}, Relation::equal, result.epsilon);
    lp.set_objective(eps, 0);
    LinearExpr total;
    for (std::size_t i = 0; i < n; ++i)
      if (in[i])
        for (std::size_t j = 0; j < m; ++j)
          if (sgn(inst.demand[i][j]) != 0) total[price[j]] += inst.demand[i][j];
    for (const auto& [var, coef] : total) lp.set_objective(var, coef);
    LpOutcome second = simplex_solve(lp);
    if (!second.optimal()) throw std::logic_error("second stage of the served-set LP failed");
    result.outcome = std::move(second);
  }
  for (std::size_t j = 0; j < m; ++j) result.prices.push_back(result.outcome.value(price[j]));
  result.spending.assign(n, RationalVector(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) result.spending[i][j] = result.outcome.value(money[i][j]);
  return result;
}

/// CAEI in which exactly `served` get their demand, or nullopt when none
/// exists (optimal eps is 0, or the served set cannot fit in the supply).
inline std::optional<DivisibleSolution> subset_caei_lp(const DivisibleInstance& inst, std::vector<AgentId> served,
                                                       Clearing clearing = Clearing::full) {
  validate(inst);
  std::sort(served.begin(), served.end());
  served.erase(std::unique(served.begin(), served.end()), served.end());
  const std::vector<bool> in = detail::membership(inst.agents(), served);
  if (!detail::supply_suffices(inst, served)) return std::nullopt;

  SubsetLp lp = solve_subset_lp(inst, served, clearing);
  if (!lp.outcome.optimal() || sgn(lp.epsilon) <= 0) return std::nullopt;

  const std::size_t n = inst.agents(), m = inst.goods;
  DivisibleSolution sol;
  sol.allocation.assign(n, RationalVector(m, Rational(0)));
  for (std::size_t j = 0; j < m; ++j) {
    if (sgn(lp.prices[j]) == 0) {
      detail::allocate_free_good(inst, in, j, sol.allocation);
    } else {
      for (std::size_t i = 0; i < n; ++i) sol.allocation[i][j] = lp.spending[i][j] / lp.prices[j];
    }
  }
  sol.prices = std::move(lp.prices);
  sol.served = detail::served_agents(inst, sol.allocation);
  sol.welfare = sol.served.size();
  sol.exact = true;
  sol.clearing = clearing;
  sol.solver = "divisible.subset_caei_lp";
  if (sol.served != served) throw std::logic_error("subset LP recovered a different served set");
  return sol;
}

/// Welfare-maximizing CAEI by exhaustive search over served sets (whole
/// types, or arbitrary agent subsets). Returns nullopt only if not even the
/// empty served set admits a CAEI.
inline std::optional<DivisibleSolution> max_welfare_caei(const DivisibleInstance& inst,
                                                         Grouping grouping = Grouping::by_types,
                                                         Clearing clearing = Clearing::full) {
  validate(inst);
  const auto candidates = grouping == Grouping::by_types ? detail::type_unions_by_size(group_types(inst))
                                                         : detail::subsets_by_size(inst.agents());
  for (const auto& served : candidates) {
    if (auto sol = subset_caei_lp(inst, served, clearing)) {
      sol->solver = grouping == Grouping::by_types ? "divisible.max_welfare_caei(types)"
                                                   : "divisible.max_welfare_caei(agents)";
      return sol;
    }
  }
  return std::nullopt;
}

/// Supporting prices for a given full allocation: every bundle costs at most
/// 1 and every agent lacking its demand faces a demand price of at least
/// 1 + eps, with eps maximized (capped at 1). nullopt when eps* = 0.
inline std::optional<PriceVector> prices_for_allocation(const DivisibleInstance& inst, const DivisibleAllocation& x) {
  validate(inst);
  detail::check_full_allocation(inst, x);
  const std::size_t n = inst.agents(), m = inst.goods;
  const std::vector<bool> in = detail::membership(n, detail::served_agents(inst, x));

  LinearProgram lp(Sense::maximize);
  std::vector<VarId> price(m);
  for (std::size_t j = 0; j < m; ++j) price[j] = lp.add_variable("p" + std::to_string(j));
  const VarId eps = lp.add_variable("eps", Rational(1));
  lp.set_objective(eps, 1);
  for (std::size_t i = 0; i < n; ++i) {
    LinearExpr spend;
    for (std::size_t j = 0; j < m; ++j)
      if (sgn(x[i][j]) != 0) spend[price[j]] = x[i][j];
    lp.add_constraint(spend, Relation::less_equal, 1);
    if (!in[i]) {
      LinearExpr cost{{eps, Rational(-1)}};
      for (std::size_t j = 0; j < m; ++j)
        if (sgn(inst.demand[i][j]) != 0) cost[price[j]] = inst.demand[i][j];
      lp.add_constraint(cost, Relation::greater_equal, 1);
    }
  }
  LpOutcome out = simplex_solve(lp);
  if (!out.optimal() || sgn(out.value(eps)) <= 0) return std::nullopt;
  PriceVector p;
  for (std::size_t j = 0; j < m; ++j) p.push_back(out.value(price[j]));
  return p;
}

/// An allocation completing the given prices into a CAEI: agents who can
/// afford their demand receive it, every bundle is affordable, and all goods
/// are handed out. nullopt when the affording agents cannot all be served.
inline std::optional<DivisibleAllocation> allocation_for_prices(const DivisibleInstance& inst, const PriceVector& p) {
  validate(inst);
  const std::size_t n = inst.agents(), m = inst.goods;
  if (p.size() != m) throw InputError("price vector dimension mismatch");
  for (const Rational& v : p)
    if (sgn(v) < 0) throw InputError("negative price");

  LinearProgram lp(Sense::maximize);
  std::vector<std::vector<VarId>> share(n, std::vector<VarId>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) share[i][j] = lp.add_variable();
  for (std::size_t i = 0; i < n; ++i) {
    LinearExpr spend;
    for (std::size_t j = 0; j < m; ++j)
      if (sgn(p[j]) != 0) spend[share[i][j]] = p[j];
    lp.add_constraint(spend, Relation::less_equal, 1);
    if (demand_price(inst, p, i) <= 1) {
      for (std::size_t j = 0; j < m; ++j)
        if (sgn(inst.demand[i][j]) != 0)
          lp.add_constraint({{share[i][j], Rational(1)}}, Relation::greater_equal, inst.demand[i][j]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    LinearExpr total;
    for (std::size_t i = 0; i < n; ++i) total[share[i][j]] = 1;
    lp.add_constraint(total, Relation::equal, 1);
  }
  LpOutcome out = simplex_solve(lp);
  if (!out.optimal()) return std::nullopt;
  DivisibleAllocation x(n, RationalVector(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) x[i][j] = out.value(share[i][j]);
  return x;
}

// ---------------------------------------------------------------------------
// Fisher-market route (Leontief utilities, equal budgets)

struct EgOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 1'000'000;
};

enum class EgStatus { converged, iteration_limit };

struct EgResult {
  EgStatus status = EgStatus::iteration_limit;
  /// Present only when converged and the CAEI conditions hold at tolerance.
  std::optional<DivisibleSolution> solution;
  std::vector<double> utilities;
  std::vector<double> prices;
  double kkt_residual = 0;
  std::size_t iterations = 0;
};

namespace detail {

/// Dual of max sum_i log u_i s.t. sum_i u_i v_ij <= 1: minimize over
/// lambda >= 0 the function sum_j lambda_j - sum_i log(v_i . lambda).
/// At the optimum u_i = 1 / (v_i . lambda) and lambda are the prices.
class EgDual {
 public:
  explicit EgDual(const DivisibleInstance& inst) : n_(inst.agents()), m_(inst.goods), v_(n_, std::vector<double>(m_)) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) v_[i][j] = to_double(inst.demand[i][j]);
  }

  [[nodiscard]] std::size_t goods() const { return m_; }

  /// Demand-bundle costs; false if some cost is not positive.
  bool costs(const std::vector<double>& lambda, std::vector<double>& c) const {
    c.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) c[i] += v_[i][j] * lambda[j];
      if (!(c[i] > 0)) return false;
    }
    return true;
  }

  [[nodiscard]] double value(const std::vector<double>& lambda, const std::vector<double>& c) const {
    double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (double ci : c) total -= std::log(ci);
    return total;
  }

  /// grad_j = 1 - sum_i v_ij / c_i, the unused supply of good j.
  [[nodiscard]] std::vector<double> gradient(const std::vector<double>& c) const {
    std::vector<double> g(m_, 1.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) g[j] -= v_[i][j] / c[i];
    return g;
  }

  [[nodiscard]] std::vector<std::vector<double>> hessian(const std::vector<double>& c) const {
    std::vector<std::vector<double>> h(m_, std::vector<double>(m_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      const double w = 1.0 / (c[i] * c[i]);
      for (std::size_t j = 0; j < m_; ++j)
        for (std::size_t k = 0; k < m_; ++k) h[j][k] += w * v_[i][j] * v_[i][k];
    }
    return h;
  }

  /// Projected-gradient residual: |lambda - max(0, lambda - grad)|_inf.
  static double residual(const std::vector<double>& lambda, const std::vector<double>& grad) {
    double r = 0;
    for (std::size_t j = 0; j < lambda.size(); ++j) r = std::max(r, std::abs(lambda[j] - std::max(0.0, lambda[j] - grad[j])));
    return r;
  }

 private:
  std::size_t n_, m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace detail

/// CAEI through the Leontief Fisher-market equilibrium. Projected gradient
/// descent with backtracking on the price dual, plus Newton steps on the
/// active price set (solved exactly by solve_linear_system). Stops once the
/// KKT residual drops below tolerance / 10.
inline EgResult solve_eg(const DivisibleInstance& inst, const EgOptions& options = {}) {
  validate(inst);
  if (!(options.tolerance > 0)) throw InputError("tolerance must be positive");
  const std::size_t n = inst.agents(), m = inst.goods;
  detail::EgDual dual(inst);

  std::vector<double> lambda(m, static_cast<double>(n)), c, trial, trial_c;
  dual.costs(lambda, c);
  double value = dual.value(lambda, c);
  double step = 1.0;
  const double target = options.tolerance / 10;

  EgResult result;
  std::size_t it = 0;
  double residual = 0;
  for (; it < options.max_iterations; ++it) {
    const std::vector<double> grad = dual.gradient(c);
    residual = detail::EgDual::residual(lambda, grad);
    if (residual < target) break;

    // Newton on the active set: positive prices and over-demanded goods.
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < m; ++j)
      if (lambda[j] > 0 || grad[j] < 0) active.push_back(j);
    bool moved = false;
    if (!active.empty()) {
      const auto h = dual.hessian(c);
      RationalMatrix a(active.size(), RationalVector(active.size()));
      RationalVector b(active.size());
      for (std::size_t r = 0; r < active.size(); ++r) {
        for (std::size_t q = 0; q < active.size(); ++q) a[r][q] = from_double(h[active[r]][active[q]]);
        b[r] = from_double(-grad[active[r]]);
      }
      if (auto dir = solve_linear_system(a, b)) {
        for (double alpha = 1.0; alpha > 1e-6 && !moved; alpha *= 0.5) {
          trial = lambda;
          for (std::size_t r = 0; r < active.size(); ++r)
            trial[active[r]] = std::max(0.0, lambda[active[r]] + alpha * to_double((*dir)[r]));
          if (!dual.costs(trial, trial_c)) continue;
          const double tv = dual.value(trial, trial_c);
          const double tr = detail::EgDual::residual(trial, dual.gradient(trial_c));
          if (tv < value || (tv <= value + 1e-12 * (1 + std::abs(value)) && tr < residual)) {
            lambda.swap(trial);
            c.swap(trial_c);
            value = tv;
            moved = true;
          }
        }
      }
    }
    if (moved) continue;

    // Projected gradient step with backtracking (sufficient decrease).
    step = std::min(step * 2, 1e6);
    for (;;) {
      trial.assign(m, 0.0);
      double decrease = 0, dist2 = 0;
      for (std::size_t j = 0; j < m; ++j) {
        trial[j] = std::max(0.0, lambda[j] - step * grad[j]);
        const double d = trial[j] - lambda[j];
        decrease += grad[j] * d;
        dist2 += d * d;
      }
      if (dual.costs(trial, trial_c)) {
        const double tv = dual.value(trial, trial_c);
        if (tv <= value + decrease + dist2 / (2 * step)) {
          lambda.swap(trial);
          c.swap(trial_c);
          value = tv;
          break;
        }
      }
      step *= 0.5;
      if (step < 1e-300) break;
    }
  }
  result.iterations = it;
  result.kkt_residual = residual;
  if (residual >= target) return result;
  result.status = EgStatus::converged;

  // Goods left with spare supply carry no price.
  const std::vector<double> grad = dual.gradient(c);
  for (std::size_t j = 0; j < m; ++j)
    if (grad[j] > options.tolerance) lambda[j] = 0;
  if (!dual.costs(lambda, c)) return result;
  result.prices = lambda;
  result.utilities.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.utilities[i] = 1.0 / c[i];

  DivisibleSolution sol;
  sol.exact = false;
  sol.solver = "divisible.solve_eg";
  for (double p : lambda) sol.prices.push_back(from_double(p));
  sol.allocation.assign(n, RationalVector(m, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    const Rational u = from_double(result.utilities[i]);
    for (std::size_t j = 0; j < m; ++j) sol.allocation[i][j] = u * inst.demand[i][j];
  }
  // Close each good exactly: leftovers go to the first agent, rounding
  // overshoot is scaled away.
  for (std::size_t j = 0; j < m; ++j) {
    Rational total(0);
    for (std::size_t i = 0; i < n; ++i) total += sol.allocation[i][j];
    if (total < 1) {
      sol.allocation[0][j] += 1 - total;
    } else if (total > 1) {
      for (std::size_t i = 0; i < n; ++i) sol.allocation[i][j] /= total;
    }
  }
  sol.served = detail::served_agents(inst, sol.allocation, from_double(options.tolerance));
  sol.welfare = sol.served.size();

  const Rational tol = from_double(options.tolerance);
  for (std::size_t i = 0; i < n; ++i) {
    if (bundle_price(sol.prices, sol.allocation[i]) > 1 + tol) return result;
    const bool has = std::binary_search(sol.served.begin(), sol.served.end(), i);
    if (!has && demand_price(inst, sol.prices, i) <= 1 - tol) return result;
  }
  result.solution = std::move(sol);
  return result;
}

}  // namespace caei
