#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "caei/discrete.hpp"
#include "caei/divisible.hpp"
#include "caei/model.hpp"
#include "caei/verify.hpp"

namespace caei {

/// Breakpoints 0 = q_0 < ... < q_K = 1; cell k is [q_k, q_{k+1}].
struct Partition {
  std::vector<Rational> breakpoints{Rational(0), Rational(1)};

  [[nodiscard]] std::size_t cells() const { return breakpoints.size() - 1; }
  [[nodiscard]] Interval cell(std::size_t k) const { return {breakpoints[k], breakpoints[k + 1]}; }
};

enum class SplitRule { midpoints, per_demander_count, none };

struct ScheduledJob {
  AgentId agent = 0;
  Rational start;
  Rational finish;
  /// 1-based position in the schedule.
  std::size_t order = 0;
};

namespace detail {
inline std::vector<AgentId> cell_demanders(const CakeInstance& inst, const Interval& cell) {
  std::vector<AgentId> out;
  for (AgentId i = 0; i < inst.agents(); ++i)
    if (piece_contains(inst.demands[i], Piece{cell})) out.push_back(i);
  return out;
}
}  // namespace detail

inline Partition refine_partition(const CakeInstance& inst, const std::vector<Rational>& extra_points = {},
                                  SplitRule rule = SplitRule::none) {
  validate(inst);
  std::vector<Rational> points;
  for (const Rational& q : extra_points) {
    if (sgn(q) < 0 || q > 1) throw InputError("partition point " + to_string(q) + " outside [0, 1]");
    points.push_back(q);
  }
  for (const Piece& d : inst.demands)
    for (const Interval& iv : d) {
      points.push_back(iv.lo);
      points.push_back(iv.hi);
      if (rule == SplitRule::midpoints) points.push_back((iv.lo + iv.hi) / 2);
    }
  Partition part;
  part.breakpoints = sorted_breakpoints(std::move(points));
  if (rule != SplitRule::per_demander_count) return part;

  std::vector<Rational> refined{part.breakpoints.front()};
  for (std::size_t k = 0; k < part.cells(); ++k) {
    const Interval c = part.cell(k);
    const std::size_t pieces = std::max<std::size_t>(1, detail::cell_demanders(inst, c).size());
    for (std::size_t s = 1; s <= pieces; ++s)
      refined.push_back(c.lo + c.length() * make_rational(static_cast<long>(s), static_cast<long>(pieces)));
  }
  part.breakpoints = std::move(refined);
  return part;
}

namespace detail {

/// Cells as divisible goods: agent i needs all of cell k iff it lies in D_i.
inline DivisibleInstance cell_market(const CakeInstance& inst, const Partition& part) {
  DivisibleInstance market;
  market.goods = part.cells();
  market.demand.assign(inst.agents(), RationalVector(part.cells(), Rational(0)));
  for (std::size_t k = 0; k < part.cells(); ++k)
    for (AgentId i : cell_demanders(inst, part.cell(k))) market.demand[i][k] = 1;
  return market;
}

inline std::vector<AgentId> served_agents(const CakeInstance& inst, const CakeAllocation& x) {
  std::vector<AgentId> served;
  for (AgentId i = 0; i < inst.agents(); ++i)
    if (single_minded_utility(inst, i, x[i]) == 1) served.push_back(i);
  return served;
}

inline CakeSolution finish_cake(const CakeInstance& inst, CakeAllocation x, PriceCurve curve, std::string solver) {
  CakeSolution sol;
  for (Piece& p : x) sol.allocation.push_back(canonicalize_piece(std::move(p)));
  sol.prices = std::move(curve);
  sol.served = served_agents(inst, sol.allocation);
  sol.welfare = sol.served.size();
  sol.exact = true;
  sol.clearing = Clearing::full;
  sol.solver = std::move(solver);
  return sol;
}

/// Throws unless the pieces are pairwise interior-disjoint and cover [0, 1].
inline void check_cake_partition(const CakeInstance& inst, const CakeAllocation& x) {
  if (x.size() != inst.agents()) throw InputError("allocation has the wrong number of agents");
  Rational covered(0);
  std::vector<Piece> pieces;
  for (const Piece& p : x) {
    pieces.push_back(canonicalize_piece(p));
    covered += piece_length(pieces.back());
  }
  for (std::size_t a = 0; a < pieces.size(); ++a)
    for (std::size_t b = a + 1; b < pieces.size(); ++b)
      if (sgn(intersection_length(pieces[a], pieces[b])) != 0)
        throw InputError("pieces of agents " + std::to_string(a + 1) + " and " + std::to_string(b + 1) + " overlap");
  if (covered != 1) throw InputError("allocation does not cover the whole cake");
}

}  // namespace detail

/// Existence route: split every demanded interval at its midpoint, treat the
/// demanded cells as single-copy items and run the over-demand sweep. Cells
/// nobody demands cost nothing and go to agent 1.
inline CakeSolution solve_existence(const CakeInstance& inst) {
  const Partition part = refine_partition(inst, {}, SplitRule::midpoints);
  std::vector<std::size_t> item_of(part.cells(), SIZE_MAX);
  std::vector<std::size_t> cell_of;
  std::vector<std::vector<std::size_t>> demands(inst.agents());
  for (std::size_t k = 0; k < part.cells(); ++k) {
    const auto who = detail::cell_demanders(inst, part.cell(k));
    if (who.empty()) continue;
    item_of[k] = cell_of.size();
    cell_of.push_back(k);
    for (AgentId i : who) demands[i].push_back(item_of[k]);
  }
  RationalVector cell_prices(part.cells(), Rational(0));
  CakeAllocation x(inst.agents());
  if (!cell_of.empty()) {
    const DiscreteInstance items = make_discrete(std::vector<Count>(cell_of.size(), 1), std::move(demands));
    auto disc = solve_caei(items);
    if (!disc) throw std::logic_error("midpoint reduction produced an instance without a CAEI");
    for (std::size_t t = 0; t < cell_of.size(); ++t) {
      cell_prices[cell_of[t]] = disc->prices[t];
      for (AgentId i = 0; i < inst.agents(); ++i)
        if (disc->allocation[i][t] > 0) x[i].push_back(part.cell(cell_of[t]));
    }
  }
  for (std::size_t k = 0; k < part.cells(); ++k)
    if (item_of[k] == SIZE_MAX) x[0].push_back(part.cell(k));
  return detail::finish_cake(inst, std::move(x), curve_from_cell_prices(part.breakpoints, cell_prices),
                             "cake.solve_existence");
}

/// Welfare-maximizing CAEI by served-set enumeration over the
/// demander-count refinement.
inline CakeSolution max_welfare_fixed_agents(const CakeInstance& inst) {
  const Partition part = refine_partition(inst, {}, SplitRule::per_demander_count);
  const DivisibleInstance market = detail::cell_market(inst, part);
  auto best = max_welfare_caei(market, Grouping::by_agents);
  if (!best) throw std::logic_error("cell market without a CAEI");
  return detail::finish_cake(inst, detail::carve_cells(part.breakpoints, best->allocation),
                             curve_from_cell_prices(part.breakpoints, best->prices), "cake.max_welfare_fixed_agents");
}

/// Supporting price curve for a given allocation, or nullopt.
inline std::optional<PriceCurve> price_curve_for_allocation(const CakeInstance& inst, const CakeAllocation& x) {
  validate(inst);
  detail::check_cake_partition(inst, x);
  std::vector<Rational> points;
  for (const Piece& p : x)
    for (const Interval& iv : canonicalize_piece(p)) {
      points.push_back(iv.lo);
      points.push_back(iv.hi);
    }
  const Partition part = refine_partition(inst, points);
  const DivisibleInstance market = detail::cell_market(inst, part);
  DivisibleAllocation shares(inst.agents(), RationalVector(part.cells(), Rational(0)));
  for (std::size_t k = 0; k < part.cells(); ++k) {
    const Interval c = part.cell(k);
    for (AgentId i = 0; i < inst.agents(); ++i)
      if (sgn(overlap_length(canonicalize_piece(x[i]), c.lo, c.hi)) != 0) shares[i][k] = 1;
  }
  auto prices = prices_for_allocation(market, shares);
  if (!prices) return std::nullopt;
  return curve_from_cell_prices(part.breakpoints, *prices);
}

/// Allocation completing a price curve into a CAEI, or nullopt.
inline std::optional<CakeAllocation> allocation_for_price_curve(const CakeInstance& inst, const PriceCurve& curve) {
  validate(inst);
  validate(curve);
  const Partition part = refine_partition(inst, curve.breakpoints);
  const DivisibleInstance market = detail::cell_market(inst, part);
  PriceVector cell_prices;
  for (std::size_t k = 0; k < part.cells(); ++k) {
    const Interval c = part.cell(k);
    cell_prices.push_back(bundle_price(curve, Piece{c}));
  }
  auto shares = allocation_for_prices(market, cell_prices);
  if (!shares) return std::nullopt;
  return detail::carve_cells(part.breakpoints, *shares);
}

// ---------------------------------------------------------------------------
// Contiguous demands

struct GreedyResult {
  CakeSolution solution;
  std::vector<ScheduledJob> schedule;
  /// Groups of agents with identical demands that were set aside.
  std::vector<std::vector<AgentId>> identical_groups;
  /// True when the price construction failed verification and the
  /// enumeration route produced the output instead.
  bool fell_back = false;
};

namespace detail {

/// Tracks which parts of the cake are still unallocated.
class FreeCake {
 public:
  FreeCake() : free_{{Rational(0), Rational(1)}} {}

  void take(const Interval& used) {
    Piece next;
    for (const Interval& iv : free_) {
      if (used.hi <= iv.lo || iv.hi <= used.lo) {
        next.push_back(iv);
        continue;
      }
      if (iv.lo < used.lo) next.push_back({iv.lo, used.lo});
      if (used.hi < iv.hi) next.push_back({used.hi, iv.hi});
    }
    free_ = std::move(next);
  }

  /// Leftmost free interval of the given length inside [lo, hi].
  [[nodiscard]] std::optional<Interval> leftmost(const Rational& length, const Rational& lo, const Rational& hi) const {
    for (const Interval& iv : free_) {
      const Rational a = std::max(iv.lo, lo);
      const Rational b = std::min(iv.hi, hi);
      if (b - a >= length) return Interval{a, a + length};
    }
    return std::nullopt;
  }

  [[nodiscard]] const Piece& pieces() const { return free_; }

 private:
  Piece free_;
};

struct PricedSegment {
  Interval where;
  Rational total;
};

inline PriceCurve curve_from_segments(std::vector<PricedSegment> segments) {
  std::vector<Rational> points;
  for (const auto& s : segments) {
    points.push_back(s.where.lo);
    points.push_back(s.where.hi);
  }
  const std::vector<Rational> b = sorted_breakpoints(std::move(points));
  RationalVector cell_prices(b.size() - 1, Rational(0));
  for (const auto& s : segments) {
    const auto k = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), s.where.lo) - b.begin());
    cell_prices[k] += s.total;
  }
  return curve_from_cell_prices(b, cell_prices);
}

}  // namespace detail

/// Earliest-finish greedy schedule priced so that only the scheduled agents
/// can afford their demands. The k-th scheduled agent's interval carries a
/// prefix sliver priced k*eps and a suffix sliver priced 1 - k*eps, with
/// eps = 1/(2n+2); any unscheduled agent overlapping it then pays more than 1.
/// Groups of identical agents hit by the greedy are set aside and priced out
/// with tiny unit-price consolation pieces, as is every other unscheduled
/// agent that still has free cake in its demand. Free cake left over costs 0
/// and goes to agent 1. The result is verified exactly; on failure the
/// enumeration route is used and `fell_back` is set.
inline GreedyResult greedy_contiguous(const CakeInstance& inst) {
  validate(inst);
  const std::size_t n = inst.agents();
  for (AgentId i = 0; i < n; ++i)
    if (inst.demands[i].size() != 1)
      throw InputError("agent " + std::to_string(i + 1) + " has a non-contiguous demand");
  auto start = [&](AgentId i) { return inst.demands[i].front().lo; };
  auto finish = [&](AgentId i) { return inst.demands[i].front().hi; };

  GreedyResult result;
  std::vector<bool> settled(n, false);
  std::vector<bool> in_group(n, false);
  Rational cursor(0);
  for (;;) {
    std::optional<AgentId> pick;
    for (AgentId i = 0; i < n; ++i) {
      if (settled[i] || start(i) < cursor) continue;
      if (!pick || finish(i) < finish(*pick) || (finish(i) == finish(*pick) && start(i) > start(*pick))) pick = i;
    }
    if (!pick) break;
    std::vector<AgentId> twins;
    for (AgentId i = 0; i < n; ++i)
      if (!settled[i] && inst.demands[i] == inst.demands[*pick]) twins.push_back(i);
    if (twins.size() >= 2) {
      for (AgentId i : twins) {
        settled[i] = true;
        in_group[i] = true;
      }
      result.identical_groups.push_back(std::move(twins));
      continue;
    }
    settled[*pick] = true;
    result.schedule.push_back({*pick, start(*pick), finish(*pick), result.schedule.size() + 1});
    cursor = finish(*pick);
  }

  const Partition cells = refine_partition(inst);
  Rational shortest(1);
  for (std::size_t k = 0; k < cells.cells(); ++k) shortest = std::min(shortest, cells.cell(k).length());
  const Rational eps(1, static_cast<unsigned long>(2 * n + 2));
  const Rational sliver = shortest / 4;
  const Rational unit = sliver / Rational(static_cast<long>(2 * n));

  CakeAllocation x(n);
  std::vector<detail::PricedSegment> priced;
  detail::FreeCake free;
  std::vector<bool> scheduled(n, false);
  for (const ScheduledJob& job : result.schedule) {
    const Rational k(static_cast<long>(job.order));
    x[job.agent].push_back({job.start, job.finish});
    priced.push_back({{job.start, job.start + sliver}, k * eps});
    priced.push_back({{job.finish - sliver, job.finish}, 1 - k * eps});
    free.take({job.start, job.finish});
    scheduled[job.agent] = true;
  }
  for (const auto& group : result.identical_groups) {
    const Rational width = unit * Rational(static_cast<long>(group.size()));
    const Interval& d = inst.demands[group.front()].front();
    auto spot = free.leftmost(width, d.lo, d.hi);
    if (!spot) spot = free.leftmost(width, Rational(0), Rational(1));
    if (!spot) continue;
    free.take(*spot);
    Rational at = spot->lo;
    for (AgentId i : group) {
      x[i].push_back({at, at + unit});
      priced.push_back({{at, at + unit}, Rational(1)});
      at += unit;
    }
  }
  for (AgentId i = 0; i < n; ++i) {
    if (scheduled[i] || in_group[i]) continue;
    const Interval& d = inst.demands[i].front();
    if (auto spot = free.leftmost(unit, d.lo, d.hi)) {
      free.take(*spot);
      x[i].push_back(*spot);
      priced.push_back({*spot, Rational(1)});
    }
  }
  for (const Interval& iv : free.pieces()) x[0].push_back(iv);

  result.solution = detail::finish_cake(inst, std::move(x), detail::curve_from_segments(std::move(priced)),
                                        "cake.greedy_contiguous");
  const CaeiReport report = verify_caei(inst, result.solution);
  if (!report.is_caei || result.solution.welfare != result.schedule.size()) {
    result.fell_back = true;
    result.solution = max_welfare_fixed_agents(inst);
    result.solution.solver = "cake.greedy_contiguous(fallback)";
  }
  return result;
}

}  // namespace caei
