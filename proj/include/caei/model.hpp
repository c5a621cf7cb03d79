#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "caei/rational.hpp"

namespace caei {

/// Agents, goods and items are 0-based internally; files and the CLI use
/// 1-based numbering.
using AgentId = std::size_t;
using Count = std::int64_t;

// ---------------------------------------------------------------------------
// Pieces of cake

struct Interval {
  Rational lo;
  Rational hi;

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
  [[nodiscard]] Rational length() const { return hi - lo; }
};

/// Sorted, pairwise disjoint, nondegenerate intervals inside [0, 1], with
/// touching intervals merged. Produced by canonicalize_piece.
using Piece = std::vector<Interval>;

/// Sorts, merges touching/overlapping intervals and drops zero-length ones.
inline Piece canonicalize_piece(std::vector<Interval> raw) {
  for (const Interval& iv : raw) {
    if (iv.lo > iv.hi) throw InputError("interval [" + to_string(iv.lo) + ", " + to_string(iv.hi) + "] has l > r");
    if (sgn(iv.lo) < 0 || iv.hi > 1)
      throw InputError("interval [" + to_string(iv.lo) + ", " + to_string(iv.hi) + "] leaves [0, 1]");
  }
  std::erase_if(raw, [](const Interval& iv) { return iv.lo == iv.hi; });
  std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  Piece out;
  for (Interval& iv : raw) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      if (iv.hi > out.back().hi) out.back().hi = iv.hi;
    } else {
      out.push_back(std::move(iv));
    }
  }
  return out;
}

inline Rational piece_length(const Piece& piece) {
  Rational total(0);
  for (const Interval& iv : piece) total += iv.length();
  return total;
}

/// Length of piece ∩ [lo, hi].
inline Rational overlap_length(const Piece& piece, const Rational& lo, const Rational& hi) {
  Rational total(0);
  for (const Interval& iv : piece) {
    const Rational& a = iv.lo > lo ? iv.lo : lo;
    const Rational& b = iv.hi < hi ? iv.hi : hi;
    if (a < b) total += b - a;
  }
  return total;
}

/// Containment up to measure zero. For canonical pieces this means every
/// interval of `inner` lies inside one interval of `outer`.
inline bool piece_contains(const Piece& outer, const Piece& inner) {
  for (const Interval& iv : inner) {
    bool covered = std::any_of(outer.begin(), outer.end(),
                               [&](const Interval& o) { return o.lo <= iv.lo && iv.hi <= o.hi; });
    if (!covered) return false;
  }
  return true;
}

inline Piece piece_union(const Piece& a, const Piece& b) {
  std::vector<Interval> raw(a);
  raw.insert(raw.end(), b.begin(), b.end());
  return canonicalize_piece(std::move(raw));
}

/// Measure of a ∩ b.
inline Rational intersection_length(const Piece& a, const Piece& b) {
  Rational total(0);
  for (const Interval& iv : b) total += overlap_length(a, iv.lo, iv.hi);
  return total;
}

/// Sorted, deduplicated points with 0 and 1 added.
inline std::vector<Rational> sorted_breakpoints(std::vector<Rational> points) {
  points.emplace_back(0);
  points.emplace_back(1);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

// ---------------------------------------------------------------------------
// Instances

struct DivisibleInstance {
  std::size_t goods = 0;
  /// demand[i][j]: fraction of good j agent i needs.
  RationalMatrix demand;

  [[nodiscard]] std::size_t agents() const { return demand.size(); }
};

struct CakeInstance {
  /// One canonical piece per agent.
  std::vector<Piece> demands;

  [[nodiscard]] std::size_t agents() const { return demands.size(); }
};

struct DiscreteInstance {
  std::vector<Count> quantities;
  /// Sorted, duplicate-free item sets.
  std::vector<std::vector<std::size_t>> demands;

  [[nodiscard]] std::size_t agents() const { return demands.size(); }
  [[nodiscard]] std::size_t items() const { return quantities.size(); }
};

inline void validate(const DivisibleInstance& inst) {
  if (inst.demand.empty()) throw InputError("divisible instance needs at least one agent");
  if (inst.goods == 0) throw InputError("divisible instance needs at least one good");
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const auto& row = inst.demand[i];
    if (row.size() != inst.goods)
      throw InputError("agent " + std::to_string(i + 1) + ": demand has " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(inst.goods));
    bool positive = false;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (sgn(row[j]) < 0 || row[j] > 1)
        throw InputError("agent " + std::to_string(i + 1) + ", good " + std::to_string(j + 1) +
                         ": demand outside [0, 1]");
      positive = positive || sgn(row[j]) > 0;
    }
    if (!positive) throw InputError("agent " + std::to_string(i + 1) + " demands nothing");
  }
}

inline void validate(const CakeInstance& inst) {
  if (inst.demands.empty()) throw InputError("cake instance needs at least one agent");
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const Piece& d = inst.demands[i];
    if (d.empty()) throw InputError("agent " + std::to_string(i + 1) + " has an empty demand");
    if (canonicalize_piece(d) != d)
      throw InputError("agent " + std::to_string(i + 1) + ": demand intervals not sorted and disjoint");
  }
}

inline void validate(const DiscreteInstance& inst) {
  if (inst.demands.empty()) throw InputError("discrete instance needs at least one agent");
  if (inst.quantities.empty()) throw InputError("discrete instance needs at least one item");
  for (std::size_t j = 0; j < inst.items(); ++j)
    if (inst.quantities[j] < 1) throw InputError("item " + std::to_string(j + 1) + " has no copies");
  std::vector<bool> demanded(inst.items(), false);
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const auto& d = inst.demands[i];
    if (d.empty()) throw InputError("agent " + std::to_string(i + 1) + " has an empty demand set");
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (d[k] >= inst.items())
        throw InputError("agent " + std::to_string(i + 1) + " demands unknown item " + std::to_string(d[k] + 1));
      if (k > 0 && d[k] <= d[k - 1])
        throw InputError("agent " + std::to_string(i + 1) + ": demand set not sorted or has duplicates");
      demanded[d[k]] = true;
    }
  }
  for (std::size_t j = 0; j < inst.items(); ++j)
    if (!demanded[j]) throw InputError("item " + std::to_string(j + 1) + " is demanded by nobody");
}

inline DivisibleInstance make_divisible(RationalMatrix demand) {
  DivisibleInstance inst;
  inst.goods = demand.empty() ? 0 : demand.front().size();
  inst.demand = std::move(demand);
  validate(inst);
  return inst;
}

inline CakeInstance make_cake(std::vector<std::vector<Interval>> raw) {
  CakeInstance inst;
  for (auto& d : raw) inst.demands.push_back(canonicalize_piece(std::move(d)));
  validate(inst);
  return inst;
}

/// Demand sets are normalized (sorted, deduplicated) before validation.
inline DiscreteInstance make_discrete(std::vector<Count> quantities, std::vector<std::vector<std::size_t>> demands) {
  for (auto& d : demands) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  DiscreteInstance inst{std::move(quantities), std::move(demands)};
  validate(inst);
  return inst;
}

// ---------------------------------------------------------------------------
// Prices, allocations, solutions

using PriceVector = RationalVector;

/// Piecewise-constant price density on [0, 1].
struct PriceCurve {
  std::vector<Rational> breakpoints{Rational(0), Rational(1)};
  std::vector<Rational> densities{Rational(0)};
};

inline void validate(const PriceCurve& curve) {
  const auto& b = curve.breakpoints;
  if (b.size() < 2 || sgn(b.front()) != 0 || b.back() != 1)
    throw InputError("price curve must start at 0 and end at 1");
  for (std::size_t k = 1; k < b.size(); ++k)
    if (b[k] <= b[k - 1]) throw InputError("price curve breakpoints must be strictly increasing");
  if (curve.densities.size() + 1 != b.size()) throw InputError("price curve needs one density per cell");
  for (const Rational& d : curve.densities)
    if (sgn(d) < 0) throw InputError("price curve density is negative");
}

/// Builds a curve from cell boundaries and per-cell total prices.
inline PriceCurve curve_from_cell_prices(const std::vector<Rational>& breakpoints, const RationalVector& cell_prices) {
  PriceCurve curve;
  curve.breakpoints.clear();
  curve.densities.clear();
  curve.breakpoints.push_back(breakpoints.front());
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    Rational density = cell_prices[k] / (breakpoints[k + 1] - breakpoints[k]);
    if (!curve.densities.empty() && curve.densities.back() == density) {
      curve.breakpoints.back() = breakpoints[k + 1];
    } else {
      curve.densities.push_back(density);
      curve.breakpoints.push_back(breakpoints[k + 1]);
    }
  }
  return curve;
}

using DivisibleAllocation = RationalMatrix;
using CakeAllocation = std::vector<Piece>;
using DiscreteAllocation = std::vector<std::vector<Count>>;

/// Whether every unit of every resource must be handed out.
enum class Clearing { full, relaxed };

template <class Allocation, class Prices>
struct Solution {
  Allocation allocation;
  Prices prices;
  std::vector<AgentId> served;
  std::size_t welfare = 0;
  /// False for solutions produced by the floating-point equilibrium path.
  bool exact = true;
  Clearing clearing = Clearing::full;
  /// Which routine produced the solution.
  std::string solver;
};

using DivisibleSolution = Solution<DivisibleAllocation, PriceVector>;
using CakeSolution = Solution<CakeAllocation, PriceCurve>;
using DiscreteSolution = Solution<DiscreteAllocation, PriceVector>;

using AnyInstance = std::variant<DivisibleInstance, CakeInstance, DiscreteInstance>;
using AnySolution = std::variant<DivisibleSolution, CakeSolution, DiscreteSolution>;

// ---------------------------------------------------------------------------
// Valuation and pricing queries

inline void check_agent(std::size_t agents, AgentId agent) {
  if (agent >= agents) throw InputError("agent index " + std::to_string(agent + 1) + " out of range");
}

/// 1 iff the bundle covers the agent's demand. `slack` loosens the
/// componentwise comparison for the floating-point path.
inline int single_minded_utility(const DivisibleInstance& inst, AgentId agent, const RationalVector& bundle,
                                 const Rational& slack = Rational(0)) {
  check_agent(inst.agents(), agent);
  if (bundle.size() != inst.goods) throw InputError("bundle dimension mismatch");
  for (std::size_t j = 0; j < inst.goods; ++j)
    if (bundle[j] + slack < inst.demand[agent][j]) return 0;
  return 1;
}

inline int single_minded_utility(const CakeInstance& inst, AgentId agent, const Piece& bundle) {
  check_agent(inst.agents(), agent);
  return piece_contains(bundle, inst.demands[agent]) ? 1 : 0;
}

inline int single_minded_utility(const DiscreteInstance& inst, AgentId agent, const std::vector<Count>& bundle) {
  check_agent(inst.agents(), agent);
  if (bundle.size() != inst.items()) throw InputError("bundle dimension mismatch");
  for (std::size_t j : inst.demands[agent])
    if (bundle[j] < 1) return 0;
  return 1;
}

/// Per-unit (divisible) or per-copy (discrete) prices times quantities.
template <class Quantity>
Rational bundle_price(const PriceVector& prices, const std::vector<Quantity>& bundle) {
  if (prices.size() != bundle.size())
    throw InputError("price vector has " + std::to_string(prices.size()) + " entries, bundle has " +
                     std::to_string(bundle.size()));
  Rational total(0);
  for (std::size_t j = 0; j < prices.size(); ++j) {
    if constexpr (std::is_same_v<Quantity, Rational>) {
      total += prices[j] * bundle[j];
    } else {
      total += prices[j] * Rational(static_cast<long>(bundle[j]));
    }
  }
  return total;
}

/// Integral of the density over the piece.
inline Rational bundle_price(const PriceCurve& curve, const Piece& piece) {
  Rational total(0);
  for (std::size_t k = 0; k < curve.densities.size(); ++k) {
    if (sgn(curve.densities[k]) == 0) continue;
    Rational len = overlap_length(piece, curve.breakpoints[k], curve.breakpoints[k + 1]);
    if (sgn(len) != 0) total += curve.densities[k] * len;
  }
  return total;
}

/// Price of one copy of each item in `items`.
inline Rational set_price(const PriceVector& prices, const std::vector<std::size_t>& items) {
  Rational total(0);
  for (std::size_t j : items) total += prices.at(j);
  return total;
}

inline Rational demand_price(const DivisibleInstance& inst, const PriceVector& prices, AgentId i) {
  return bundle_price(prices, inst.demand[i]);
}
inline Rational demand_price(const CakeInstance& inst, const PriceCurve& curve, AgentId i) {
  return bundle_price(curve, inst.demands[i]);
}
inline Rational demand_price(const DiscreteInstance& inst, const PriceVector& prices, AgentId i) {
  return set_price(prices, inst.demands[i]);
}

// ---------------------------------------------------------------------------
// Agent types

struct TypePartition {
  /// type_of[i] is the type of agent i; types are numbered by first appearance.
  std::vector<std::size_t> type_of;
  /// members[t] lists the agents of type t in increasing order.
  std::vector<std::vector<AgentId>> members;

  [[nodiscard]] std::size_t type_count() const { return members.size(); }
  [[nodiscard]] AgentId representative(std::size_t type) const { return members[type].front(); }
};

namespace detail {
template <class Key>
TypePartition group_by(const std::vector<Key>& keys) {
  TypePartition out;
  std::map<Key, std::size_t> seen;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, inserted] = seen.emplace(keys[i], out.members.size());
    if (inserted) out.members.emplace_back();
    out.type_of.push_back(it->second);
    out.members[it->second].push_back(i);
  }
  return out;
}

inline std::vector<std::string> rational_keys(const RationalMatrix& rows) {
  std::vector<std::string> keys;
  for (const auto& row : rows) {
    std::string key;
    for (const Rational& v : row) key += to_string(v) + ",";
    keys.push_back(std::move(key));
  }
  return keys;
}
}  // namespace detail

inline TypePartition group_types(const DivisibleInstance& inst) {
  return detail::group_by(detail::rational_keys(inst.demand));
}

inline TypePartition group_types(const CakeInstance& inst) {
  RationalMatrix flat;
  for (const Piece& p : inst.demands) {
    RationalVector row;
    for (const Interval& iv : p) {
      row.push_back(iv.lo);
      row.push_back(iv.hi);
    }
    flat.push_back(std::move(row));
  }
  return detail::group_by(detail::rational_keys(flat));
}

inline TypePartition group_types(const DiscreteInstance& inst) { return detail::group_by(inst.demands); }

}  // namespace caei
