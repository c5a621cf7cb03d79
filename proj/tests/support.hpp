#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "caei/caei.hpp"

namespace fixtures {

using caei::Interval;
using caei::make_rational;
using caei::Rational;

inline Rational q(long num, long den = 1) { return make_rational(num, den); }

/// Two agents and two goods; the equilibrium route serves only agent 1.
inline caei::DivisibleInstance divisible_two_agents() {
  return caei::make_divisible({{q(1, 2), q(2, 5)}, {q(0), q(3, 5)}});
}

inline caei::CakeInstance cake_halves_and_whole() {
  return caei::make_cake({{{q(0), q(1, 2)}}, {{q(1, 2), q(1)}}, {{q(0), q(1)}}});
}

inline caei::CakeInstance cake_twins() {
  return caei::make_cake({{{q(0), q(1, 2)}}, {{q(0), q(1, 2)}}, {{q(1, 2), q(1)}}});
}

inline caei::DiscreteInstance discrete_five_agents() {
  return caei::make_discrete({2, 4, 2, 3, 2}, {{0}, {0, 1}, {0, 2}, {1, 2, 3}, {1, 2, 3, 4}});
}

inline caei::DiscreteInstance discrete_no_caei() { return caei::make_discrete({2, 4}, {{0}, {0}, {0}, {0, 1}}); }

inline caei::DiscreteInstance discrete_no_ceei() { return caei::make_discrete({3, 3}, {{1}, {0, 1}, {0, 1}, {0}}); }

inline caei::DiscreteInstance discrete_two_agents() { return caei::make_discrete({1, 2, 1}, {{0, 1}, {1, 2}}); }

// Envy-free allocations that no prices support.

inline caei::DivisibleInstance divisible_strict() { return caei::make_divisible({{q(1, 5), q(1, 5)}, {q(4, 5), q(4, 5)}}); }
inline caei::DivisibleAllocation divisible_strict_alloc() { return {{q(1), q(0)}, {q(0), q(1)}}; }

inline caei::CakeInstance cake_strict() { return caei::make_cake({{{q(0), q(2, 5)}}, {{q(2, 5), q(1)}}}); }
inline caei::CakeAllocation cake_strict_alloc() {
  return {{{q(0), q(1, 5)}, {q(2, 5), q(7, 10)}}, {{q(1, 5), q(2, 5)}, {q(7, 10), q(1)}}};
}

inline caei::DiscreteInstance discrete_strict() { return caei::make_discrete({1, 1, 1, 1}, {{0, 1}, {2, 3}}); }
inline caei::DiscreteAllocation discrete_strict_alloc() { return {{1, 0, 1, 0}, {0, 1, 0, 1}}; }

/// Classical interval scheduling optimum by dynamic programming over finish
/// order; touching endpoints do not conflict.
inline std::size_t interval_scheduling_optimum(const std::vector<Interval>& jobs) {
  std::vector<Interval> sorted(jobs);
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.hi < b.hi; });
  std::vector<std::size_t> best(sorted.size() + 1, 0);
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    std::size_t compatible = 0;
    for (std::size_t p = k - 1; p > 0; --p)
      if (sorted[p - 1].hi <= sorted[k - 1].lo) {
        compatible = p;
        break;
      }
    best[k] = std::max(best[k - 1], 1 + best[compatible]);
  }
  return best.back();
}

inline caei::AnyInstance random_instance(caei::Model model, std::size_t agents, std::size_t goods, std::uint64_t seed,
                                         bool contiguous = false, std::optional<std::size_t> types = std::nullopt) {
  caei::GeneratorSpec spec;
  spec.model = model;
  spec.agents = agents;
  spec.goods = goods;
  spec.seed = seed;
  spec.contiguous = contiguous;
  spec.types = types;
  return caei::generate_instance(spec);
}

}  // namespace fixtures
