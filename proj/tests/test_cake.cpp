#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace caei;
using fixtures::q;

namespace {

PriceCurve uniform(const Rational& density) {
  PriceCurve c;
  c.densities = {density};
  return c;
}

}  // namespace

TEST_CASE("refine partition") {
  CHECK(refine_partition(make_cake({{{q(0), q(1)}}}), {}, SplitRule::midpoints).breakpoints ==
        std::vector<Rational>{q(0), q(1, 2), q(1)});
  CHECK(refine_partition(make_cake({{{q(0), q(1)}}}), {}, SplitRule::none).breakpoints ==
        std::vector<Rational>{q(0), q(1)});
  const auto inst = make_cake({{{q(0), q(3, 5)}}, {{q(3, 10), q(1)}}});
  CHECK(refine_partition(inst, {}, SplitRule::per_demander_count).breakpoints ==
        std::vector<Rational>{q(0), q(3, 10), q(9, 20), q(3, 5), q(1)});
  CHECK(refine_partition(inst, {q(1, 10)}).breakpoints == std::vector<Rational>{q(0), q(1, 10), q(3, 10), q(3, 5), q(1)});
}

TEST_CASE("solve existence: halves and whole") {
  const auto inst = fixtures::cake_halves_and_whole();
  const CakeSolution sol = solve_existence(inst);
  CHECK(verify_caei(inst, sol).is_caei);
  CHECK(demand_price(inst, sol.prices, 2) > 1);
  CHECK_FALSE(std::binary_search(sol.served.begin(), sol.served.end(), AgentId{2}));
}

TEST_CASE("solve existence: single agent") {
  const auto inst = make_cake({{{q(1, 5), q(2, 5)}}});
  const CakeSolution sol = solve_existence(inst);
  CHECK(sol.welfare == 1);
  CHECK(piece_length(sol.allocation[0]) == 1);
  CHECK(verify_caei(inst, sol).is_caei);
}

TEST_CASE("solve existence: identical whole-cake agents") {
  const auto inst = make_cake({{{q(0), q(1)}}, {{q(0), q(1)}}});
  const CakeSolution sol = solve_existence(inst);
  CHECK(sol.welfare == 0);
  CHECK(piece_length(sol.allocation[0]) == q(1, 2));
  CHECK(piece_length(sol.allocation[1]) == q(1, 2));
  CHECK(demand_price(inst, sol.prices, 0) > 1);
  CHECK(verify_caei(inst, sol).is_caei);
}

TEST_CASE("solve existence verifies on random instances") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto inst = std::get<CakeInstance>(fixtures::random_instance(Model::cake, 1 + seed % 5, 2, seed));
    CHECK(verify_caei(inst, solve_existence(inst)).is_caei);
  }
}

TEST_CASE("greedy contiguous: halves and whole") {
  const auto inst = fixtures::cake_halves_and_whole();
  const GreedyResult r = greedy_contiguous(inst);
  CHECK(r.solution.served == std::vector<AgentId>{0, 1});
  CHECK(r.solution.welfare == 2);
  CHECK(demand_price(inst, r.solution.prices, 2) > 1);
  CHECK(verify_caei(inst, r.solution).is_caei);
  CHECK_FALSE(r.fell_back);
}

TEST_CASE("greedy contiguous: two overlapping chains") {
  const auto inst = make_cake({{{q(0), q(3, 10)}}, {{q(1, 5), q(1, 2)}}, {{q(9, 20), q(7, 10)}}, {{q(3, 5), q(1)}}});
  const GreedyResult r = greedy_contiguous(inst);
  CHECK(r.solution.welfare == 2);
  CHECK(r.schedule.size() == 2);
  CHECK(r.solution.welfare ==
        fixtures::interval_scheduling_optimum({inst.demands[0][0], inst.demands[1][0], inst.demands[2][0], inst.demands[3][0]}));
  CHECK(verify_caei(inst, r.solution).is_caei);
}

TEST_CASE("greedy contiguous: identical twins take consolation pieces") {
  const auto inst = fixtures::cake_twins();
  const GreedyResult r = greedy_contiguous(inst);
  CHECK(r.solution.welfare == 1);
  CHECK(r.solution.served == std::vector<AgentId>{2});
  REQUIRE(r.identical_groups.size() == 1);
  CHECK(r.identical_groups[0] == std::vector<AgentId>{0, 1});
  CHECK(verify_caei(inst, r.solution).is_caei);
}

TEST_CASE("greedy contiguous rejects split demands") {
  CHECK_THROWS_AS(greedy_contiguous(make_cake({{{q(0), q(1, 5)}, {q(1, 2), q(1)}}})), InputError);
}

TEST_CASE("max welfare with few agents") {
  CHECK(max_welfare_fixed_agents(fixtures::cake_halves_and_whole()).welfare == 2);
  const auto disjoint = make_cake({{{q(0), q(3, 10)}}, {{q(1, 2), q(9, 10)}}});
  const CakeSolution d = max_welfare_fixed_agents(disjoint);
  CHECK(d.welfare == 2);
  CHECK(verify_caei(disjoint, d).is_caei);
  const auto split = make_cake({{{q(0), q(3, 5)}, {q(4, 5), q(1)}}, {{q(2, 5), q(9, 10)}}});
  const CakeSolution s = max_welfare_fixed_agents(split);
  CHECK(s.welfare == 1);
  CHECK(oracle_max_satisfiable(split).welfare == 1);
  CHECK(verify_caei(split, s).is_caei);
}

TEST_CASE("price curve for allocation") {
  CHECK_FALSE(price_curve_for_allocation(fixtures::cake_strict(), fixtures::cake_strict_alloc()).has_value());

  const auto inst = fixtures::cake_halves_and_whole();
  const CakeAllocation x{{{q(0), q(1, 2)}}, {{q(1, 2), q(1)}}, {}};
  const auto curve = price_curve_for_allocation(inst, x);
  REQUIRE(curve);
  CakeSolution sol;
  sol.allocation = x;
  sol.prices = *curve;
  sol.served = {0, 1};
  sol.welfare = 2;
  CHECK(verify_caei(inst, sol).is_caei);
  sol.prices = uniform(q(2));
  CHECK(verify_caei(inst, sol).is_caei);

  const auto cover = make_cake({{{q(0), q(2, 5)}}, {{q(2, 5), q(1)}}});
  CHECK(price_curve_for_allocation(cover, {{{q(0), q(2, 5)}}, {{q(2, 5), q(1)}}}).has_value());
}

TEST_CASE("allocation for price curve") {
  const auto inst = fixtures::cake_halves_and_whole();
  const auto x = allocation_for_price_curve(inst, uniform(q(2)));
  REQUIRE(x);
  CHECK(single_minded_utility(inst, 0, (*x)[0]) == 1);
  CHECK(single_minded_utility(inst, 1, (*x)[1]) == 1);

  CHECK_FALSE(allocation_for_price_curve(make_cake({{{q(0), q(3, 5)}}, {{q(2, 5), q(1)}}}), uniform(q(0))).has_value());
  CHECK(allocation_for_price_curve(make_cake({{{q(0), q(1, 5)}}, {{q(1, 2), q(1)}}}), uniform(q(0))).has_value());
}
