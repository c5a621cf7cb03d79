#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace caei;
using fixtures::q;

TEST_CASE("caei exists: over-demand characterization") {
  CHECK_FALSE(caei_exists(fixtures::discrete_no_caei()));
  CHECK(caei_exists(fixtures::discrete_two_agents()));
  CHECK(caei_exists(make_discrete({1, 1, 1}, {{0, 1}, {0, 2}, {1, 2}, {0, 1, 2}})));
  CHECK(caei_exists(make_discrete({1}, {{0}})));
  CHECK_FALSE(caei_exists(make_discrete({1}, {{0}, {0}})));
}

TEST_CASE("solve caei: five-agent trace") {
  const auto inst = fixtures::discrete_five_agents();
  const auto run = solve_caei_traced(inst);
  REQUIRE(run);
  const DiscreteSolution& sol = run->solution;
  CHECK(run->epsilon == q(1, 14));
  CHECK(sol.prices == PriceVector{q(1), q(1, 14), q(1), q(1, 14), q(1, 14)});
  REQUIRE(run->rounds.size() == 2);
  CHECK(run->rounds[0].item == 0);
  CHECK(run->rounds[0].recipients == std::vector<AgentId>{0, 1});
  CHECK(run->rounds[1].item == 2);
  CHECK(run->rounds[1].recipients == std::vector<AgentId>{2, 3});
  CHECK(run->remainder_items == std::vector<std::size_t>{1, 3, 4});
  CHECK(sol.allocation[4] == std::vector<Count>{0, 4, 0, 3, 2});
  CHECK(sol.allocation[0] == std::vector<Count>{1, 0, 0, 0, 0});
  CHECK(sol.allocation[3] == std::vector<Count>{0, 0, 1, 0, 0});
  CHECK(sol.welfare == 1);
  CHECK(sol.served == std::vector<AgentId>{0});
  CHECK(verify_caei(inst, sol).is_caei);
}

TEST_CASE("solve caei: everyone served without a CEEI") {
  const auto inst = fixtures::discrete_no_ceei();
  const auto sol = solve_caei(inst);
  REQUIRE(sol);
  CHECK(sol->welfare == 4);
  CHECK(sol->prices == PriceVector{q(1, 7), q(1, 7)});
  const CaeiReport r = verify_caei(inst, *sol);
  CHECK(r.is_caei);
  CHECK_FALSE(r.is_ceei);
}

TEST_CASE("solve caei: no caei") { CHECK_FALSE(solve_caei(fixtures::discrete_no_caei()).has_value()); }

TEST_CASE("solve caei: leftovers with nobody active go to the last agent") {
  const auto inst = make_discrete({1, 1}, {{0, 1}, {0, 1}});
  const auto sol = solve_caei(inst);
  REQUIRE(sol);
  CHECK(sol->welfare == 0);
  CHECK(sol->allocation[1][1] == 1);
  CHECK(verify_caei(inst, *sol).is_caei);
}

TEST_CASE("solve caei agrees with caei_exists and always verifies") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = std::get<DiscreteInstance>(fixtures::random_instance(Model::discrete, 1 + seed % 6, 1 + seed % 4, seed));
    const auto sol = solve_caei(inst);
    REQUIRE(sol.has_value() == caei_exists(inst));
    if (sol) CHECK(verify_caei(inst, *sol).is_caei);
  }
}

TEST_CASE("max welfare relaxed") {
  const auto two = max_welfare_relaxed(fixtures::discrete_two_agents());
  CHECK(two.solution.welfare == 2);

  const auto inst = fixtures::discrete_five_agents();
  const auto five = max_welfare_relaxed(inst);
  CHECK(five.solution.welfare == 4);
  CHECK(five.solution.served == std::vector<AgentId>{0, 1, 3, 4});
  CHECK(five.solution.clearing == Clearing::relaxed);
  CHECK(verify_caei(inst, five.solution, Rational(0), Clearing::relaxed).is_caei);
  for (std::size_t j = 0; j < inst.items(); ++j) {
    Count used = five.unsold[j];
    for (const auto& row : five.solution.allocation) used += row[j];
    CHECK(used == inst.quantities[j]);
  }

  CHECK(max_welfare_relaxed(make_discrete({3}, {{0}})).solution.welfare == 1);
}

TEST_CASE("prices for allocation (discrete)") {
  CHECK_FALSE(prices_for_allocation_discrete(fixtures::discrete_strict(), fixtures::discrete_strict_alloc()).has_value());

  const auto inst = fixtures::discrete_two_agents();
  const DiscreteAllocation x{{1, 1, 0}, {0, 1, 1}};
  const auto p = prices_for_allocation_discrete(inst, x);
  REQUIRE(p);
  DiscreteSolution sol;
  sol.allocation = x;
  sol.prices = *p;
  sol.served = {0, 1};
  sol.welfare = 2;
  CHECK(verify_caei(inst, sol).is_caei);

  const auto singles = make_discrete({2, 1}, {{0}, {1}});
  CHECK(prices_for_allocation_discrete(singles, {{2, 0}, {0, 1}}).has_value());
  CHECK_THROWS_AS(prices_for_allocation_discrete(singles, {{2, 0}, {1, 1}}), InputError);
}
