#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace caei;
using fixtures::q;

namespace {

DivisibleInstance three_identical() { return make_divisible({{q(1, 2)}, {q(1, 2)}, {q(1, 2)}}); }

}  // namespace

TEST_CASE("eg: two-agent example prices good 2 at 2 and serves one agent") {
  const EgResult r = solve_eg(fixtures::divisible_two_agents());
  REQUIRE(r.status == EgStatus::converged);
  REQUIRE(r.solution);
  CHECK(std::abs(r.prices[0]) < 1e-6);
  CHECK(std::abs(r.prices[1] - 2.0) < 1e-6);
  CHECK(r.solution->welfare == 1);
  CHECK(std::abs(to_double(r.solution->allocation[0][1]) - 0.5) < 1e-6);
  CHECK(std::abs(to_double(r.solution->allocation[1][1]) - 0.5) < 1e-6);
  CHECK_FALSE(r.solution->exact);
  CHECK(verify_caei(fixtures::divisible_two_agents(), *r.solution, q(1, 1000000)).is_caei);
}

TEST_CASE("eg: single agent takes the whole good") {
  const auto inst = make_divisible({{q(1, 2)}});
  const EgResult r = solve_eg(inst);
  REQUIRE(r.solution);
  CHECK(r.solution->welfare == 1);
  CHECK(r.solution->allocation[0][0] == 1);
  CHECK(r.prices[0] <= 2.0 + 1e-9);
  CHECK(bundle_price(r.solution->prices, r.solution->allocation[0]) <= 1 + q(1, 1000000));
}

TEST_CASE("eg: identical twins are both priced out") {
  const auto inst = make_divisible({{q(1), q(0)}, {q(1), q(0)}});
  const EgResult r = solve_eg(inst);
  REQUIRE(r.solution);
  CHECK(std::abs(r.prices[0] - 2.0) < 1e-6);
  CHECK(r.solution->welfare == 0);
  CHECK(std::abs(r.utilities[0] - 0.5) < 1e-6);
  CHECK(verify_caei(inst, *r.solution, q(1, 1000000)).is_caei);
}

TEST_CASE("eg: iteration cap is reported, never a silent solution") {
  EgOptions tight;
  tight.max_iterations = 1;
  tight.tolerance = 1e-15;
  const EgResult r = solve_eg(make_divisible({{q(1, 2), q(2, 5), q(1, 7)}, {q(0), q(3, 5), q(1, 3)}, {q(1, 9), q(0), q(1)}}), tight);
  if (r.status == EgStatus::iteration_limit) CHECK_FALSE(r.solution.has_value());
}

TEST_CASE("subset lp: both agents of the two-agent example") {
  const auto inst = fixtures::divisible_two_agents();
  const auto sol = subset_caei_lp(inst, {0, 1});
  REQUIRE(sol);
  CHECK(sol->welfare == 2);
  CHECK(sol->prices == PriceVector{q(1, 3), q(5, 3)});
  CHECK(verify_caei(inst, *sol).is_caei);
}

TEST_CASE("subset lp: identical agents cannot be split") {
  CHECK_FALSE(subset_caei_lp(three_identical(), {0}).has_value());
  const SubsetLp empty = solve_subset_lp(three_identical(), {}, Clearing::full);
  REQUIRE(empty.outcome.optimal());
  CHECK(empty.epsilon == q(1, 2));
  CHECK(empty.prices == PriceVector{q(3)});
  const auto sol = subset_caei_lp(three_identical(), {});
  REQUIRE(sol);
  CHECK(sol->welfare == 0);
  for (const auto& row : sol->allocation) CHECK(row[0] == q(1, 3));
}

TEST_CASE("max welfare caei examples") {
  const auto two = max_welfare_caei(fixtures::divisible_two_agents(), Grouping::by_agents);
  REQUIRE(two);
  CHECK(two->welfare == 2);

  const auto three = max_welfare_caei(three_identical());
  REQUIRE(three);
  CHECK(three->welfare == 0);
  CHECK(three->prices == PriceVector{q(3)});

  const auto single = max_welfare_caei(make_divisible({{q(1, 5)}}));
  REQUIRE(single);
  CHECK(single->welfare == 1);
}

TEST_CASE("max welfare caei: grouping by types matches grouping by agents") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto inst = std::get<DivisibleInstance>(fixtures::random_instance(Model::divisible, 4, 2, seed, false, 2));
    const auto by_types = max_welfare_caei(inst, Grouping::by_types);
    const auto by_agents = max_welfare_caei(inst, Grouping::by_agents);
    REQUIRE(by_types);
    REQUIRE(by_agents);
    CHECK(by_types->welfare == by_agents->welfare);
    CHECK(verify_caei(inst, *by_types).is_caei);
    const EgResult eg = solve_eg(inst);
    if (eg.solution) CHECK(by_types->welfare >= eg.solution->welfare);
  }
}

TEST_CASE("prices for allocation") {
  CHECK_FALSE(prices_for_allocation(fixtures::divisible_strict(), fixtures::divisible_strict_alloc()).has_value());

  const auto inst = fixtures::divisible_two_agents();
  const DivisibleAllocation x{{q(1), q(2, 5)}, {q(0), q(3, 5)}};
  const auto p = prices_for_allocation(inst, x);
  REQUIRE(p);
  DivisibleSolution sol;
  sol.allocation = x;
  sol.prices = *p;
  sol.served = {0, 1};
  sol.welfare = 2;
  CHECK(verify_caei(inst, sol).is_caei);

  const auto lone = make_divisible({{q(1, 3), q(1, 4)}});
  CHECK(prices_for_allocation(lone, {{q(1), q(1)}}).has_value());

  CHECK_THROWS_AS(prices_for_allocation(inst, {{q(1), q(1)}, {q(1), q(0)}}), InputError);
}

TEST_CASE("allocation for prices") {
  const auto inst = fixtures::divisible_two_agents();
  const auto x = allocation_for_prices(inst, {q(1, 3), q(5, 3)});
  REQUIRE(x);
  CHECK(single_minded_utility(inst, 0, (*x)[0]) == 1);
  CHECK(single_minded_utility(inst, 1, (*x)[1]) == 1);

  const auto zero = allocation_for_prices(inst, {q(0), q(0)});
  REQUIRE(zero);
  CHECK(detail::served_agents(inst, *zero) == std::vector<AgentId>{0, 1});

  CHECK_FALSE(allocation_for_prices(three_identical(), {q(1)}).has_value());
  CHECK_THROWS_AS(allocation_for_prices(inst, {q(1)}), InputError);
}

TEST_CASE("relaxed clearing may leave goods unsold") {
  const auto inst = make_divisible({{q(1, 2)}, {q(1, 2)}, {q(1, 2)}});
  const auto sol = max_welfare_caei(inst, Grouping::by_types, Clearing::relaxed);
  REQUIRE(sol);
  CHECK(verify_caei(inst, *sol, Rational(0), Clearing::relaxed).is_caei);
}
