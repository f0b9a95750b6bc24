#include <gtest/gtest.h>

#include <random>

#include "gsa/allocations.hpp"
#include "gsa/gaussian.hpp"
#include "oracles.hpp"

using namespace gsa;

namespace {

void expect_shares(const Allocation& a, std::vector<double> expected, double tol = 1e-12) {
  ASSERT_EQ(a.shares.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(a.shares[i], expected[i], tol) << "player " << i;
}

const GameTable kTwoPlayer(2, {0, 1, 3, 8});

}  // namespace

TEST(Shapley, TwoPlayerSurplusSplitEvenly) {
  expect_shares(shapley_coalitional(kTwoPlayer), {3, 5});
  expect_shares(shapley_permutation(kTwoPlayer), {3, 5});
}

TEST(Shapley, AdditiveGame) {
  auto g = GameTable::from_function(5, [](Coalition a) { return static_cast<double>(a.size()); });
  expect_shares(shapley_coalitional(g), {1, 1, 1, 1, 1});
}

TEST(Shapley, JokeExample) {
  auto g = toycase_game({ToyCase::ShapleyJoke, 0.5});
  expect_shares(shapley_effects_from_indices(g), {0.875, 0.125});
  expect_shares(shapley_effects_from_indices(toycase_game({ToyCase::ShapleyJoke, 0.0})), {1, 0});
}

TEST(Shapley, PermutationGuard) {
  std::vector<double> v(std::size_t{1} << 11, 1.0);
  v[0] = 0;
  EXPECT_THROW(shapley_permutation(GameTable(11, v)), ComplexityError);
}

TEST(Shapley, FormsAgreeOnRandomGames) {
  std::mt19937_64 rng(21);
  for (int d = 1; d <= 7; ++d) {
    GameTable g = oracle::random_game(d, rng);
    auto a = shapley_coalitional(g);
    auto b = shapley_permutation(g);
    auto c = oracle::shapley_by_orderings(g);
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-10);
      EXPECT_NEAR(a[i], c[static_cast<std::size_t>(i)], 1e-10);
    }
  }
}

TEST(RandomOrder, UniformIsShapley) {
  std::mt19937_64 rng(2);
  GameTable g = oracle::random_monotone_game(4, rng);
  expect_shares(random_order_allocation(g, OrderingPmf::uniform(4)), shapley_coalitional(g).shares, 1e-12);
}

TEST(RandomOrder, PointMassGivesMarginals) {
  GameTable g(3, {0, 1, 2, 4, 3, 6, 7, 10});
  // order 2, 0, 1: v({2})=3, v({0,2})=6 -> +3, v(D)=10 -> +4
  expect_shares(random_order_allocation(g, OrderingPmf::point({2, 0, 1})), {3, 4, 3});
}

TEST(RandomOrder, ProportionalPmfGivesPv) {
  std::mt19937_64 rng(4);
  for (int d = 2; d <= 5; ++d) {
    GameTable g = oracle::random_monotone_game(d, rng);
    expect_shares(random_order_allocation(g, OrderingPmf::proportional(g)), proportional_values(g).shares, 1e-10);
  }
}

TEST(RandomOrder, RejectsUnnormalized) {
  OrderingPmf pmf(2, {{{0, 1}, 0.3}, {{1, 0}, 0.3}});
  EXPECT_FALSE(pmf.normalized());
  EXPECT_THROW(random_order_allocation(kTwoPlayer, pmf), ContractError);
  EXPECT_THROW(OrderingPmf(2, {{{0, 0}, 1.0}}), ContractError);
}

TEST(RatioPotential, HandValues) {
  EXPECT_DOUBLE_EQ(ratio_potential(kTwoPlayer, Coalition::empty(2)), 1.0);
  EXPECT_DOUBLE_EQ(ratio_potential(kTwoPlayer, Coalition::of({1}, 2)), 3.0);
  EXPECT_NEAR(ratio_potential(kTwoPlayer, Coalition::grand(2)), 6.0, 1e-14);
}

TEST(RatioPotential, MatchesRecursiveDefinition) {
  std::mt19937_64 rng(9);
  for (int d = 1; d <= 7; ++d) {
    GameTable g = oracle::random_monotone_game(d, rng);
    std::map<Mask, double> memo;
    const double expected = oracle::ratio_potential_recursive([&](Mask m) { return g[m]; }, full_mask(d), memo);
    EXPECT_NEAR(ratio_potential(g, Coalition::grand(d)) / expected, 1.0, 1e-12);
  }
}

TEST(RatioPotential, RejectsNullValues) {
  EXPECT_THROW(ratio_potential(GameTable(2, {0, 0, 1, 1}), Coalition::grand(2)), PositivityError);
}

TEST(ProportionalValues, TwoPlayerProportionalSplit) {
  expect_shares(proportional_values(kTwoPlayer), {2, 6});
  expect_shares(pv_permutation_oracle(kTwoPlayer), {2, 6});
}

TEST(ProportionalValues, Symmetric) {
  expect_shares(proportional_values(GameTable(2, {0, 0.7, 0.7, 3})), {1.5, 1.5});
  auto g = GameTable::from_function(3, [](Coalition a) { return static_cast<double>(a.size()); });
  expect_shares(pv_permutation_oracle(g), {1, 1, 1});
}

TEST(ProportionalValues, MatchesOracles) {
  std::mt19937_64 rng(17);
  for (int d = 2; d <= 6; ++d) {
    GameTable g = oracle::random_monotone_game(d, rng);
    auto pv = proportional_values(g);
    auto perm = pv_permutation_oracle(g);
    auto rec = oracle::pv_by_recursion(g);
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(pv[i], perm[i], 1e-9);
      EXPECT_NEAR(pv[i], rec[static_cast<std::size_t>(i)], 1e-9);
    }
  }
}

TEST(ProportionalValues, ZeroValueIsAnError) {
  EXPECT_THROW(proportional_values(GameTable(2, {0, 0, 1, 1})), PositivityError);
  std::vector<double> v(std::size_t{1} << 9, 1.0);
  v[0] = 0;
  EXPECT_THROW(pv_permutation_oracle(GameTable(9, v)), ComplexityError);
}

TEST(ZeroStructure, PositiveGame) {
  auto z = zero_structure(kTwoPlayer, 0.0);
  EXPECT_EQ(z.k_max, 0);
  EXPECT_EQ(z.largest_nulls, (std::vector<Mask>{0}));
  EXPECT_TRUE(z.common_players().empty());
}

TEST(ZeroStructure, ExogenousToyCase) {
  auto z = zero_structure(toycase_game({ToyCase::ExogenousLinear, 0.5}), 0.0);
  EXPECT_EQ(z.k_max, 1);
  EXPECT_EQ(z.largest_nulls, (std::vector<Mask>{0b100}));
  EXPECT_EQ(z.common_players(), (std::vector<int>{2}));
}

TEST(ZeroStructure, EmptyIntersection) {
  auto z = zero_structure(GameTable(2, {0, 0, 0, 1}), 0.0);
  EXPECT_EQ(z.k_max, 1);
  EXPECT_EQ(z.largest_nulls, (std::vector<Mask>{0b01, 0b10}));
  EXPECT_TRUE(z.common_players().empty());
}

TEST(ZeroStructure, ThresholdClassifiesNearZeros) {
  GameTable g(2, {0, 1e-4, 0.5, 1});
  EXPECT_EQ(zero_structure(g, 0.0).k_max, 0);
  EXPECT_EQ(zero_structure(g, 1e-3).k_max, 1);
}

TEST(Pv0, ReducesToPvOnPositiveGames) {
  std::mt19937_64 rng(23);
  for (int d = 1; d <= 6; ++d) {
    GameTable g = oracle::random_monotone_game(d, rng);
    auto a = proportional_values(g);
    auto b = proportional_values_extended(g);
    for (int i = 0; i < d; ++i) EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Pv0, ExogenousToyCaseAnyRho) {
  for (double rho : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
    expect_shares(proportional_values_extended(toycase_game({ToyCase::ExogenousLinear, rho})), {0.5, 0.5, 0}, 1e-12);
  }
}

TEST(Pv0, EpsilonLimitOnExogenousToyCase) {
  GameTable g = toycase_game({ToyCase::ExogenousLinear, 0.5});
  auto limit = proportional_values_extended(g);
  auto near = proportional_values(oracle::perturb_nulls(g, 1e-6));
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(near[i] - limit[i]), 1e-4);
}

TEST(Pv0, DegenerateGame) {
  auto a = proportional_values_extended(GameTable(2, {0, 0, 0, 0}));
  EXPECT_TRUE(a.degenerate);
  expect_shares(a, {0, 0});
}

TEST(Pv0, WarnsOnNonMonotone) {
  auto a = proportional_values_extended(GameTable(2, {0, 0.7, 0.2, 0.6}));
  EXPECT_FALSE(a.warnings.empty());
  EXPECT_NEAR(a.shares[0] + a.shares[1], 0.6, 1e-14);
}

TEST(Pme, ToyCases) {
  expect_shares(pme_from_total_indices(toycase_game({ToyCase::ExogenousLinear, 0.5})), {0.5, 0.5, 0});
  for (double rho : {-0.5, 0.0, 0.7}) {
    expect_shares(pme_from_total_indices(toycase_game({ToyCase::InteractionLinear, rho, 1.0, 1.0})),
                  {2.0 / 3.0, 1.0 / 3.0});
  }
  for (double rho : {-0.5, 0.0, 0.7}) {
    auto g = toycase_game({ToyCase::UnbalancedLinear, rho, 1.0});
    expect_shares(pme_from_total_indices(g), shapley_effects_from_indices(g).shares, 1e-12);
  }
}

TEST(Pme, DegenerateThrows) {
  EXPECT_THROW(pme_from_total_indices(GameTable(2, {0, 0, 0, 0})), DegenerateGameError);
  EXPECT_THROW(pme_from_total_indices(GameTable(2, {0, 1e-5, 1e-5, 1e-4}), 1e-3), DegenerateGameError);
}

TEST(Pme, SharesSumToGrandValue) {
  auto a = pme_from_total_indices(GameTable(2, {0, 1, 2, 4}));
  EXPECT_NEAR(a.shares[0] + a.shares[1], 4.0, 1e-14);
  EXPECT_EQ(a.method, AllocationMethod::PME);
}

TEST(ShapleyEffects, ExogenousToyCase) {
  expect_shares(shapley_effects_from_indices(toycase_game({ToyCase::ExogenousLinear, 0.5})),
                {0.4375, 0.5, 0.0625});
}

TEST(ShapleyEffects, UnbalancedBetaTwoIndependent) {
  auto g = toycase_game({ToyCase::UnbalancedLinear, 0.0, 2.0});
  EXPECT_NEAR(toycase_model({ToyCase::UnbalancedLinear, 0.0, 2.0}).output_variance(), 6.0, 1e-14);
  expect_shares(shapley_effects_from_indices(g), {1.0 / 6, 4.0 / 6, 1.0 / 6});
}

TEST(ShapleyEffects, ClosedAndTotalTablesAgree) {
  auto model = toycase_model({ToyCase::UnbalancedLinear, -0.4, 3.0});
  auto a = shapley_effects_from_indices(closed_index_table(model));
  auto b = shapley_effects_from_indices(total_index_table(model));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Exogenous, Detection) {
  EXPECT_EQ(detect_exogenous(toycase_game({ToyCase::ExogenousLinear, 0.3})), (std::vector<int>{2}));
  EXPECT_EQ(detect_exogenous(ishigami_total_index_table(0.9)), (std::vector<int>{3}));
  EXPECT_TRUE(detect_exogenous(toycase_game({ToyCase::UnbalancedLinear, 0.3, 2.0})).empty());
}

TEST(Exogenous, PmeZeroExactlyOnExogenousPlayers) {
  for (const GameTable& g : {toycase_game({ToyCase::ExogenousLinear, 0.8}), toycase_game({ToyCase::ShapleyJoke, 0.6}),
                             ishigami_total_index_table(-0.5), ishigami_total_index_table(0.0),
                             toycase_game({ToyCase::InteractionLinear, 0.2, 1.0, 0.5})}) {
    const auto e = detect_exogenous(g);
    const auto pme = pme_from_total_indices(g);
    for (int i = 0; i < g.players(); ++i) {
      if (std::find(e.begin(), e.end(), i) != e.end()) {
        EXPECT_EQ(pme[i], 0.0);
      } else {
        EXPECT_GT(pme[i], 0.0);
      }
    }
  }
}
