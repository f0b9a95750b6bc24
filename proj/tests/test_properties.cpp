// Allocation axioms checked on randomly generated games.
#include <gtest/gtest.h>

#include <random>

#include "gsa/allocations.hpp"
#include "oracles.hpp"

using namespace gsa;

namespace {

constexpr int kGames = 50;
constexpr double kTol = 1e-9;

Mask swap_players(Mask m, int i, int j) {
  const bool bi = m >> i & 1U;
  const bool bj = m >> j & 1U;
  m &= ~((Mask{1} << i) | (Mask{1} << j));
  if (bi) m |= Mask{1} << j;
  if (bj) m |= Mask{1} << i;
  return m;
}

int local_index(Mask members, int i) { return std::popcount(members & ((Mask{1} << i) - 1)); }

// Game on d players where `null_player` never changes a coalition's value.
GameTable with_null_player(const GameTable& g, int null_player) {
  const int d = g.players() + 1;
  return GameTable::from_function(d, [&](Coalition a) {
    const Mask m = a.bits();
    const Mask low = m & ((Mask{1} << null_player) - 1);
    const Mask high = (m >> (null_player + 1)) << null_player;
    return g[low | high];
  });
}

std::vector<std::function<Allocation(const GameTable&)>> positive_rules() {
  return {shapley_coalitional, [](const GameTable& g) { return shapley_permutation(g); },
          proportional_values, [](const GameTable& g) { return proportional_values_extended(g); },
          [](const GameTable& g) { return pme_from_total_indices(g); }};
}

}  // namespace

TEST(Axioms, Efficiency) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < kGames; ++t) {
    const int d = 1 + t % 6;
    GameTable g = oracle::random_monotone_game(d, rng);
    for (const auto& rule : positive_rules()) {
      auto a = rule(g);
      double sum = 0;
      for (double s : a.shares) sum += s;
      EXPECT_NEAR(sum, g.grand_value(), 1e-10 * std::max(1.0, g.grand_value()));
    }
    GameTable arbitrary = oracle::random_game(d, rng);
    auto sh = shapley_coalitional(arbitrary);
    double sum = 0;
    for (double s : sh.shares) sum += s;
    EXPECT_NEAR(sum, arbitrary.grand_value(), 1e-10 * std::max(1.0, std::abs(arbitrary.grand_value())));
  }
}

TEST(Axioms, EfficiencyWithNulls) {
  std::mt19937_64 rng(102);
  for (int t = 0; t < kGames; ++t) {
    const int d = 2 + t % 4;
    GameTable g = oracle::game_with_planted_nulls(d, oracle::random_nulls(d, 1 + t % 3, rng), rng);
    auto a = proportional_values_extended(g);
    double sum = 0;
    for (double s : a.shares) sum += s;
    EXPECT_NEAR(sum, g.grand_value(), 1e-10 * std::max(1.0, g.grand_value()));
  }
}

TEST(Axioms, Nonnegativity) {
  std::mt19937_64 rng(103);
  for (int t = 0; t < kGames; ++t) {
    const int d = 1 + t % 6;
    GameTable g = oracle::random_monotone_game(d, rng);
    for (const auto& rule : positive_rules()) {
      for (double s : rule(g).shares) EXPECT_GE(s, -1e-12);
    }
    GameTable n = oracle::game_with_planted_nulls(std::max(d, 2), oracle::random_nulls(std::max(d, 2), 2, rng), rng);
    for (double s : proportional_values_extended(n).shares) EXPECT_GE(s, -1e-12);
    for (double s : shapley_coalitional(n).shares) EXPECT_GE(s, -1e-12);
  }
}

TEST(Axioms, NullPlayer) {
  std::mt19937_64 rng(104);
  for (int t = 0; t < kGames; ++t) {
    const int d = 1 + t % 5;
    const int null_player = static_cast<int>(rng() % static_cast<unsigned>(d + 1));
    GameTable g = with_null_player(oracle::random_game(d, rng), null_player);
    EXPECT_NEAR(shapley_coalitional(g)[null_player], 0.0, 1e-12);
    GameTable m = with_null_player(oracle::random_monotone_game(d, rng), null_player);
    EXPECT_NEAR(shapley_coalitional(m)[null_player], 0.0, 1e-12);
    EXPECT_EQ(proportional_values_extended(m)[null_player], 0.0);
  }
}

TEST(Axioms, Symmetry) {
  std::mt19937_64 rng(105);
  for (int t = 0; t < kGames; ++t) {
    const int d = 2 + t % 5;
    const int i = static_cast<int>(rng() % static_cast<unsigned>(d));
    const int j = (i + 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1))) % d;
    GameTable base = oracle::random_monotone_game(d, rng);
    // Symmetrized game: i and j contribute identically.
    GameTable sym = GameTable::from_function(d, [&](Coalition a) {
      return base[a.bits()] + base[swap_players(a.bits(), i, j)];
    });
    // Relabelled game: shares must be relabelled the same way.
    GameTable swapped = GameTable::from_function(d, [&](Coalition a) { return base[swap_players(a.bits(), i, j)]; });
    for (const auto& rule : positive_rules()) {
      auto s = rule(sym);
      EXPECT_NEAR(s[i], s[j], kTol);
      auto a = rule(base);
      auto b = rule(swapped);
      EXPECT_NEAR(a[i], b[j], kTol);
      EXPECT_NEAR(a[j], b[i], kTol);
    }
  }
}

TEST(Axioms, ShapleySelfDuality) {
  std::mt19937_64 rng(106);
  for (int t = 0; t < kGames; ++t) {
    const int d = 1 + t % 7;
    GameTable g = oracle::random_game(d, rng);
    auto a = shapley_coalitional(g);
    auto b = shapley_coalitional(dual(g));
    for (int i = 0; i < d; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  }
}

TEST(Axioms, PvIsNotSelfDual) {
  GameTable g(2, {0, 1, 3, 8});
  auto a = proportional_values(g);
  auto b = proportional_values(dual(g));
  EXPECT_GT(std::abs(a[0] - b[0]), 0.1);
}

TEST(Axioms, BalancedContributionsShapley) {
  std::mt19937_64 rng(107);
  for (int t = 0; t < kGames; ++t) {
    const int d = 2 + t % 3;
    GameTable g = oracle::random_game(d, rng);
    for (Mask a = 1; a <= full_mask(d); ++a) {
      if (std::popcount(a) < 2) continue;
      const auto members = Coalition(a, d).members();
      const auto full = shapley_coalitional(subgame(g, Coalition(a, d)));
      for (int i : members) {
        for (int j : members) {
          if (i == j) continue;
          const Mask a_no_j = a & ~(Mask{1} << j);
          const Mask a_no_i = a & ~(Mask{1} << i);
          const double lhs = full[local_index(a, i)] - shapley_coalitional(subgame(g, Coalition(a_no_j, d)))[local_index(a_no_j, i)];
          const double rhs = full[local_index(a, j)] - shapley_coalitional(subgame(g, Coalition(a_no_i, d)))[local_index(a_no_i, j)];
          EXPECT_NEAR(lhs, rhs, kTol);
        }
      }
    }
  }
}

TEST(Axioms, EqualProportionalGainsPv) {
  std::mt19937_64 rng(108);
  for (int t = 0; t < kGames; ++t) {
    const int d = 2 + t % 3;
    GameTable g = oracle::random_monotone_game(d, rng);
    for (Mask a = 1; a <= full_mask(d); ++a) {
      if (std::popcount(a) < 2) continue;
      const auto members = Coalition(a, d).members();
      const auto full = proportional_values(subgame(g, Coalition(a, d)));
      for (int i : members) {
        for (int j : members) {
          if (i == j) continue;
          const Mask a_no_j = a & ~(Mask{1} << j);
          const Mask a_no_i = a & ~(Mask{1} << i);
          const double lhs = full[local_index(a, i)] / full[local_index(a, j)];
          const double rhs = proportional_values(subgame(g, Coalition(a_no_j, d)))[local_index(a_no_j, i)] /
                             proportional_values(subgame(g, Coalition(a_no_i, d)))[local_index(a_no_i, j)];
          EXPECT_NEAR(lhs / rhs, 1.0, kTol);
        }
      }
    }
  }
}

TEST(Axioms, PositiveHomogeneity) {
  std::mt19937_64 rng(109);
  for (int t = 0; t < kGames; ++t) {
    const int d = 1 + t % 5;
    const double c = std::exp(oracle::uniform(rng, -3, 3));
    GameTable g = oracle::random_monotone_game(d, rng);
    GameTable scaled = g.scaled(c);
    for (const auto& rule : positive_rules()) {
      auto a = rule(g);
      auto b = rule(scaled);
      for (int i = 0; i < d; ++i) EXPECT_NEAR(b[i], c * a[i], kTol * std::max(1.0, c * a[i]));
    }
    GameTable n = oracle::game_with_planted_nulls(std::max(2, d), oracle::random_nulls(std::max(2, d), 2, rng), rng);
    auto a = proportional_values_extended(n);
    auto b = proportional_values_extended(n.scaled(c));
    for (int i = 0; i < n.players(); ++i) EXPECT_NEAR(b[i], c * a[i], kTol * std::max(1.0, c * a[i]));
  }
}

TEST(Pv0Continuity, EpsilonSequenceConverges) {
  std::mt19937_64 rng(110);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 4;
    GameTable g = oracle::game_with_planted_nulls(d, oracle::random_nulls(d, 1 + t % 3, rng), rng);
    const auto limit = proportional_values_extended(g);
    auto gap = [&](double eps) {
      const auto pv = proportional_values(oracle::perturb_nulls(g, eps));
      double worst = 0;
      for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(pv[i] - limit[i]));
      return worst;
    };
    const double g3 = gap(1e-3);
    const double g6 = gap(1e-6);
    EXPECT_LT(g6, 1e-3);
    EXPECT_LE(g6, g3);
  }
}
