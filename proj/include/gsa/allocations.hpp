#pragma once

// Allocation rules for cooperative games stored as dense GameTables:
// Shapley values (coalitional and permutation forms), random-order
// allocations, proportional values via the ratio potential, the continuous
// extension of proportional values to nonnegative games, and the
// proportional marginal effects built on it.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gsa/coalition.hpp"
#include "gsa/numeric.hpp"

namespace gsa {

/// Orderings enumerated exhaustively by the permutation forms.
inline constexpr int kMaxPermutationPlayers = 10;
inline constexpr int kMaxPvOraclePlayers = 8;
inline constexpr int kMaxPmfPlayers = 6;

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return std::round(c);
}

inline Allocation blank_allocation(const GameTable& game, AllocationMethod method) {
  Allocation out;
  out.shares.assign(static_cast<std::size_t>(game.players()), 0.0);
  out.total = game.grand_value();
  out.method = method;
  return out;
}

/// Global masks of all subsets of `members_mask`, indexed by local mask
/// (local bit j <-> j-th lowest member).
inline std::vector<Mask> local_to_global(Mask members_mask) {
  const int a = std::popcount(members_mask);
  std::vector<int> members;
  for (Mask m = members_mask; m != 0; m &= m - 1) members.push_back(std::countr_zero(m));
  std::vector<Mask> global(std::size_t{1} << a, 0);
  for (Mask local = 1; local < global.size(); ++local) {
    const int low = std::countr_zero(local);
    global[local] = global[local & (local - 1)] | (Mask{1} << members[static_cast<std::size_t>(low)]);
  }
  return global;
}

/// Position of player i among the members of `members_mask`.
inline int local_bit(Mask members_mask, int i) {
  return std::popcount(members_mask & ((Mask{1} << i) - 1));
}

/// Inverse ratio potentials Q(B) = 1 / R(B, v) for every B subset of
/// `members_mask`, indexed by local mask. Q(empty) = 1 and
///   Q(B) = v(B)^{-1} * sum_{j in B} Q(B \ {j}),
/// swept level by level (all subsets of size k before size k+1). Sums run
/// over j in ascending order with compensation, so results do not depend
/// on scheduling.
template <class ValueFn>
std::vector<double> inverse_ratio_potentials(Mask members_mask, ValueFn&& v) {
  const int a = std::popcount(members_mask);
  const std::vector<Mask> global = local_to_global(members_mask);
  std::vector<double> q(global.size(), 0.0);
  q[0] = 1.0;
  for (int level = 1; level <= a; ++level) {
    for (Mask b : masks_of_size(a, level)) {
      const double value = v(global[b]);
      if (!(value > 0.0)) {
        throw PositivityError("ratio potential needs positive values; coalition mask " +
                              std::to_string(global[b]) + " has value " + format_double(value));
      }
      CompensatedSum acc;
      for (Mask rest = b; rest != 0; rest &= rest - 1) {
        const Mask bit = rest & (~rest + 1);
        acc.add(q[b & ~bit]);
      }
      q[b] = acc.value() / value;
    }
  }
  return q;
}

}  // namespace detail

/// Shapley values from the coalitional formula:
///   Shap_i = (1/d) sum_{A in D_{-i}} C(d-1, |A|)^{-1} [v(A u {i}) - v(A)].
inline Allocation shapley_coalitional(const GameTable& game) {
  const int d = game.players();
  Allocation out = detail::blank_allocation(game, AllocationMethod::Shapley);
  std::vector<double> weight(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) weight[static_cast<std::size_t>(s)] = 1.0 / (d * detail::binomial(d - 1, s));
  const Mask full = game.grand_mask();
  for (int i = 0; i < d; ++i) {
    const Mask bit = Mask{1} << i;
    CompensatedSum acc;
    for (Mask a = 0; a <= full; ++a) {
      if (a & bit) continue;
      acc.add(weight[static_cast<std::size_t>(std::popcount(a))] * (game[a | bit] - game[a]));
    }
    out.shares[static_cast<std::size_t>(i)] = acc.value();
  }
  out.degenerate = game.grand_value() == 0.0;
  return out;
}

/// Shapley values as the average marginal contribution over all d!
/// orderings. Exhaustive; guarded to d <= kMaxPermutationPlayers.
inline Allocation shapley_permutation(const GameTable& game) {
  const int d = game.players();
  if (d > kMaxPermutationPlayers) {
    throw ComplexityError("shapley_permutation enumerates d! orderings; d = " + std::to_string(d) +
                          " exceeds " + std::to_string(kMaxPermutationPlayers));
  }
  Allocation out = detail::blank_allocation(game, AllocationMethod::Shapley);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(d));
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  do {
    Mask before = 0;
    for (int player : order) {
      const Mask after = before | (Mask{1} << player);
      acc[static_cast<std::size_t>(player)].add(game[after] - game[before]);
      before = after;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  const double count = detail::factorial(d);
  for (int i = 0; i < d; ++i) out.shares[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)].value() / count;
  out.degenerate = game.grand_value() == 0.0;
  return out;
}

/// Probability mass function over orderings of the players.
class OrderingPmf {
 public:
  using Ordering = std::vector<int>;

  OrderingPmf(int players, std::vector<std::pair<Ordering, double>> weights)
      : players_(players), weights_(std::move(weights)) {
    check_players(players);
    CompensatedSum total;
    for (const auto& [order, w] : weights_) {
      if (static_cast<int>(order.size()) != players) {
        throw ContractError("ordering length differs from the player count");
      }
      Ordering sorted = order;
      std::sort(sorted.begin(), sorted.end());
      for (int k = 0; k < players; ++k) {
        if (sorted[static_cast<std::size_t>(k)] != k) throw ContractError("ordering is not a permutation of the players");
      }
      if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("ordering weight must be finite and nonnegative");
      total.add(w);
    }
    normalized_ = std::abs(total.value() - 1.0) <= 1e-12;
  }

  /// Uniform over all d! orderings (d <= kMaxPvOraclePlayers).
  static OrderingPmf uniform(int players) {
    check_players(players);
    if (players > kMaxPvOraclePlayers) throw ComplexityError("uniform pmf: too many players");
    const double p = 1.0 / detail::factorial(players);
    std::vector<std::pair<Ordering, double>> w;
    Ordering order(static_cast<std::size_t>(players));
    std::iota(order.begin(), order.end(), 0);
    do {
      w.emplace_back(order, p);
    } while (std::next_permutation(order.begin(), order.end()));
    return OrderingPmf(players, std::move(w));
  }

  /// All mass on one ordering.
  static OrderingPmf point(Ordering order) {
    const int d = static_cast<int>(order.size());
    return OrderingPmf(d, {{std::move(order), 1.0}});
  }

  /// p(pi) proportional to prod_j v(C_j(pi))^{-1}; positive games only,
  /// d <= kMaxPmfPlayers because the normalizer sums over all orderings.
  static OrderingPmf proportional(const GameTable& game) {
    const int d = game.players();
    if (d > kMaxPmfPlayers) throw ComplexityError("proportional pmf: too many players");
    std::vector<std::pair<Ordering, double>> w;
    CompensatedSum total;
    Ordering order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    do {
      double weight = 1.0;
      Mask before = 0;
      for (int player : order) {
        before |= Mask{1} << player;
        if (!(game[before] > 0.0)) throw PositivityError("proportional pmf needs a positive game");
        weight /= game[before];
      }
      w.emplace_back(order, weight);
      total.add(weight);
    } while (std::next_permutation(order.begin(), order.end()));
    const double norm = total.value();
    for (auto& entry : w) entry.second /= norm;
    return OrderingPmf(d, std::move(w));
  }

  int players() const { return players_; }
  bool normalized() const { return normalized_; }
  const std::vector<std::pair<Ordering, double>>& weights() const { return weights_; }

 private:
  int players_;
  std::vector<std::pair<Ordering, double>> weights_;
  bool normalized_ = false;
};

/// phi_i = sum_pi p(pi) [v(C_{pi(i)}(pi)) - v(C_{pi(i)-1}(pi))].
inline Allocation random_order_allocation(const GameTable& game, const OrderingPmf& pmf) {
  if (pmf.players() != game.players()) throw ContractError("pmf and game disagree on player count");
  if (!pmf.normalized()) throw ContractError("ordering pmf is not normalized");
  const int d = game.players();
  Allocation out = detail::blank_allocation(game, AllocationMethod::RandomOrder);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(d));
  for (const auto& [order, p] : pmf.weights()) {
    if (p == 0.0) continue;
    Mask before = 0;
    for (int player : order) {
      const Mask after = before | (Mask{1} << player);
      acc[static_cast<std::size_t>(player)].add(p * (game[after] - game[before]));
      before = after;
    }
  }
  for (int i = 0; i < d; ++i) out.shares[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)].value();
  return out;
}

/// Ratio potential R(A, v) = v(A) (sum_{j in A} R(A_{-j}, v)^{-1})^{-1},
/// R(empty, v) = 1. `v` maps a global mask (a subset of A) to its value
/// and must be positive on every nonempty subset.
template <class ValueFn>
double ratio_potential(Mask a, ValueFn&& v) {
  const std::vector<double> q = detail::inverse_ratio_potentials(a, v);
  return 1.0 / q.back();
}

inline double ratio_potential(const GameTable& game, Coalition a) {
  return ratio_potential(a.bits(), [&](Mask m) { return game[m]; });
}

/// Proportional values PV_i = R(D, v) / R(D_{-i}, v) of a positive game.
/// A zero (or negative) value raises PositivityError; use
/// proportional_values_extended for nonnegative games.
inline Allocation proportional_values(const GameTable& game) {
  const int d = game.players();
  Allocation out = detail::blank_allocation(game, AllocationMethod::PV);
  const Mask full = game.grand_mask();
  const std::vector<double> q =
      detail::inverse_ratio_potentials(full, [&](Mask m) { return game[m]; });
  const double q_full = q[full];
  for (int i = 0; i < d; ++i) {
    out.shares[static_cast<std::size_t>(i)] = q[full & ~(Mask{1} << i)] / q_full;
  }
  if (!game.monotone()) out.warnings.emplace_back("game is not monotone; shares may be distorted");
  return out;
}

/// Brute-force proportional values from the permutation-sum identity:
///   PV_i = [sum_{pi in S(D_{-i})} prod_j v(C_j(pi))^{-1}]
///        / [sum_{sigma in S(D)} prod_j v(C_j(sigma))^{-1}].
/// Test oracle; d <= kMaxPvOraclePlayers.
inline Allocation pv_permutation_oracle(const GameTable& game) {
  const int d = game.players();
  if (d > kMaxPvOraclePlayers) {
    throw ComplexityError("pv_permutation_oracle: d = " + std::to_string(d) + " exceeds " +
                          std::to_string(kMaxPvOraclePlayers));
  }
  for (Mask m = 1; m <= game.grand_mask(); ++m) {
    if (!(game[m] > 0.0)) throw PositivityError("pv_permutation_oracle needs a positive game");
  }
  auto permutation_sum = [&](Mask members) {
    std::vector<int> order;
    for (Mask m = members; m != 0; m &= m - 1) order.push_back(std::countr_zero(m));
    CompensatedSum acc;
    do {
      double prod = 1.0;
      Mask before = 0;
      for (int player : order) {
        before |= Mask{1} << player;
        prod /= game[before];
      }
      acc.add(prod);
    } while (std::next_permutation(order.begin(), order.end()));
    return acc.value();
  };
  Allocation out = detail::blank_allocation(game, AllocationMethod::PV);
  const Mask full = game.grand_mask();
  const double denom = permutation_sum(full);
  for (int i = 0; i < d; ++i) {
    out.shares[static_cast<std::size_t>(i)] = permutation_sum(full & ~(Mask{1} << i)) / denom;
  }
  return out;
}

/// Largest null coalitions of a nonnegative game. Values <= tau count as
/// null; the empty coalition is always null.
struct ZeroStructure {
  int players = 0;
  int k_max = 0;                    // size of the largest null coalition
  std::vector<Mask> largest_nulls;  // every null coalition of size k_max
  Mask common = 0;                  // players in every largest null coalition
  double tau = 0.0;

  std::vector<int> common_players() const {
    std::vector<int> out;
    for (Mask m = common; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }
};

inline ZeroStructure zero_structure(const GameTable& game, double tau = 0.0) {
  if (!(tau >= 0.0)) throw ContractError("zero threshold must be nonnegative");
  ZeroStructure z;
  z.players = game.players();
  z.tau = tau;
  const Mask full = game.grand_mask();
  for (Mask m = 1; m <= full; ++m) {
    if (game[m] <= tau) z.k_max = std::max(z.k_max, std::popcount(m));
  }
  z.largest_nulls = z.k_max == 0 ? std::vector<Mask>{0} : std::vector<Mask>{};
  if (z.k_max > 0) {
    for (Mask m : masks_of_size(z.players, z.k_max)) {
      if (game[m] <= tau) z.largest_nulls.push_back(m);
    }
  }
  z.common = full;
  for (Mask m : z.largest_nulls) z.common &= m;
  return z;
}

/// Continuous extension of proportional values to nonnegative monotone
/// games. With K the null coalitions of maximal size k_max and
/// v_A(B) = v(A u B):
///   PV0_i = 0                                  if i is in every A in K,
///   PV0_i = sum_{A in K, i not in A} R(D_{-i} \ A, v_A)^{-1}
///           / sum_{A in K} R(D \ A, v_A)^{-1}   otherwise.
/// Equals proportional_values when no nonempty coalition is null. A game
/// with v(D) <= tau gets all-zero shares and the degenerate flag.
inline Allocation proportional_values_extended(const GameTable& game, double tau = 0.0) {
  const int d = game.players();
  Allocation out = detail::blank_allocation(game, AllocationMethod::PV0);
  if (!game.monotone()) out.warnings.emplace_back("game is not monotone; shares may be distorted");
  if (!game.nonnegative()) out.warnings.emplace_back("game has negative values; treated as null");
  if (game.grand_value() <= tau) {
    out.degenerate = true;
    return out;
  }
  const ZeroStructure z = zero_structure(game, tau);
  const Mask full = game.grand_mask();
  CompensatedSum denominator;
  std::vector<CompensatedSum> numerator(static_cast<std::size_t>(d));
  for (Mask null_set : z.largest_nulls) {
    const Mask rest = full & ~null_set;
    const std::vector<double> q = detail::inverse_ratio_potentials(
        rest, [&](Mask b) { return game[null_set | b]; });
    const Mask local_full = static_cast<Mask>(q.size() - 1);
    denominator.add(q[local_full]);
    for (Mask m = rest; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      const Mask local = local_full & ~(Mask{1} << detail::local_bit(rest, i));
      numerator[static_cast<std::size_t>(i)].add(q[local]);
    }
  }
  const double denom = denominator.value();
  for (int i = 0; i < d; ++i) {
    if (z.common & (Mask{1} << i)) continue;
    out.shares[static_cast<std::size_t>(i)] = numerator[static_cast<std::size_t>(i)].value() / denom;
  }
  return out;
}

/// Proportional marginal effects: PV0 of the total-index game S^T.
/// Shares sum to st_table[D]. Throws DegenerateGameError when
/// st_table[D] <= tau (constant output).
inline Allocation pme_from_total_indices(const GameTable& st_table, double tau = 0.0) {
  if (st_table.grand_value() <= tau) {
    throw DegenerateGameError("total-index table has S^T_D = " +
                              format_double(st_table.grand_value()) +
                              " <= zero threshold; output is constant");
  }
  Allocation out = proportional_values_extended(st_table, tau);
  out.method = AllocationMethod::PME;
  return out;
}

/// Shapley effects; identical for a closed-index table and its dual
/// total-index table.
inline Allocation shapley_effects_from_indices(const GameTable& table) {
  return shapley_coalitional(table);
}

/// Players contained in every largest null coalition of the total-index
/// game: the largest exogenous input set. These receive a zero PME.
inline std::vector<int> detect_exogenous(const GameTable& st_table, double tau = 0.0) {
  return zero_structure(st_table, tau).common_players();
}

}  // namespace gsa
