#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsa/errors.hpp"

namespace gsa {

/// Largest supported player count; a dense table holds 2^20 values.
inline constexpr int kMaxPlayers = 20;

using Mask = std::uint32_t;

inline void check_players(int d) {
  if (d < 1 || d > kMaxPlayers) {
    throw DimensionError("player count " + std::to_string(d) + " outside [1, " +
                         std::to_string(kMaxPlayers) + "]");
  }
}

inline constexpr Mask full_mask(int d) { return d >= 32 ? ~Mask{0} : ((Mask{1} << d) - 1); }

inline int popcount(Mask m) { return std::popcount(m); }

/// A subset of the players {0, ..., d-1}, stored as a bitmask.
class Coalition {
 public:
  Coalition(Mask bits, int players) : bits_(bits), players_(players) {
    check_players(players);
    if ((bits & ~full_mask(players)) != 0) {
      throw ContractError("coalition bits exceed player count " + std::to_string(players));
    }
  }

  static Coalition empty(int players) { return {0, players}; }
  static Coalition grand(int players) { return {full_mask(players), players}; }
  static Coalition of(std::initializer_list<int> members, int players) {
    Mask bits = 0;
    for (int i : members) {
      if (i < 0 || i >= players) throw ContractError("player index out of range");
      bits |= Mask{1} << i;
    }
    return {bits, players};
  }

  Mask bits() const { return bits_; }
  int players() const { return players_; }
  int size() const { return std::popcount(bits_); }
  bool is_empty() const { return bits_ == 0; }
  bool contains(int i) const { return (bits_ >> i) & 1U; }
  bool subset_of(const Coalition& other) const { return (bits_ & ~other.bits_) == 0; }

  Coalition with(int i) const { return {bits_ | (Mask{1} << i), players_}; }
  Coalition without(int i) const { return {bits_ & ~(Mask{1} << i), players_}; }
  Coalition complement() const { return {full_mask(players_) & ~bits_, players_}; }

  std::vector<int> members() const {
    std::vector<int> out;
    for (Mask m = bits_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  friend bool operator==(const Coalition&, const Coalition&) = default;
  friend auto operator<=>(const Coalition&, const Coalition&) = default;

 private:
  Mask bits_;
  int players_;
};

/// All 2^d coalitions by nondecreasing size, ties by ascending bit value.
inline std::vector<Coalition> enumerate_coalitions(int d) {
  check_players(d);
  std::vector<Mask> masks(std::size_t{1} << d);
  for (std::size_t m = 0; m < masks.size(); ++m) masks[m] = static_cast<Mask>(m);
  std::stable_sort(masks.begin(), masks.end(),
                   [](Mask a, Mask b) { return std::popcount(a) < std::popcount(b); });
  std::vector<Coalition> out;
  out.reserve(masks.size());
  for (Mask m : masks) out.emplace_back(m, d);
  return out;
}

/// Masks of one cardinality in ascending order (Gosper's hack).
inline std::vector<Mask> masks_of_size(int d, int k) {
  std::vector<Mask> out;
  if (k < 0 || k > d) return out;
  if (k == 0) return {0};
  Mask m = full_mask(k);
  const Mask limit = Mask{1} << d;
  while (m < limit) {
    out.push_back(m);
    const Mask c = m & (~m + 1);
    const Mask r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
    if (r == 0) break;
  }
  return out;
}

struct MonotonicityViolation {
  Mask smaller;  // A
  Mask larger;   // A with one extra player
  double drop;   // values[A] - values[A u {i}] > tol
};

struct ValidationReport {
  std::vector<MonotonicityViolation> monotonicity;
  std::vector<Mask> negative;

  bool monotone() const { return monotonicity.empty(); }
  bool nonnegative() const { return negative.empty(); }
  bool ok() const { return monotone() && nonnegative(); }
};

inline ValidationReport validate_values(int d, const std::vector<double>& values,
                                        double tol = 1e-12) {
  ValidationReport report;
  const Mask n = Mask{1} << d;
  for (Mask a = 0; a < n; ++a) {
    if (values[a] < -tol) report.negative.push_back(a);
    for (int i = 0; i < d; ++i) {
      const Mask bit = Mask{1} << i;
      if (a & bit) continue;
      const double drop = values[a] - values[a | bit];
      if (drop > tol) report.monotonicity.push_back({a, a | bit, drop});
    }
  }
  return report;
}

/// Dense value function over all 2^d coalitions. Immutable once built;
/// the monotone/nonnegative flags are established at construction.
class GameTable {
 public:
  GameTable(int players, std::vector<double> values) : d_(players), values_(std::move(values)) {
    check_players(players);
    if (values_.size() != (std::size_t{1} << players)) {
      throw ContractError("game table needs 2^d = " + std::to_string(std::size_t{1} << players) +
                          " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw ContractError("game table holds a non-finite value");
    }
    if (values_[0] != 0.0) throw ContractError("game table must satisfy v(empty) = 0");
    const ValidationReport report = validate_values(d_, values_);
    monotone_ = report.monotone();
    nonnegative_ = report.nonnegative();
  }

  template <class F>
  static GameTable from_function(int players, F&& value_of) {
    check_players(players);
    std::vector<double> values(std::size_t{1} << players);
    for (std::size_t m = 0; m < values.size(); ++m) {
      values[m] = value_of(Coalition(static_cast<Mask>(m), players));
    }
    return GameTable(players, std::move(values));
  }

  int players() const { return d_; }
  std::size_t size() const { return values_.size(); }
  Mask grand_mask() const { return full_mask(d_); }
  double grand_value() const { return values_.back(); }

  double operator[](Mask m) const { return values_[m]; }
  double operator[](const Coalition& a) const { return values_[a.bits()]; }
  const std::vector<double>& values() const { return values_; }

  bool monotone() const { return monotone_; }
  bool nonnegative() const { return nonnegative_; }

  GameTable scaled(double c) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= c;
    return GameTable(d_, std::move(v));
  }

 private:
  int d_;
  std::vector<double> values_;
  bool monotone_ = false;
  bool nonnegative_ = false;
};

/// Every immediate monotonicity drop and every negative value beyond tol.
inline ValidationReport validate(const GameTable& game, double tol = 1e-12) {
  return validate_values(game.players(), game.values(), tol);
}

/// w(A) = v(D) - v(D \ A).
inline GameTable dual(const GameTable& game) {
  const Mask full = game.grand_mask();
  std::vector<double> w(game.size());
  const double total = game.grand_value();
  for (Mask a = 0; a <= full; ++a) w[a] = total - game[full & ~a];
  w[0] = 0.0;
  return GameTable(game.players(), std::move(w));
}

/// The game restricted to the members of `a`, re-indexed 0..|a|-1 in
/// ascending order of the original indices.
inline GameTable subgame(const GameTable& game, Coalition a) {
  const std::vector<int> members = a.members();
  const int k = static_cast<int>(members.size());
  if (k == 0) throw ContractError("subgame of the empty coalition");
  std::vector<double> values(std::size_t{1} << k);
  for (Mask local = 0; local < values.size(); ++local) {
    Mask global = 0;
    for (int j = 0; j < k; ++j) {
      if (local & (Mask{1} << j)) global |= Mask{1} << members[j];
    }
    values[local] = game[global];
  }
  return GameTable(k, std::move(values));
}

/// Allocation rules that can produce an Allocation.
enum class AllocationMethod { Shapley, PV, PV0, PME, RandomOrder };

inline std::string_view to_string(AllocationMethod m) {
  switch (m) {
    case AllocationMethod::Shapley: return "shapley";
    case AllocationMethod::PV: return "pv";
    case AllocationMethod::PV0: return "pv0";
    case AllocationMethod::PME: return "pme";
    case AllocationMethod::RandomOrder: return "random-order";
  }
  return "unknown";
}

/// Per-player shares of `total` (the grand-coalition value).
struct Allocation {
  std::vector<double> shares;
  double total = 0.0;
  AllocationMethod method = AllocationMethod::Shapley;
  bool degenerate = false;
  std::vector<std::string> warnings;

  int players() const { return static_cast<int>(shares.size()); }
  double operator[](int i) const { return shares[static_cast<std::size_t>(i)]; }
};

}  // namespace gsa
