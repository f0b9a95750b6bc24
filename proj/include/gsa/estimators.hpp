#pragma once

// Estimation of total Sobol' indices S^T_A = E[Var(Y | X_Abar)] / Var(Y):
//  - double Monte Carlo with an exact conditional sampler;
//  - given data, conditioning replaced by k nearest neighbours in the
//    standardized X_Abar coordinates;
// plus whole-table estimation and replicated runs with quantile intervals.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsa/allocations.hpp"
#include "gsa/coalition.hpp"
#include "gsa/dataset.hpp"
#include "gsa/errors.hpp"
#include "gsa/numeric.hpp"
#include "gsa/parallel.hpp"
#include "gsa/random.hpp"

namespace gsa {

/// Sample sizes of the double Monte Carlo scheme: nv draws for Var(Y),
/// no outer conditioning points, ni inner conditional draws each.
struct McBudget {
  std::size_t nv = 10000;
  std::size_t no = 1000;
  std::size_t ni = 100;
  std::uint64_t seed = 0;

  void check() const {
    if (nv < 2 || no < 1 || ni < 2) throw ContractError("MC budget needs nv >= 2, no >= 1, ni >= 2");
  }
  McBudget scaled(std::size_t factor) const { return {nv * factor, no * factor, ni, seed}; }
};

enum class EstimatorKind { DoubleMC, Knn };

inline std::string_view to_string(EstimatorKind k) {
  return k == EstimatorKind::DoubleMC ? "double-mc" : "knn";
}

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  double level = 0.0;
};

struct IndexEstimate {
  Mask coalition = 0;
  double value = 0.0;  // clamped to [0, 1]
  double raw = 0.0;    // before clamping
  EstimatorKind method = EstimatorKind::DoubleMC;
  std::vector<double> replications;
  std::optional<ConfidenceInterval> ci;
};

/// Unbiased sample variance, two-pass with compensated sums.
inline double estimate_variance(std::span<const double> y) {
  if (y.size() < 2) throw ContractError("variance needs at least two values");
  CompensatedSum sum;
  for (double v : y) sum.add(v);
  const double mean = sum.value() / static_cast<double>(y.size());
  CompensatedSum sq;
  for (double v : y) sq.add((v - mean) * (v - mean));
  return sq.value() / static_cast<double>(y.size() - 1);
}

inline double estimate_variance(const Eigen::VectorXd& y) {
  return estimate_variance(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

namespace detail {

inline constexpr std::uint64_t kVarianceStream = 0x56415249414E4345ULL;
inline constexpr std::uint64_t kCoalitionStream = 0x434F414C4954494FULL;
inline constexpr std::uint64_t kReplicationStream = 0x5245504C49434154ULL;

inline IndexEstimate make_estimate(Mask a, double raw, EstimatorKind kind) {
  IndexEstimate e;
  e.coalition = a;
  e.raw = raw;
  e.value = std::clamp(raw, 0.0, 1.0);
  e.method = kind;
  return e;
}

template <class Model>
Eigen::VectorXd evaluate_rows(const Model& model, const SampleMatrix& x) {
  Eigen::VectorXd y(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) y(r) = model(std::span<const double>(x.row(r).data(), d));
  return y;
}

template <class Model, class Law>
double mc_output_variance(const Model& model, const Law& law, const McBudget& budget) {
  Rng rng(budget.seed, derive_stream(kVarianceStream, 0));
  return estimate_variance(evaluate_rows(model, law.sample(budget.nv, rng)));
}

/// (1/no) sum_i Vhat^{(i)}, each Vhat^{(i)} the unbiased variance of ni
/// outputs with X_Abar fixed at the i-th outer draw.
template <class Model, class Law>
double mc_mean_conditional_variance(const Model& model, const Law& law, Coalition a,
                                    const McBudget& budget) {
  const auto cond = law.conditional(a);
  Rng rng(budget.seed, derive_stream(kCoalitionStream, a.bits()));
  CompensatedSum acc;
  for (std::size_t i = 0; i < budget.no; ++i) {
    const Eigen::VectorXd x_out = cond.sample_conditioning(rng);
    const Eigen::VectorXd y = evaluate_rows(model, cond.complete(x_out, budget.ni, rng));
    acc.add(estimate_variance(y));
  }
  return acc.value() / static_cast<double>(budget.no);
}

inline bool knn_less(double d1, int j1, double d2, int j2) { return d1 < d2 || (d1 == d2 && j1 < j2); }

/// Mean over rows of the unbiased variance of y over each row's k nearest
/// neighbours (the row itself first, then k-1 others by increasing
/// distance, ties by ascending row index). z is n x M row-major.
template <int M>
double knn_mean_local_variance(const std::vector<double>& z, int m_dyn, const Eigen::VectorXd& y, int k) {
  const int m = M > 0 ? M : m_dyn;
  const int n = static_cast<int>(y.size());
  const int slots = k - 1;
  std::vector<double> best_d(static_cast<std::size_t>(n) * slots, std::numeric_limits<double>::infinity());
  std::vector<int> best_j(static_cast<std::size_t>(n) * slots, std::numeric_limits<int>::max());
  auto insert = [&](int owner, double dist, int j) {
    double* bd = best_d.data() + static_cast<std::size_t>(owner) * slots;
    int* bj = best_j.data() + static_cast<std::size_t>(owner) * slots;
    int pos = slots - 1;
    while (pos > 0 && knn_less(dist, j, bd[pos - 1], bj[pos - 1])) {
      bd[pos] = bd[pos - 1];
      bj[pos] = bj[pos - 1];
      --pos;
    }
    bd[pos] = dist;
    bj[pos] = j;
  };
  for (int i = 0; i < n; ++i) {
    const double* zi = z.data() + static_cast<std::size_t>(i) * m;
    for (int j = i + 1; j < n; ++j) {
      const double* zj = z.data() + static_cast<std::size_t>(j) * m;
      double dist = 0.0;
      for (int c = 0; c < m; ++c) {
        const double diff = zi[c] - zj[c];
        dist += diff * diff;
      }
      const std::size_t wi = static_cast<std::size_t>(i) * slots + slots - 1;
      const std::size_t wj = static_cast<std::size_t>(j) * slots + slots - 1;
      if (knn_less(dist, j, best_d[wi], best_j[wi])) insert(i, dist, j);
      if (knn_less(dist, i, best_d[wj], best_j[wj])) insert(j, dist, i);
    }
  }
  CompensatedSum acc;
  std::vector<double> local(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    local[0] = y(i);
    for (int s = 0; s < slots; ++s) local[static_cast<std::size_t>(s + 1)] = y(best_j[static_cast<std::size_t>(i) * slots + s]);
    acc.add(estimate_variance(local));
  }
  return acc.value() / n;
}

inline double knn_dispatch(const std::vector<double>& z, int m, const Eigen::VectorXd& y, int k) {
  switch (m) {
    case 1: return knn_mean_local_variance<1>(z, m, y, k);
    case 2: return knn_mean_local_variance<2>(z, m, y, k);
    case 3: return knn_mean_local_variance<3>(z, m, y, k);
    case 4: return knn_mean_local_variance<4>(z, m, y, k);
    case 5: return knn_mean_local_variance<5>(z, m, y, k);
    case 6: return knn_mean_local_variance<6>(z, m, y, k);
    case 7: return knn_mean_local_variance<7>(z, m, y, k);
    case 8: return knn_mean_local_variance<8>(z, m, y, k);
    default: return knn_mean_local_variance<0>(z, m, y, k);
  }
}

/// Columns of `fixed` (ascending) copied row-major, each divided by its
/// sample standard deviation (constant columns are left unscaled).
inline std::vector<double> standardized_columns(const DataSet& data, const std::vector<int>& fixed) {
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t m = fixed.size();
  std::vector<double> z(n * m);
  std::vector<double> column(n);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = 0; r < n; ++r) column[r] = data.x(static_cast<Eigen::Index>(r), fixed[c]);
    const double sd = std::sqrt(estimate_variance(column));
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) z[r * m + c] = column[r] * scale;
  }
  return z;
}

}  // namespace detail

/// Double Monte Carlo estimate of S^T_A:
///   [(1/no) sum_i Vhat^{(i)}] / Vhat(Y),
/// Vhat(Y) from nv joint draws. Uses nv + no * ni model evaluations;
/// A = empty and A = D short-circuit to 0 and 1 without evaluations.
/// `law` provides sample(n, rng) and conditional(A) with
/// sample_conditioning(rng) / complete(x_out, n, rng).
template <class Model, class Law>
IndexEstimate estimate_total_sobol_mc(const Model& model, const Law& law, Coalition a,
                                      const McBudget& budget) {
  budget.check();
  if (a.is_empty()) return detail::make_estimate(0, 0.0, EstimatorKind::DoubleMC);
  if (a.bits() == full_mask(a.players())) return detail::make_estimate(a.bits(), 1.0, EstimatorKind::DoubleMC);
  const double var = detail::mc_output_variance(model, law, budget);
  if (!(var > 0.0)) throw DegenerateGameError("estimated output variance is zero");
  const double raw = detail::mc_mean_conditional_variance(model, law, a, budget) / var;
  return detail::make_estimate(a.bits(), raw, EstimatorKind::DoubleMC);
}

/// Given-data estimate of S^T_A from k nearest neighbours in the
/// standardized X_Abar coordinates (Euclidean, self included). A constant
/// output gives 0 for every A.
inline IndexEstimate estimate_total_sobol_knn(const DataSet& data, Coalition a, int k,
                                              std::optional<double> output_variance = std::nullopt) {
  if (a.players() != data.dimension()) throw ContractError("coalition/data dimension mismatch");
  if (k < 2) throw ContractError("kNN estimator needs k >= 2");
  if (data.rows() <= k) throw ContractError("kNN estimator needs more than k rows");
  const double var = output_variance ? *output_variance : estimate_variance(data.y);
  if (!(var > 0.0)) return detail::make_estimate(a.bits(), 0.0, EstimatorKind::Knn);
  if (a.is_empty()) return detail::make_estimate(0, 0.0, EstimatorKind::Knn);
  if (a.bits() == full_mask(a.players())) return detail::make_estimate(a.bits(), 1.0, EstimatorKind::Knn);
  const std::vector<int> fixed = a.complement().members();
  const std::vector<double> z = detail::standardized_columns(data, fixed);
  const double raw = detail::knn_dispatch(z, static_cast<int>(fixed.size()), data.y, k) / var;
  return detail::make_estimate(a.bits(), raw, EstimatorKind::Knn);
}

struct EstimatedTable {
  GameTable table;                      // clamped S^T values
  std::vector<IndexEstimate> estimates;  // one per coalition, by mask
  double output_variance = 0.0;
  bool degenerate = false;
};

namespace detail {

inline EstimatedTable assemble(int d, std::vector<IndexEstimate> estimates, double var, bool degenerate) {
  std::vector<double> values(estimates.size());
  for (std::size_t m = 0; m < estimates.size(); ++m) values[m] = estimates[m].value;
  values[0] = 0.0;
  if (!degenerate) values.back() = 1.0;
  return EstimatedTable{GameTable(d, std::move(values)), std::move(estimates), var, degenerate};
}

}  // namespace detail

/// S^T for all 2^d coalitions by double Monte Carlo. One Nv-sample gives
/// the shared denominator; each coalition draws from its own stream.
template <class Model, class Law>
EstimatedTable estimate_all_total_indices(const Model& model, const Law& law, const McBudget& budget,
                                          int jobs = 1) {
  budget.check();
  const int d = law.dimension();
  check_players(d);
  const double var = detail::mc_output_variance(model, law, budget);
  if (!(var > 0.0)) throw DegenerateGameError("estimated output variance is zero");
  const std::size_t count = std::size_t{1} << d;
  std::vector<IndexEstimate> estimates(count);
  estimates[0] = detail::make_estimate(0, 0.0, EstimatorKind::DoubleMC);
  estimates[count - 1] = detail::make_estimate(full_mask(d), 1.0, EstimatorKind::DoubleMC);
  parallel_for(count - 2, jobs, [&](std::size_t idx) {
    const Mask m = static_cast<Mask>(idx + 1);
    const double raw = detail::mc_mean_conditional_variance(model, law, Coalition(m, d), budget) / var;
    estimates[m] = detail::make_estimate(m, raw, EstimatorKind::DoubleMC);
  });
  return detail::assemble(d, std::move(estimates), var, false);
}

struct KnnParams {
  int k = 6;
};

/// S^T for all 2^d coalitions from one data set. A constant output yields
/// an all-zero table flagged degenerate.
inline EstimatedTable estimate_all_total_indices(const DataSet& data, KnnParams params, int jobs = 1) {
  const int d = data.dimension();
  check_players(d);
  const double var = estimate_variance(data.y);
  const std::size_t count = std::size_t{1} << d;
  std::vector<IndexEstimate> estimates(count);
  if (!(var > 0.0)) {
    for (std::size_t m = 0; m < count; ++m) estimates[m] = detail::make_estimate(static_cast<Mask>(m), 0.0, EstimatorKind::Knn);
    return detail::assemble(d, std::move(estimates), var, true);
  }
  parallel_for(count, jobs, [&](std::size_t idx) {
    const Mask m = static_cast<Mask>(idx);
    estimates[m] = estimate_total_sobol_knn(data, Coalition(m, d), params.k, var);
  });
  return detail::assemble(d, std::move(estimates), var, false);
}

// ---------------------------------------------------------------------------
// Replication

enum class ReplicationScheme { IndependentSeeds, Subsample80 };

inline std::string_view to_string(ReplicationScheme s) {
  return s == ReplicationScheme::IndependentSeeds ? "independent-seeds" : "subsample80";
}

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct ShareSummary {
  AllocationMethod method = AllocationMethod::Shapley;
  std::vector<double> mean;
  std::vector<ConfidenceInterval> ci;
  std::vector<std::vector<double>> replicates;  // [replication][player]
};

struct ReplicationResult {
  int replications = 0;
  double level = 0.0;
  ShareSummary shapley;
  ShareSummary pme;
  std::vector<IndexEstimate> indices;  // per coalition, with replications and CI
  int non_monotone_tables = 0;
};

namespace detail {

inline ShareSummary summarize(AllocationMethod method, std::vector<std::vector<double>> reps, double level) {
  ShareSummary s;
  s.method = method;
  const std::size_t d = reps.front().size();
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> column;
    CompensatedSum acc;
    for (const auto& r : reps) {
      column.push_back(r[i]);
      acc.add(r[i]);
    }
    s.mean.push_back(acc.value() / static_cast<double>(reps.size()));
    s.ci.push_back({empirical_quantile(column, (1.0 - level) / 2.0),
                    empirical_quantile(column, (1.0 + level) / 2.0), level});
  }
  s.replicates = std::move(reps);
  return s;
}

}  // namespace detail

/// Runs table_for(r) for r = 0..R-1, computes Shapley effects and PME on
/// every table, and summarizes each player by its mean and the empirical
/// quantile interval at `level`.
template <class TableFn>
ReplicationResult replicate_tables(TableFn&& table_for, int replications, double level, double tau,
                                   int jobs = 1) {
  if (replications < 2) throw ContractError("replication needs R >= 2");
  if (!(level > 0.0 && level < 1.0)) throw ContractError("confidence level must lie in (0, 1)");
  const auto count = static_cast<std::size_t>(replications);
  std::vector<EstimatedTable> tables;
  tables.reserve(count);
  std::vector<std::optional<EstimatedTable>> slots(count);
  parallel_for(count, jobs, [&](std::size_t r) { slots[r] = table_for(static_cast<int>(r)); });
  for (auto& s : slots) tables.push_back(std::move(*s));

  ReplicationResult out;
  out.replications = replications;
  out.level = level;
  std::vector<std::vector<double>> sh;
  std::vector<std::vector<double>> pme;
  for (const EstimatedTable& t : tables) {
    if (!t.table.monotone()) ++out.non_monotone_tables;
    sh.push_back(shapley_effects_from_indices(t.table).shares);
    pme.push_back(pme_from_total_indices(t.table, tau).shares);
  }
  out.shapley = detail::summarize(AllocationMethod::Shapley, std::move(sh), level);
  out.pme = detail::summarize(AllocationMethod::PME, std::move(pme), level);

  const std::size_t coalitions = tables.front().table.size();
  for (std::size_t m = 0; m < coalitions; ++m) {
    IndexEstimate e = tables.front().estimates[m];
    e.replications.clear();
    CompensatedSum acc;
    for (const auto& t : tables) {
      e.replications.push_back(t.table[static_cast<Mask>(m)]);
      acc.add(t.table[static_cast<Mask>(m)]);
    }
    e.value = acc.value() / static_cast<double>(count);
    e.raw = e.value;
    e.ci = ConfidenceInterval{empirical_quantile(e.replications, (1.0 - level) / 2.0),
                              empirical_quantile(e.replications, (1.0 + level) / 2.0), level};
    out.indices.push_back(std::move(e));
  }
  return out;
}

/// Double Monte Carlo estimation configuration.
template <class Model, class Law>
struct McJob {
  const Model& model;
  const Law& law;
  McBudget budget;
};

/// Given-data estimation configuration.
struct KnnJob {
  const DataSet& data;
  KnnParams params;
  std::uint64_t seed = 0;
};

/// Replicated double Monte Carlo runs; replication r uses the seed
/// derive_stream(budget.seed, r). Only IndependentSeeds applies.
template <class Model, class Law>
ReplicationResult replicate_with_ci(const McJob<Model, Law>& job, int replications, ReplicationScheme scheme,
                                    double level, double tau = 0.0, int jobs = 1) {
  if (scheme != ReplicationScheme::IndependentSeeds) {
    throw ContractError("Monte Carlo replication draws fresh samples; use IndependentSeeds");
  }
  return replicate_tables(
      [&](int r) {
        McBudget b = job.budget;
        b.seed = derive_stream(job.budget.seed ^ detail::kReplicationStream, static_cast<std::uint64_t>(r));
        return estimate_all_total_indices(job.model, job.law, b, 1);
      },
      replications, level, tau, jobs);
}

/// Rows kept by one Subsample80 replication: floor(0.8 n) rows drawn
/// without replacement (partial Fisher-Yates), returned in ascending order.
inline std::vector<Eigen::Index> subsample_rows(Eigen::Index n, std::uint64_t seed, int replication) {
  Rng rng(seed, derive_stream(detail::kReplicationStream, static_cast<std::uint64_t>(replication)));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  const auto keep = static_cast<std::size_t>((n * 4) / 5);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Replicated given-data runs: Subsample80 re-estimates on 80% row subsets;
/// IndependentSeeds reuses the full data set (deterministic replicates).
inline ReplicationResult replicate_with_ci(const KnnJob& job, int replications, ReplicationScheme scheme,
                                           double level, double tau = 0.0, int jobs = 1) {
  return replicate_tables(
      [&](int r) {
        if (scheme == ReplicationScheme::Subsample80) {
          return estimate_all_total_indices(job.data.subset(subsample_rows(job.data.rows(), job.seed, r)),
                                            job.params, 1);
        }
        return estimate_all_total_indices(job.data, job.params, 1);
      },
      replications, level, tau, jobs);
}

}  // namespace gsa
